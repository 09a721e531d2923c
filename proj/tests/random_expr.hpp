#pragma once

#include <random>

#include "wtc/error.hpp"
#include "wtc/expr.hpp"

namespace wtc::testing {

/// Random alignment class on s with source l, coordinates drawn from [-2, 2].
inline AlignmentClass random_alignment(const SchemePtr& s, const GroupElement& l, std::mt19937& rng) {
  std::uniform_int_distribution<int> coord(-2, 2), bit(0, 1);
  IntVector c(s->pic->rank());
  for (auto& x : c) x = coord(rng);
  GroupElement m(s->pic, c);
  F2Vec u(s->units.dim());
  for (auto& b : u) b = static_cast<std::uint8_t>(bit(rng));
  return AlignmentClass({s, l}, {s, l + m.times(2)}, m, u);
}

/// A well-typed word of at most `length` generators starting at `domain`.
inline MorphismExpr random_expr(const Geometry& g, const TwistedGroupRef& domain, std::size_t length,
                                std::mt19937& rng) {
  std::vector<Generator> word;
  TwistedGroupRef ref = domain;
  bool used_push = false, used_bord = false;
  for (std::size_t i = 0; i < length; ++i) {
    std::vector<Generator> options;
    options.push_back(make_alis(random_alignment(ref.scheme, ref.twist, rng)));
    options.push_back(make_alis(random_alignment(ref.scheme, ref.twist, rng)));
    for (const auto& [name, f] : g.morphisms) {
      if (f->target == ref.scheme && f->source->name != g.base && f->target->name != g.base) {
        try {
          f->pull_support(ref.support);
          options.push_back(make_pull(f));
        } catch (const Error&) {
        }
      }
      if (!used_bord && f->source == ref.scheme && f->proper && f->target->name != g.base) {
        auto s = solve_linear(f->pic_pullback, ref.twist - f->proper->omega);
        bool support_ok = true;
        try {
          f->push_support(ref.support);
        } catch (const Error&) {
          support_ok = false;
        }
        if (s && support_ok) options.push_back(make_push(f));
      }
    }
    for (const auto& [name, l] : g.localizations) {
      if (ref.scheme->name == l.total && ref.support == l.support) options.push_back(make_local(GenKind::Ext, name));
      if (ref.scheme->name == l.total && ref.support == "full") options.push_back(make_local(GenKind::Restrict, name));
      if (!used_push && ref.scheme->name == l.open && ref.support == "full") {
        auto u = g.morphism(l.upsilon);
        if (solve_linear(u->pic_pullback, ref.twist)) options.push_back(make_local(GenKind::Bord, name));
      }
    }
    Generator pick = options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)];
    used_push |= pick.kind == GenKind::Push;
    used_bord |= pick.kind == GenKind::Bord;
    word.push_back(pick);
    ref = typecheck(g, word, domain).codomain();
  }
  return typecheck(g, std::move(word), domain);
}

}  // namespace wtc::testing
