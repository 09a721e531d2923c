#pragma once

#include <set>

#include "support.hpp"
#include "wtc/basis.hpp"

namespace wtc::testing {

/// Brute force: the map (λ_s) ↦ Σ λ_s ·_C w_s on a finite cell is a bijection
/// iff it hits every element of the target exactly once.
inline bool brute_force_iso(const WittSystem& w, const BasisCandidate& c, long k, const F2Vec& q) {
  const WittModule& m = w.module(c.module);
  LineBundle target = m.representative(q);
  std::vector<std::vector<RepresentedClass>> options;
  std::vector<KAlignmentClass> al;
  std::vector<const BasisMember*> used;
  for (const auto& s : c.family) {
    if (m.relative_class(s.w.twist().cls) != m.relative_class(target.cls)) continue;
    LineBundle kt = coefficient_twist(w, m, s.w.twist(), target);
    LineBundle src = pull_bundle(*m.pi, kt) + s.w.twist();
    al.emplace_back(m.pi, kt, s.w.twist(), standard_alignment(src, target));
    GroupPtr b = w.ring.piece(w.ring.key(k - s.w.degree, kt.cls));
    std::vector<RepresentedClass> xs;
    for (const auto& g : enumerate_elements(b)) xs.push_back(w.canonical(WittSystem::kRing, k - s.w.degree, kt.cls, g));
    options.push_back(xs);
    used.push_back(&s);
  }
  std::size_t total = 1;
  for (const auto& o : options) total *= o.size();
  std::set<std::string> seen;
  std::vector<std::size_t> pick(options.size(), 0);
  for (std::size_t n = 0; n < total; ++n) {
    std::vector<WittSystem::Term> terms;
    for (std::size_t i = 0; i < options.size(); ++i) terms.push_back({options[i][pick[i]], al[i], used[i]->w});
    RepresentedClass sum = terms.empty() ? w.zero(c.module, k, target) : w.lax_combination(terms, k, target);
    seen.insert(w.coordinates(sum).to_string());
    for (std::size_t i = 0; i < pick.size(); ++i) {
      if (++pick[i] < options[i].size()) break;
      pick[i] = 0;
    }
  }
  std::size_t target_size = enumerate_elements(m.piece(m.key(k, target.cls))).size();
  return seen.size() == total && total == target_size;
}

}  // namespace wtc::testing
