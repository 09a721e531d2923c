#include "acceptance.hpp"
#include "wtc/error.hpp"

namespace wtc::acceptance {

namespace {

struct Context {
  const WittSystem& w;
  Checks& c;
  std::vector<RepresentedClass> ring;
};

std::vector<AlignmentClass> homs_from(const LineBundle& l, const std::vector<LineBundle>& targets) {
  std::vector<AlignmentClass> out;
  for (const auto& t : targets)
    for (const auto& a : alignments_between(l, t)) out.push_back(a);
  return out;
}

std::vector<LineBundle> in_scope(const WittModule& m, long radius) {
  std::vector<LineBundle> out;
  for (const auto& l : bundles(m.scheme, radius))
    if (m.in_scope(l.cls)) out.push_back(l);
  return out;
}

KAlignmentClass kal(const WittModule& m, const LineBundle& k, const LineBundle& l, const AlignmentClass& a) {
  return KAlignmentClass(m.pi, k, l, a);
}

// alis(B)(alis(C)(λ) ·_A alis(D)(w)) = λ ·_E w with E = B∘A∘((π*C)⊗D)
void similitude_lemma(Context& x, const WittModule& m, const std::vector<RepresentedClass>& elems) {
  SchemePtr base = m.pi->target;
  std::vector<LineBundle> ys = in_scope(m, 1), xs = bundles(base, 1);
  for (const auto& lambda : x.ring)
    for (const auto& v : elems)
      for (const auto& cc : homs_from(lambda.twist(), xs))
        for (const auto& d : homs_from(v.twist(), ys)) {
          RepresentedClass lc = x.w.transport(lambda, cc), vd = x.w.transport(v, d);
          LineBundle src = pull_bundle(*m.pi, cc.target()) + d.target();
          for (const auto& a : homs_from(src, ys)) {
            RepresentedClass inner = x.w.lax_product(lc, kal(m, cc.target(), d.target(), a), vd);
            AlignmentClass pc = tensor(pull_alignment(*m.pi, cc), d);
            for (const auto& b : homs_from(a.target(), ys)) {
              AlignmentClass e = compose(b, compose(a, pc));
              RepresentedClass lhs = x.w.transport(inner, b);
              RepresentedClass rhs = x.w.lax_product(lambda, kal(m, lambda.twist(), v.twist(), e), v);
              x.c.expect(x.w.compare(lhs, rhs), "lax product does not commute with similitudes on " + m.name + " at " +
                                                    v.to_string());
            }
          }
        }
}

// λ ·_{A1} w = alis(C)(λ) ·_{A2} w with C = move_coefficient(A1, A2)
void coefficient_lemma(Context& x, const WittModule& m, const std::vector<RepresentedClass>& elems) {
  SchemePtr base = m.pi->target;
  std::vector<LineBundle> ys = in_scope(m, 1), xs = bundles(base, 1);
  for (const auto& v : elems)
    for (const auto& k1 : xs)
      for (const auto& a1 : homs_from(pull_bundle(*m.pi, k1) + v.twist(), ys))
        for (const auto& k2 : xs)
          for (const auto& a2 : alignments_between(pull_bundle(*m.pi, k2) + v.twist(), a1.target())) {
            KAlignmentClass q1 = kal(m, k1, v.twist(), a1), q2 = kal(m, k2, v.twist(), a2);
            AlignmentClass cc = move_coefficient(m.pi, q1, q2);
            x.c.expect(compose(a2, tensor(pull_alignment(*m.pi, cc), AlignmentClass::identity(v.twist()))) == a1,
                       "move_coefficient does not recompose on " + m.name);
            for (const auto& lambda : x.ring) {
              if (lambda.twist() != k1) continue;
              RepresentedClass lhs = x.w.lax_product(lambda, q1, v);
              RepresentedClass rhs = x.w.lax_product(x.w.transport(lambda, cc), q2, v);
              x.c.expect(x.w.compare(lhs, rhs), "coefficient realignment fails on " + m.name + " at " + v.to_string());
            }
          }
}

// λ2 ·_{A2} (λ1 ·_{A1} w) = (λ2·λ1) ·_{A3} w with A3 = A2∘(id_{π*K2}⊗A1)
void associativity_lemma(Context& x, const WittModule& m, const std::vector<RepresentedClass>& elems) {
  std::vector<LineBundle> ys = in_scope(m, 1);
  for (const auto& v : elems)
    for (const auto& l1 : x.ring)
      for (const auto& a1 : homs_from(pull_bundle(*m.pi, l1.twist()) + v.twist(), ys)) {
        RepresentedClass once = x.w.lax_product(l1, kal(m, l1.twist(), v.twist(), a1), v);
        for (const auto& l2 : x.ring) {
          LineBundle pk2 = pull_bundle(*m.pi, l2.twist());
          for (const auto& a2 : homs_from(pk2 + a1.target(), ys)) {
            RepresentedClass lhs = x.w.lax_product(l2, kal(m, l2.twist(), a1.target(), a2), once);
            AlignmentClass a3 = compose(a2, tensor(AlignmentClass::identity(pk2), a1));
            RepresentedClass prod = x.w.ring_product(l2, l1);
            RepresentedClass rhs = x.w.lax_product(prod, kal(m, prod.twist(), v.twist(), a3), v);
            x.c.expect(x.w.compare(lhs, rhs), "lax products are not associative on " + m.name + " at " + v.to_string());
          }
        }
      }
}

TwistedGroupRef ref_of(const WittSystem& w, const RepresentedClass& v) {
  const WittModule& m = w.module(v.module);
  return {m.scheme, m.support, v.degree, v.twist().cls};
}

RepresentedClass run(const WittSystem& w, const MorphismExpr& e, const RepresentedClass& v) { return w.eval(e, v); }

// f^[B̄](λ ·_C w) = λ ·_C̄ f^[Ā](w) with C̄ from the pull-frame square
void pull_lemma(Context& x, const RegisteredMap& map, const std::vector<RepresentedClass>& elems) {
  const Geometry& g = x.w.geometry;
  const WittModule& m = x.w.module(map.source);
  const WittModule& mb = x.w.module(map.target);
  Tower t = g.tower(map.f);
  std::vector<LineBundle> ys = in_scope(m, 1), ybs = in_scope(mb, 1), xs = bundles(m.pi->target, 1);
  for (const auto& v : elems)
    for (const auto& k : xs)
      for (const auto& cc : homs_from(pull_bundle(*m.pi, k) + v.twist(), ys))
        for (const auto& abar : homs_from(pull_bundle(*t.f, v.twist()), ybs))
          for (const auto& bbar : homs_from(pull_bundle(*t.f, cc.target()), ybs)) {
            CoefficientSquare sq{t, Frame::Pull, abar, bbar, v.twist(), cc.target()};
            KAlignmentClass c = kal(m, k, v.twist(), cc);
            KAlignmentClass cbar = sq.lift_up(c);
            x.c.expect(sq.commutes(c, cbar), "pull-frame square does not commute along " + map.name);
            x.c.expect(sq.descend(cbar) == c || sq.commutes(sq.descend(cbar), cbar), "pull-frame descent fails");
            MorphismExpr fa = lax_word(g, LaxPull{t.f, abar}, ref_of(x.w, v));
            RepresentedClass pulled = run(x.w, fa, v);
            for (const auto& lambda : x.ring) {
              if (lambda.twist() != k) continue;
              RepresentedClass prod = x.w.lax_product(lambda, c, v);
              RepresentedClass lhs = run(x.w, lax_word(g, LaxPull{t.f, bbar}, ref_of(x.w, prod)), prod);
              RepresentedClass rhs = x.w.lax_product(lambda, cbar, pulled);
              x.c.expect(x.w.compare(lhs, rhs), "lax pull-back is not lax linear along " + map.name + " at " +
                                                    v.to_string());
            }
          }
}

// f_[B̄](λ ·_C̄ w̄) = λ ·_C f_[Ā](w̄) with C from the push-frame square. The
// codomain twist of a push is explicit since f* need not be injective.
void push_lemma(Context& x, const RegisteredMap& map, const std::vector<RepresentedClass>& elems) {
  const Geometry& g = x.w.geometry;
  const WittModule& mb = x.w.module(map.source);
  const WittModule& m = x.w.module(map.target);
  Tower t = g.tower(map.f);
  std::vector<LineBundle> ys = in_scope(m, 1), ybs = in_scope(mb, 1), xs = bundles(m.pi->target, 1);
  auto push = [&](const AlignmentClass& a, const LineBundle& to, const RepresentedClass& v) {
    return run(x.w, typecheck(g, {make_alis(a), make_push(t.f, to.cls)}, ref_of(x.w, v)), v);
  };
  for (const auto& v : elems)
    for (const auto& ly : ys)
      for (const auto& abar : alignments_between(v.twist(), shriek_bundle(*t.f, ly))) {
        RepresentedClass pushed_v = push(abar, ly, v);
        for (const auto& k : xs)
          for (const auto& cbar : homs_from(pull_bundle(*mb.pi, k) + v.twist(), ybs))
            for (const auto& my : ys) {
              if (!alignment_exists(pull_bundle(*m.pi, k) + ly, my)) continue;
              for (const auto& bbar : alignments_between(cbar.target(), shriek_bundle(*t.f, my))) {
                CoefficientSquare sq{t, Frame::Push, abar, bbar, ly, my};
                KAlignmentClass cb = kal(mb, k, v.twist(), cbar);
                KAlignmentClass c = sq.descend(cb);
                x.c.expect(sq.commutes(c, cb), "push-frame square does not commute along " + map.name);
                for (const auto& lambda : x.ring) {
                  if (lambda.twist() != k) continue;
                  RepresentedClass prod = x.w.lax_product(lambda, cb, v);
                  RepresentedClass lhs = push(bbar, my, prod);
                  RepresentedClass rhs = x.w.lax_product(lambda, c, pushed_v);
                  x.c.expect(x.w.compare(lhs, rhs),
                             "projection formula fails along " + map.name + " at " + v.to_string());
                }
              }
            }
      }
}

/// Runs one lemma, turning an exception into a failed check that names it.
/// A lemma without instances also fails.
template <class F>
void guarded(Checks& c, const std::string& what, F&& body) {
  std::size_t before = c.count();
  try {
    body();
    c.expect(c.count() > before, what + ": no instances");
  } catch (const Error& e) {
    c.fail(what + ": " + std::string(to_string(e.kind())) + ": " + e.message() + " [" + e.witness() + "]");
  }
}

}  // namespace

void lax_suite(Checks& c) {
  for (const char* fx : {"point.json", "affine_line.json", "projective_line.json", "f1.json"}) {
    WittSystem w = load_system(fx);
    Context x{w, c, w.elements(WittSystem::kRing, 2)};
    for (const auto& [name, m] : w.modules) {
      auto elems = w.elements(name, 2);
      std::string where = std::string(fx) + " " + name;
      guarded(c, "similitudes on " + where, [&] { similitude_lemma(x, m, elems); });
      guarded(c, "coefficients on " + where, [&] { coefficient_lemma(x, m, elems); });
      guarded(c, "associativity on " + where, [&] { associativity_lemma(x, m, elems); });
    }
    for (const auto& [name, map] : w.maps) {
      std::string where = std::string(fx) + " " + name;
      if (map.kind == GenKind::Pull)
        guarded(c, "pull frame on " + where, [&] { pull_lemma(x, map, w.elements(map.source, 2)); });
      if (map.kind == GenKind::Push)
        guarded(c, "push frame on " + where, [&] { push_lemma(x, map, w.elements(map.source, 2)); });
    }
  }
}

}  // namespace wtc::acceptance
