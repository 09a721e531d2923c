#include "wtc/descent.hpp"

#include <map>
#include <sstream>

#include "wtc/error.hpp"

namespace wtc {

namespace {

std::string f2_string(const F2Vec& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(int(v[i]));
  return s + "]";
}

GroupPtr two_group(std::size_t dim) { return FgAbGroup::elementary_two(dim); }

}  // namespace

std::string SmPicCertificate::summary() const {
  if (pass()) return "pass";
  std::ostringstream os;
  bool first = true;
  auto sep = [&] {
    if (!first) os << "; ";
    first = false;
  };
  if (!injective) {
    sep();
    os << "fail (I) kernel element " << kernel_witness->to_string();
  }
  if (!no_two_torsion) {
    sep();
    os << "fail (II) 2-torsion class lifted to " << torsion_witness->to_string();
  }
  if (!units_surjective) {
    sep();
    os << "fail (III) unit class " << f2_string(*unit_witness) << " outside the image";
  }
  return os.str();
}

SmPicCertificate certify_smpic(const Morphism& pi) {
  SmPicCertificate c;
  c.morphism = pi.name;
  HomAnalysis a = hom_analyze(pi.pic_pullback);
  if (!a.kernel.group->is_trivial()) {
    c.injective = false;
    c.kernel_witness = a.kernel.inclusion(GroupElement::generator(a.kernel.group, 0));
  }
  Subgroup t = two_torsion(a.cokernel);
  if (!t.group->is_trivial()) {
    c.no_two_torsion = false;
    GroupElement x = t.inclusion(GroupElement::generator(t.group, 0));
    c.torsion_witness = GroupElement(pi.source->pic, a.cokernel->presentation_from_canonical(x.coords()));
  }
  f2::Echelon img = f2::echelon(pi.unit_pullback.columns(), pi.unit_pullback.target_dim());
  for (std::size_t i = 0; i < pi.unit_pullback.target_dim(); ++i) {
    F2Vec e(pi.unit_pullback.target_dim(), 0);
    e[i] = 1;
    if (!img.contains(e)) {
      c.units_surjective = false;
      c.unit_witness = e;
      break;
    }
  }
  return c;
}

void require_smpic(const Morphism& pi) {
  SmPicCertificate c = certify_smpic(pi);
  if (!c.pass()) throw Error(ErrorKind::NotSmPic, pi.source->name + " is not SmPic over " + pi.target->name, c.summary());
}

GroupElement RelativePic::lift(const GroupElement& x, const GroupPtr& pic) const {
  return GroupElement(pic, group->presentation_from_canonical(x.coords()));
}

RelativePic relative_pic(const Morphism& pi) {
  HomAnalysis a = hom_analyze(pi.pic_pullback);
  return {a.cokernel, a.projection};
}

void Tower::validate() const {
  if (!f || !pi || !pi_bar) throw Error(ErrorKind::HypothesisFailed, "incomplete tower");
  if (f->source != pi_bar->source || f->target != pi->source || pi_bar->target != pi->target)
    throw Error(ErrorKind::HypothesisFailed, "morphisms do not form a tower over the base",
                f->name + ", " + pi_bar->name + ", " + pi->name);
  if (!(f->pic_pullback.after(pi->pic_pullback).matrix() == pi_bar->pic_pullback.matrix()))
    throw Error(ErrorKind::HypothesisFailed, "Picard pullbacks do not commute over the base", f->name);
  if (!(f->unit_pullback.after(pi->unit_pullback) == pi_bar->unit_pullback))
    throw Error(ErrorKind::HypothesisFailed, "unit pullbacks do not commute over the base", f->name);
}

// ------------------------------------------------------------------ chases

GroupElement TwoTorsionChase::preimage(const GroupElement& xbar) const {
  auto y = solve_linear(torsion_bar.inclusion, xbar);
  if (!y) throw Error(ErrorKind::HypothesisFailed, "element is not 2-torsion", xbar.to_string());
  auto s = solve_linear(restricted, y->particular);
  if (!s) throw Error(ErrorKind::HypothesisFailed, "2-torsion element has no preimage", xbar.to_string());
  return torsion.inclusion(s->particular);
}

TwoTorsionChase chase_two_torsion(const Tower& t) {
  t.validate();
  TwoTorsionChase c;
  c.torsion = two_torsion(t.f->target->pic);
  c.torsion_bar = two_torsion(t.f->source->pic);
  IntMatrix m(c.torsion_bar.group->rank(), c.torsion.group->rank());
  for (std::size_t k = 0; k < c.torsion.group->rank(); ++k) {
    GroupElement x = t.f->pic_pullback(c.torsion.inclusion(GroupElement::generator(c.torsion.group, k)));
    auto s = solve_linear(c.torsion_bar.inclusion, x);
    if (!s) throw Error(ErrorKind::InternalContradiction, "pullback of 2-torsion is not 2-torsion", x.to_string());
    for (std::size_t j = 0; j < m.rows(); ++j) m(j, k) = s->particular.coords()[j];
  }
  c.restricted = GroupHom(c.torsion.group, c.torsion_bar.group, m);
  HomAnalysis a = hom_analyze(c.restricted);
  c.bijective = a.kernel.group->is_trivial() && a.cokernel->is_trivial();
  if (!a.kernel.group->is_trivial()) {
    c.witness = c.torsion.inclusion(a.kernel.inclusion(GroupElement::generator(a.kernel.group, 0)));
  } else if (!a.cokernel->is_trivial()) {
    IntVector e(a.cokernel->rank(), Integer(0));
    e[0] = 1;
    GroupElement y(c.torsion_bar.group, a.cokernel->presentation_from_canonical(e));
    c.witness = c.torsion_bar.inclusion(y);
  }
  return c;
}

ExactnessReport chase_mod2_sequence(const Morphism& pi) {
  RelativePic rp = relative_pic(pi);
  F2Map a = mod2_map(pi.pic_pullback);
  F2Map b = mod2_map(rp.projection);
  GroupPtr ga = two_group(a.source_dim()), gb = two_group(a.target_dim()), gc = two_group(b.target_dim());
  return verify_short_exact(as_group_hom(a, ga, gb), as_group_hom(b, gb, gc));
}

GroupHom relative_pullback(const Tower& t) {
  RelativePic ry = relative_pic(*t.pi);
  RelativePic rb = relative_pic(*t.pi_bar);
  IntMatrix m(rb.group->rank(), ry.group->rank());
  for (std::size_t k = 0; k < ry.group->rank(); ++k) {
    GroupElement lifted = ry.lift(GroupElement::generator(ry.group, k), t.pi->source->pic);
    GroupElement img = rb.projection(t.f->pic_pullback(lifted));
    for (std::size_t j = 0; j < m.rows(); ++j) m(j, k) = img.coords()[j];
  }
  return GroupHom(ry.group, rb.group, m);
}

JointInjectivity chase_joint_injectivity(const Tower& t) {
  t.validate();
  JointInjectivity out;
  RelativePic ry = relative_pic(*t.pi);
  RelativePic rb = relative_pic(*t.pi_bar);
  F2Map p = mod2_map(ry.projection);
  F2Map q = mod2_map(t.f->pic_pullback);
  std::vector<F2Vec> cols;
  for (std::size_t i = 0; i < p.source_dim(); ++i) {
    F2Vec c = p.columns()[i];
    c.insert(c.end(), q.columns()[i].begin(), q.columns()[i].end());
    cols.push_back(std::move(c));
  }
  F2Map joint(p.source_dim(), p.target_dim() + q.target_dim(), cols);
  auto ker = f2::kernel_basis(joint);
  if (!ker.empty()) {
    out.injective = false;
    out.witness = ker.front();
  }

  F2Map r = mod2_map(relative_pullback(t));
  F2Map s = mod2_map(rb.projection);
  std::map<std::pair<F2Vec, F2Vec>, int> hits;
  for (const auto& x : f2::enumerate(p.source_dim())) {
    F2Vec a = p.apply(x), b = q.apply(x);
    if (r.apply(a) != s.apply(b)) {
      out.cartesian = false;
      out.cartesian_witness = "square does not commute at " + f2_string(x);
      return out;
    }
    ++hits[{a, b}];
  }
  for (const auto& a : f2::enumerate(r.source_dim()))
    for (const auto& b : f2::enumerate(s.source_dim())) {
      if (r.apply(a) != s.apply(b)) continue;
      int n = hits.count({a, b}) ? hits[{a, b}] : 0;
      if (n != 1) {
        out.cartesian = false;
        out.cartesian_witness = "pair (" + f2_string(a) + "," + f2_string(b) + ") has " + std::to_string(n) + " preimages";
        return out;
      }
    }
  return out;
}

bool same_relative_class_mod2(const Morphism& pi, const LineBundle& l1, const LineBundle& l2) {
  RelativePic rp = relative_pic(pi);
  return f2::is_zero(mod2_reduction(rp.group).project(rp.projection(l2.cls - l1.cls)));
}

LineBundle chase_adjust(const Tower& t, const LineBundle& l, const LineBundle& lbar) {
  t.validate();
  if (l.scheme != t.f->target || lbar.scheme != t.f->source)
    throw Error(ErrorKind::TypeMismatch, "chase (d) expects L on Y and L̄ on Ȳ");
  if (!same_relative_class_mod2(*t.pi_bar, pull_bundle(*t.f, l), lbar))
    throw Error(ErrorKind::HypothesisFailed, "[L̄] != [f*L] in Pic_X(Ȳ)/2", format_pic(*lbar.scheme, lbar.cls));
  Mod2Reduction base = mod2_reduction(t.pi->target->pic);
  Mod2Reduction bar = mod2_reduction(t.f->source->pic);
  for (const auto& v : f2::enumerate(base.dim())) {
    LineBundle k{t.pi->target, base.lift(v)};
    LineBundle candidate = l + pull_bundle(*t.pi, k);
    if (f2::is_zero(bar.project(lbar.cls - t.f->pic_pullback(candidate.cls)))) return candidate;
  }
  throw Error(ErrorKind::HypothesisFailed, "no line bundle on the base closes the gap",
              format_pic(*lbar.scheme, lbar.cls));
}

// ----------------------------------------------------------------- descent

DescentCertificate descend_alignment(const Tower& t, const AlignmentClass& abar, const LineBundle& l1,
                                     const LineBundle& l2, DescentMode mode) {
  t.validate();
  require_smpic(*t.pi);
  require_smpic(*t.pi_bar);
  const Morphism& f = *t.f;
  if (l1.scheme != f.target || l2.scheme != f.target)
    throw Error(ErrorKind::TypeMismatch, "descent endpoints must live on " + f.target->name);
  LineBundle e1 = mode == DescentMode::Plain ? pull_bundle(f, l1) : shriek_bundle(f, l1);
  LineBundle e2 = mode == DescentMode::Plain ? pull_bundle(f, l2) : shriek_bundle(f, l2);
  if (abar.source() != e1 || abar.target() != e2)
    throw Error(ErrorKind::TypeMismatch, "alignment endpoints do not match the pulled-back bundles", abar.to_string());
  if (!same_relative_class_mod2(*t.pi, l1, l2))
    throw Error(ErrorKind::ClassMismatch, "[L1] != [L2] in Pic_X(Y)/2",
                format_pic(*l1.scheme, l1.cls) + " vs " + format_pic(*l2.scheme, l2.cls));
  AlignmentClass plain = mode == DescentMode::Shriek ? strip_omega(f, abar) : abar;

  const GroupPtr& pic = f.target->pic;
  auto root = solve_linear(GroupHom::doubling(pic), l2.cls - l1.cls);
  if (!root)
    throw Error(ErrorKind::InternalContradiction, "no square root of L2 - L1 despite the SmPic chase",
                format_pic(*l1.scheme, l2.cls - l1.cls));
  GroupElement delta = plain.m() - f.pic_pullback(root->particular);
  if (!delta.times(2).is_zero())
    throw Error(ErrorKind::InternalContradiction, "correction term is not 2-torsion", delta.to_string());
  GroupElement m = root->particular + chase_two_torsion(t).preimage(delta);

  auto a = f2::solve(t.pi_bar->unit_pullback, abar.u());
  if (!a) throw Error(ErrorKind::InternalContradiction, "unit class not pulled back from the base", f2_string(abar.u()));
  F2Vec u0 = t.pi->unit_pullback.apply(*a);
  F2Vec u = f2::echelon(f2::kernel_basis(f.unit_pullback), f.target->units.dim()).reduce(u0);

  DescentCertificate cert;
  cert.input = abar;
  cert.mode = mode;
  cert.output = AlignmentClass(l1, l2, m, u);
  AlignmentClass back = mode == DescentMode::Plain ? pull_alignment(f, cert.output) : shriek_alignment(f, cert.output);
  cert.check = back == abar;
  if (!cert.check)
    throw Error(ErrorKind::InternalContradiction, "descended alignment does not recompose", cert.output.to_string());
  return cert;
}

AlignmentClass realign(const Tower& t, const AlignmentClass& a1bar, const AlignmentClass& a2bar,
                       const LineBundle& l1, const LineBundle& l2, RealignSide side) {
  const Morphism& f = *t.f;
  AlignmentClass out;
  if (side == RealignSide::Pull) {
    if (a1bar.target() != a2bar.target()) throw Error(ErrorKind::TypeMismatch, "pull realignment needs a common target");
    out = descend_alignment(t, compose(invert(a2bar), a1bar), l1, l2, DescentMode::Plain).output;
    if (compose(a2bar, pull_alignment(f, out)) != a1bar)
      throw Error(ErrorKind::InternalContradiction, "realignment triangle does not commute", out.to_string());
  } else {
    if (a1bar.source() != a2bar.source()) throw Error(ErrorKind::TypeMismatch, "push realignment needs a common source");
    out = descend_alignment(t, compose(a2bar, invert(a1bar)), l1, l2, DescentMode::Shriek).output;
    if (compose(shriek_alignment(f, out), a1bar) != a2bar)
      throw Error(ErrorKind::InternalContradiction, "realignment triangle does not commute", out.to_string());
  }
  return out;
}

AlignmentClass move_coefficient(const MorphismPtr& pi, const KAlignmentClass& a1, const KAlignmentClass& a2) {
  if (a1.l1() != a2.l1() || a1.l2() != a2.l2())
    throw Error(ErrorKind::TypeMismatch, "K-alignments must share both endpoints");
  AlignmentClass between = compose(invert(a2.inner()), a1.inner());
  AlignmentClass stripped = tensor(AlignmentClass::identity({a1.l1().scheme, -a1.l1().cls}), between);
  if (!alignment_exists(a1.k(), a2.k()))
    throw Error(ErrorKind::ClassMismatch, "[K1] != [K2] in Pic(X)/2",
                format_pic(*a1.k().scheme, a1.k().cls) + " vs " + format_pic(*a2.k().scheme, a2.k().cls));
  Tower tw{pi, pi, Morphism::identity(pi->target)};
  AlignmentClass c = descend_alignment(tw, stripped, a1.k(), a2.k(), DescentMode::Plain).output;
  AlignmentClass recomposed =
      compose(a2.inner(), tensor(pull_alignment(*pi, c), AlignmentClass::identity(a1.l1())));
  if (recomposed != a1.inner())
    throw Error(ErrorKind::InternalContradiction, "coefficient alignment does not recompose", c.to_string());
  return c;
}

// -------------------------------------------------------- coefficient squares

void CoefficientSquare::validate() const {
  tower.validate();
  const Morphism& f = *tower.f;
  if (frame == Frame::Pull) {
    if (abar.source() != pull_bundle(f, l) || bbar.source() != pull_bundle(f, m))
      throw Error(ErrorKind::TypeMismatch, "pull frame alignments must start at f*L and f*M");
  } else {
    if (abar.target() != shriek_bundle(f, l) || bbar.target() != shriek_bundle(f, m))
      throw Error(ErrorKind::TypeMismatch, "push frame alignments must end at ω⊗f*L and ω⊗f*M");
  }
  if (!same_relative_class_mod2(*tower.pi, l, m))
    throw Error(ErrorKind::ClassMismatch, "L and M are not X-aligned",
                format_pic(*l.scheme, l.cls) + " vs " + format_pic(*m.scheme, m.cls));
}

namespace {

AlignmentClass k_tensor(const Morphism& pi_bar, const LineBundle& k, const AlignmentClass& a) {
  return tensor(AlignmentClass::identity(pull_bundle(pi_bar, k)), a);
}

}  // namespace

KAlignmentClass CoefficientSquare::lift_up(const KAlignmentClass& c) const {
  validate();
  const Morphism& f = *tower.f;
  if (c.l1() != l || c.l2() != m) throw Error(ErrorKind::TypeMismatch, "C must be a K-alignment L ⇝ M");
  AlignmentClass side = k_tensor(*tower.pi_bar, c.k(), abar);
  AlignmentClass cbar;
  LineBundle lbar;
  if (frame == Frame::Pull) {
    cbar = compose(bbar, compose(pull_alignment(f, c.inner()), invert(side)));
    lbar = abar.target();
  } else {
    cbar = compose(invert(bbar), compose(shriek_alignment(f, c.inner()), side));
    lbar = abar.source();
  }
  KAlignmentClass out(tower.pi_bar, c.k(), lbar, cbar);
  if (!commutes(c, out)) throw Error(ErrorKind::InternalContradiction, "coefficient square does not commute");
  return out;
}

KAlignmentClass CoefficientSquare::descend(const KAlignmentClass& cbar) const {
  validate();
  const LineBundle& k = cbar.k();
  AlignmentClass side = k_tensor(*tower.pi_bar, k, abar);
  LineBundle source = pull_bundle(*tower.pi, k) + l;
  AlignmentClass c;
  if (frame == Frame::Pull) {
    AlignmentClass dbar = compose(invert(bbar), compose(cbar.inner(), side));
    c = descend_alignment(tower, dbar, source, m, DescentMode::Plain).output;
  } else {
    AlignmentClass dbar = compose(bbar, compose(cbar.inner(), invert(side)));
    c = descend_alignment(tower, dbar, source, m, DescentMode::Shriek).output;
  }
  KAlignmentClass out(tower.pi, k, l, c);
  if (!commutes(out, cbar)) throw Error(ErrorKind::InternalContradiction, "coefficient square does not commute");
  return out;
}

bool CoefficientSquare::commutes(const KAlignmentClass& c, const KAlignmentClass& cbar) const {
  const Morphism& f = *tower.f;
  if (c.k() != cbar.k()) return false;
  AlignmentClass side = k_tensor(*tower.pi_bar, c.k(), abar);
  if (frame == Frame::Pull) return compose(bbar, pull_alignment(f, c.inner())) == compose(cbar.inner(), side);
  return compose(bbar, cbar.inner()) == compose(shriek_alignment(f, c.inner()), side);
}

}  // namespace wtc
