#include "wtc/module.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "wtc/error.hpp"

namespace wtc {

int mod4(long degree) { return static_cast<int>(((degree % 4) + 4) % 4); }

GroupElement Bilinear::apply(const GroupElement& x, const GroupElement& y, const GroupPtr& target_group) const {
  IntVector out(target_group->rank(), Integer(0));
  for (std::size_t a = 0; a < x.coords().size(); ++a) {
    if (x.coords()[a] == 0) continue;
    for (std::size_t b = 0; b < y.coords().size(); ++b) {
      if (y.coords()[b] == 0) continue;
      Integer c = x.coords()[a] * y.coords()[b];
      for (std::size_t t = 0; t < out.size(); ++t) out[t] += c * table[a][b][t];
    }
  }
  return GroupElement(target_group, out);
}

// ------------------------------------------------------------- WittModule

GroupPtr WittModule::piece(const PieceKey& k) const {
  auto it = pieces.find(k);
  if (it != pieces.end()) return it->second;
  static const GroupPtr zero = FgAbGroup::trivial();
  return zero;
}

F2Vec WittModule::pic_class(const GroupElement& twist) const { return mod2_reduction(scheme->pic).project(twist); }

PieceKey WittModule::key(long degree, const GroupElement& twist) const { return {mod4(degree), pic_class(twist)}; }

F2Vec WittModule::relative_class(const GroupElement& twist) const {
  RelativePic r = relative_pic(*pi);
  return mod2_reduction(r.group).project(r.projection(twist));
}

bool WittModule::in_scope(const GroupElement& twist) const {
  F2Vec c = relative_class(twist);
  return std::find(scope.begin(), scope.end(), c) != scope.end();
}

LineBundle WittModule::representative(const F2Vec& cls) const {
  return {scheme, mod2_reduction(scheme->pic).lift(cls)};
}

std::string WittModule::key_text(const PieceKey& k) const {
  return "(" + std::to_string(k.degree) + ", " + format_pic(*scheme, representative(k.cls).cls) + ")";
}

std::string RepresentedClass::to_string() const {
  const Scheme& s = *transport.scheme();
  return module + "[" + std::to_string(degree) + "] " + g.to_string() + " via (" + format_pic(s, transport.m()) + ", " +
         format_unit(s, transport.u()) + "): " + format_pic(s, transport.source().cls) + " ~> " +
         format_pic(s, transport.target().cls);
}

long RegisteredMap::shift() const {
  if (kind == GenKind::Push) return -require_proper(*f).dimension;
  if (kind == GenKind::Bord) return 1;
  return 0;
}

GroupElement RegisteredMap::omega() const {
  if (kind == GenKind::Push) return require_proper(*f).omega;
  return GroupElement::zero(f->source->pic);
}

// ------------------------------------------------------------- WittSystem

const WittModule& WittSystem::module(const std::string& name) const {
  if (name == kRing) return ring;
  auto it = modules.find(name);
  if (it == modules.end()) throw Error(ErrorKind::ValidationError, "unknown module '" + name + "'");
  return it->second;
}

const RegisteredMap& WittSystem::map(const std::string& name) const {
  auto it = maps.find(name);
  if (it == maps.end()) throw Error(ErrorKind::MissingMap, "unknown registered map '" + name + "'");
  return it->second;
}

namespace {

IntMatrix identity_matrix(const GroupPtr& g) { return IntMatrix::identity(g->rank()); }

PieceKey ring_unit_key(const WittModule& ring) { return {0, F2Vec(mod2_reduction(ring.scheme->pic).dim(), 0)}; }

GroupElement ring_multiply00(const WittSystem& w, const GroupElement& x, const GroupElement& y) {
  PieceKey k0 = ring_unit_key(w.ring);
  auto it = w.ring.action.find({k0, k0});
  GroupPtr b00 = w.ring.piece(k0);
  if (it == w.ring.action.end()) return GroupElement::zero(b00);
  return it->second.apply(x, y, b00);
}

}  // namespace

GroupHom WittSystem::unit_multiplication(const WittModule& m, const PieceKey& k, const F2Vec& a) const {
  GroupPtr g = m.piece(k);
  GroupElement u = one;
  for (std::size_t j = 0; j < a.size(); ++j)
    if (a[j]) u = ring_multiply00(*this, unit_classes[j], u);
  PieceKey k0 = ring_unit_key(ring);
  auto it = m.action.find({k0, k});
  if (it == m.action.end()) return GroupHom::zero(g, g);
  std::vector<IntVector> cols;
  for (std::size_t b = 0; b < g->rank(); ++b) cols.push_back(it->second.apply(u, GroupElement::generator(g, b), g).coords());
  return GroupHom(g, g, IntMatrix::from_columns(cols, g->rank()));
}

GroupHom WittSystem::aut(const WittModule& m, const PieceKey& k, const AlignmentClass& sigma) const {
  LineBundle rep = m.representative(k.cls);
  if (sigma.source() != rep || sigma.target() != rep)
    throw Error(ErrorKind::TypeMismatch, "automorphism must act on the representative twist of " + m.key_text(k),
                sigma.to_string());
  GroupPtr g = m.piece(k);
  if (g->is_trivial()) return GroupHom::identity(g);
  IntMatrix result = identity_matrix(g);
  if (!sigma.m().is_zero()) {
    auto s = solve_linear(m.torsion.inclusion, sigma.m());
    if (!s) throw Error(ErrorKind::InternalContradiction, "automorphism class outside the 2-torsion", sigma.to_string());
    auto it = m.torsion_aut.find(k);
    if (it == m.torsion_aut.end())
      throw Error(ErrorKind::ValidationError,
                  "module " + m.name + " lacks the 2-torsion automorphisms of piece " + m.key_text(k));
    for (std::size_t j = 0; j < s->particular.coords().size(); ++j)
      if (s->particular.coords()[j] % 2 != 0) result = it->second[j] * result;
  }
  if (!f2::is_zero(sigma.u())) {
    auto it = m.unit_aut.find(k);
    if (it != m.unit_aut.end()) {
      for (std::size_t j = 0; j < sigma.u().size(); ++j)
        if (sigma.u()[j]) result = it->second[j] * result;
    } else {
      auto a = f2::solve(m.pi->unit_pullback, sigma.u());
      if (!a) throw Error(ErrorKind::NotSmPic, "unit class of " + m.scheme->name + " not pulled back from the base");
      result = unit_multiplication(m, k, *a).matrix() * result;
    }
  }
  return GroupHom(g, g, result);
}

RepresentedClass WittSystem::canonical(const std::string& name, long degree, const GroupElement& twist,
                                       const GroupElement& g) const {
  const WittModule& m = module(name);
  PieceKey k = m.key(degree, twist);
  if (g.group() != m.piece(k))
    throw Error(ErrorKind::TypeMismatch, "element does not live in piece " + m.key_text(k) + " of " + name);
  LineBundle rep = m.representative(k.cls);
  return {name, degree, g, standard_alignment(rep, {m.scheme, twist})};
}

RepresentedClass WittSystem::zero(const std::string& name, long degree, const LineBundle& twist) const {
  const WittModule& m = module(name);
  return canonical(name, degree, twist.cls, GroupElement::zero(m.piece(m.key(degree, twist.cls))));
}

RepresentedClass WittSystem::transport(const RepresentedClass& w, const AlignmentClass& b) const {
  if (b.source() != w.twist())
    throw Error(ErrorKind::TypeMismatch, "transport must start at the twist of the class", b.to_string());
  RepresentedClass out = w;
  out.transport = compose(b, w.transport);
  return out;
}

bool WittSystem::compare(const RepresentedClass& w1, const RepresentedClass& w2) const {
  if (w1.module != w2.module || mod4(w1.degree) != mod4(w2.degree) || w1.twist() != w2.twist())
    throw Error(ErrorKind::TypeMismatch, "compared classes live in different groups",
                w1.to_string() + " vs " + w2.to_string());
  const WittModule& m = module(w1.module);
  PieceKey k = m.key(w1.degree, w1.twist().cls);
  AlignmentClass sigma = compose(invert(w2.transport), w1.transport);
  return aut(m, k, sigma)(w1.g) == w2.g;
}

GroupElement WittSystem::coordinates(const RepresentedClass& w) const {
  const WittModule& m = module(w.module);
  PieceKey k = m.key(w.degree, w.twist().cls);
  AlignmentClass s = standard_alignment(m.representative(k.cls), w.twist());
  return aut(m, k, compose(invert(s), w.transport))(w.g);
}

RepresentedClass WittSystem::add(const RepresentedClass& a, const RepresentedClass& b) const {
  if (a.module != b.module || mod4(a.degree) != mod4(b.degree) || a.twist() != b.twist())
    throw Error(ErrorKind::TypeMismatch, "summands live in different groups", a.to_string() + " vs " + b.to_string());
  return canonical(a.module, a.degree, a.twist().cls, coordinates(a) + coordinates(b));
}

RepresentedClass WittSystem::negate(const RepresentedClass& a) const {
  RepresentedClass out = a;
  out.g = -a.g;
  return out;
}

RepresentedClass WittSystem::lax_product(const RepresentedClass& lambda, const KAlignmentClass& a,
                                         const RepresentedClass& w) const {
  if (lambda.module != kRing) throw Error(ErrorKind::TypeMismatch, "coefficient is not a base ring element");
  const WittModule& m = module(w.module);
  if (a.pi()->source != m.scheme || a.pi()->target != ring.scheme)
    throw Error(ErrorKind::TypeMismatch, "K-alignment is not over the structure morphism of " + m.scheme->name);
  if (a.k() != lambda.twist())
    throw Error(ErrorKind::TypeMismatch, "K-alignment coefficient twist differs from the coefficient's twist",
                a.inner().to_string());
  if (a.l1() != w.twist())
    throw Error(ErrorKind::TypeMismatch, "K-alignment does not start at the twist of the class", a.inner().to_string());
  if (!m.in_scope(a.l2().cls))
    throw Error(ErrorKind::ScopeError, "target twist " + format_pic(*m.scheme, a.l2().cls) + " outside the scope of " +
                                           m.name);
  PieceKey kl = ring.key(lambda.degree, lambda.twist().cls);
  PieceKey kw = m.key(w.degree, w.twist().cls);
  long degree = lambda.degree + w.degree;
  PieceKey kt = m.key(degree, a.l2().cls);
  GroupPtr target = m.piece(kt);
  auto it = m.action.find({kl, kw});
  GroupElement x = it == m.action.end() ? GroupElement::zero(target) : it->second.apply(lambda.g, w.g, target);
  LineBundle pk = pull_bundle(*m.pi, ring.representative(kl.cls));
  AlignmentClass s = standard_alignment(pk + m.representative(kw.cls), m.representative(kt.cls));
  AlignmentClass t = compose(a.inner(), compose(tensor(pull_alignment(*m.pi, lambda.transport), w.transport), invert(s)));
  return {m.name, degree, x, t};
}

RepresentedClass WittSystem::lax_combination(const std::vector<Term>& terms, long degree,
                                             const LineBundle& target) const {
  if (terms.empty()) throw Error(ErrorKind::TypeMismatch, "empty lax combination");
  std::optional<RepresentedClass> sum;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const Term& t = terms[i];
    if (t.lambda.degree + t.w.degree != degree)
      throw Error(ErrorKind::DegreeMismatch, "term " + std::to_string(i) + " has degree " +
                                                 std::to_string(t.lambda.degree + t.w.degree) + ", expected " +
                                                 std::to_string(degree));
    if (t.c.l2() != target)
      throw Error(ErrorKind::TypeMismatch, "term " + std::to_string(i) + " does not land at the common twist");
    RepresentedClass x = lax_product(t.lambda, t.c, t.w);
    sum = sum ? add(*sum, x) : x;
  }
  return *sum;
}

RepresentedClass WittSystem::ring_product(const RepresentedClass& l2, const RepresentedClass& l1) const {
  LineBundle both = l2.twist() + l1.twist();
  return lax_product(l2, KAlignmentClass(ring.pi, l2.twist(), l1.twist(), AlignmentClass::identity(both)), l1);
}

RepresentedClass WittSystem::apply(const RegisteredMap& map, const RepresentedClass& w,
                                   const std::optional<GroupElement>& target_twist) const {
  if (w.module != map.source)
    throw Error(ErrorKind::TypeMismatch, "map " + map.name + " expects a class of " + map.source, w.to_string());
  const WittModule& src = module(map.source);
  const WittModule& tgt = module(map.target);
  PieceKey ks = src.key(w.degree, w.twist().cls);
  long degree = w.degree + map.shift();
  if (map.direction() == MapDirection::Forward) {
    LineBundle fl = pull_bundle(*map.f, src.representative(ks.cls));
    PieceKey kt = tgt.key(degree, fl.cls);
    GroupPtr gt = tgt.piece(kt);
    auto it = map.matrices.find(ks);
    GroupElement x = it == map.matrices.end() ? GroupElement::zero(gt) : GroupHom(src.piece(ks), gt, it->second)(w.g);
    AlignmentClass s = standard_alignment(fl, tgt.representative(kt.cls));
    return {tgt.name, degree, x, compose(pull_alignment(*map.f, w.transport), invert(s))};
  }
  GroupElement omega = map.omega();
  GroupElement rest = w.twist().cls - omega;
  GroupElement l;
  if (target_twist) {
    if (!(map.f->pic_pullback(*target_twist) == rest))
      throw Error(ErrorKind::TypeMismatch, "map " + map.name + ": twist is not ω + f*L for the requested L");
    l = *target_twist;
  } else {
    auto s = solve_linear(map.f->pic_pullback, rest);
    if (!s) throw Error(ErrorKind::TypeMismatch, "map " + map.name + ": twist is not of the form ω + f*L");
    l = s->particular;
  }
  PieceKey kt = tgt.key(degree, l);
  LineBundle rep_t = tgt.representative(kt.cls);
  LineBundle lifted{src.scheme, omega + map.f->pic_pullback(rep_t.cls)};
  AlignmentClass r = standard_alignment(src.representative(ks.cls), lifted);
  AlignmentClass s = standard_alignment(rep_t, {tgt.scheme, l});
  AlignmentClass fs = map.kind == GenKind::Push ? shriek_alignment(*map.f, s) : pull_alignment(*map.f, s);
  AlignmentClass sigma = compose(invert(r), compose(invert(fs), w.transport));
  GroupPtr gt = tgt.piece(kt);
  auto it = map.matrices.find(kt);
  GroupElement x = GroupElement::zero(gt);
  if (it != map.matrices.end()) x = GroupHom(src.piece(ks), gt, it->second)(aut(src, ks, sigma)(w.g));
  return {tgt.name, degree, x, s};
}

const RegisteredMap& WittSystem::find_map(const Generator& gen, const std::string& source_module) const {
  for (const auto& [name, m] : maps) {
    if (m.kind != gen.kind || m.source != source_module) continue;
    if ((gen.kind == GenKind::Pull || gen.kind == GenKind::Push) && m.f != gen.f) continue;
    if ((gen.kind == GenKind::Ext || gen.kind == GenKind::Restrict || gen.kind == GenKind::Bord) &&
        m.localization != gen.localization)
      continue;
    return m;
  }
  throw Error(ErrorKind::MissingMap, "no registered map for " + gen.to_string() + " on module " + source_module);
}

RepresentedClass WittSystem::eval(const MorphismExpr& e, const RepresentedClass& w) const {
  const WittModule& m = module(w.module);
  if (m.scheme != e.domain().scheme || m.support != e.domain().support || w.degree != e.domain().degree ||
      w.twist().cls != e.domain().twist)
    throw Error(ErrorKind::TypeMismatch, "class does not lie in the domain " + e.domain().to_string(), w.to_string());
  RepresentedClass cur = w;
  for (std::size_t i = 0; i < e.word.size(); ++i) {
    const Generator& gen = e.word[i];
    if (gen.is_alis()) {
      const LineBundle& l = cur.twist();
      cur = transport(cur, AlignmentClass(l, {l.scheme, l.cls + gen.m.times(2)}, gen.m, gen.u));
      continue;
    }
    const RegisteredMap& map = find_map(gen, cur.module);
    cur = apply(map, cur, map.direction() == MapDirection::Backward ? gen.target_twist : std::nullopt);
    const WittModule& now = module(cur.module);
    if (now.scheme != e.refs[i + 1].scheme || now.support != e.refs[i + 1].support)
      throw Error(ErrorKind::TypeMismatch, "map " + map.name + " lands in " + now.name + " but the word expects " +
                                               e.refs[i + 1].to_string());
  }
  return cur;
}

std::vector<RepresentedClass> WittSystem::elements(const std::string& name, long radius, std::size_t limit) const {
  const WittModule& m = module(name);
  std::vector<RepresentedClass> out;
  for (const auto& [k, g] : m.pieces) {
    std::vector<std::pair<long, long>> ranges;
    std::size_t count = 1;
    for (const auto& d : g->invariants()) {
      if (d == 0)
        ranges.emplace_back(-radius, radius);
      else
        ranges.emplace_back(0, d.get_si() - 1);
      count *= static_cast<std::size_t>(ranges.back().second - ranges.back().first + 1);
      if (count > limit) throw Error(ErrorKind::NotEnumerable, "piece " + m.key_text(k) + " of " + name + " is too large");
    }
    IntVector c(ranges.size());
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
      if (i == ranges.size()) {
        out.push_back(canonical(name, k.degree, m.representative(k.cls).cls, GroupElement(g, c)));
        return;
      }
      for (long v = ranges[i].first; v <= ranges[i].second; ++v) {
        c[i] = v;
        rec(i + 1);
      }
    };
    rec(0);
  }
  return out;
}


// ------------------------------------------------------------- validation

namespace {

[[noreturn]] void invalid(const std::string& what, const std::string& witness = {}) {
  throw Error(ErrorKind::ValidationError, what, witness);
}

std::vector<RepresentedClass> generators(const WittSystem& w, const WittModule& m) {
  std::vector<RepresentedClass> out;
  for (const auto& [k, g] : m.pieces)
    for (std::size_t b = 0; b < g->rank(); ++b)
      out.push_back(w.canonical(m.name, k.degree, m.representative(k.cls).cls, GroupElement::generator(g, b)));
  return out;
}

/// Generators of the automorphism group of a line bundle: 2-torsion classes and units.
std::vector<AlignmentClass> automorphisms(const WittModule& m, const LineBundle& l) {
  std::vector<AlignmentClass> out;
  for (std::size_t j = 0; j < m.torsion.group->rank(); ++j)
    out.emplace_back(l, l, m.torsion.inclusion(GroupElement::generator(m.torsion.group, j)), m.scheme->units.zero());
  for (std::size_t j = 0; j < m.scheme->units.dim(); ++j)
    out.emplace_back(l, l, GroupElement::zero(m.scheme->pic), m.scheme->units.basis(j));
  return out;
}

KAlignmentClass plain_k(const WittModule& m, const LineBundle& k, const LineBundle& l1) {
  LineBundle src = pull_bundle(*m.pi, k) + l1;
  return KAlignmentClass(m.pi, k, l1, AlignmentClass::identity(src));
}

/// Runs a check and reports any failure as a ValidationError naming the context.
template <typename Fn>
void guarded(const std::string& context, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ValidationError) throw;
    invalid(context + ": " + e.message(), e.witness());
  }
}

void validate_shape(const WittSystem& w, const WittModule& m) {
  std::size_t t = m.torsion.group->rank();
  for (const auto& [k, g] : m.pieces) {
    if (g->is_trivial()) continue;
    auto it = m.torsion_aut.find(k);
    if (t > 0 && (it == m.torsion_aut.end() || it->second.size() != t))
      invalid("module " + m.name + " piece " + m.key_text(k) + ": one 2-torsion automorphism per torsion generator required");
    std::vector<IntMatrix> all;
    if (it != m.torsion_aut.end()) all = it->second;
    auto ut = m.unit_aut.find(k);
    if (ut != m.unit_aut.end()) {
      if (ut->second.size() != m.scheme->units.dim())
        invalid("module " + m.name + " piece " + m.key_text(k) + ": one unit automorphism per unit generator required");
      all.insert(all.end(), ut->second.begin(), ut->second.end());
    }
    IntMatrix id = IntMatrix::identity(g->rank());
    for (std::size_t i = 0; i < all.size(); ++i) {
      GroupHom a(g, g, all[i]);
      if (!(a.after(a).matrix() == GroupHom::identity(g).matrix()))
        for (std::size_t b = 0; b < g->rank(); ++b)
          if (a(a(GroupElement::generator(g, b))) != GroupElement::generator(g, b))
            invalid("module " + m.name + " piece " + m.key_text(k) + ": automorphism " + std::to_string(i) +
                    " is not an involution");
      for (std::size_t j = 0; j < i; ++j) {
        GroupHom c(g, g, all[j]);
        for (std::size_t b = 0; b < g->rank(); ++b) {
          auto e = GroupElement::generator(g, b);
          if (a(c(e)) != c(a(e)))
            invalid("module " + m.name + " piece " + m.key_text(k) + ": automorphisms " + std::to_string(j) + " and " +
                    std::to_string(i) + " do not commute");
        }
      }
    }
    if (ut != m.unit_aut.end()) {
      // explicit unit automorphisms must agree with multiplication by pulled-back units
      for (const auto& a : f2::enumerate(w.ring.scheme->units.dim())) {
        F2Vec u = m.pi->unit_pullback.apply(a);
        GroupHom expected = w.unit_multiplication(m, k, a);
        GroupHom given = w.aut(m, k, AlignmentClass(m.representative(k.cls), m.representative(k.cls),
                                                     GroupElement::zero(m.scheme->pic), u));
        for (std::size_t b = 0; b < g->rank(); ++b) {
          auto e = GroupElement::generator(g, b);
          if (expected(e) != given(e))
            invalid("module " + m.name + " piece " + m.key_text(k) + ": unit automorphism disagrees with <" +
                        format_unit(*w.ring.scheme, a) + "> multiplication",
                    e.to_string());
        }
      }
    }
  }
}

void validate_ring(const WittSystem& w) {
  const WittModule& r = w.ring;
  PieceKey k0 = ring_unit_key(r);
  if (w.one.group() != r.piece(k0) || w.one.is_zero()) invalid("ring: unit element missing or zero");
  auto gens = generators(w, r);
  for (const auto& x : gens)
    guarded("ring one law", [&] {
      auto one = w.canonical(WittSystem::kRing, 0, GroupElement::zero(r.scheme->pic), w.one);
      if (!w.compare(w.ring_product(one, x), x)) invalid("ring: 1 * x != x", x.to_string());
      if (!w.compare(w.ring_product(x, one), x)) invalid("ring: x * 1 != x", x.to_string());
    });
  for (std::size_t j = 0; j < w.unit_classes.size(); ++j)
    if (ring_multiply00(w, w.unit_classes[j], w.unit_classes[j]) != w.one)
      invalid("ring: <" + r.scheme->units.labels[j] + ">^2 != 1");
  auto minus = w.canonical(WittSystem::kRing, 0, GroupElement::zero(r.scheme->pic), w.minus_one);
  for (const auto& x : gens)
    for (const auto& y : gens) {
      guarded("ring commutativity", [&] {
        auto xy = w.ring_product(x, y);
        auto yx = w.ring_product(y, x);
        if ((x.degree * y.degree) % 2 != 0) yx = w.ring_product(minus, yx);
        if (!w.compare(xy, yx)) invalid("ring: graded commutativity fails", x.to_string() + " ; " + y.to_string());
      });
      for (const auto& z : gens)
        guarded("ring associativity", [&] {
          if (!w.compare(w.ring_product(w.ring_product(z, y), x), w.ring_product(z, w.ring_product(y, x))))
            invalid("ring: associativity fails", z.to_string() + " ; " + y.to_string() + " ; " + x.to_string());
        });
    }
}

void validate_module(const WittSystem& w, const WittModule& m) {
  if (!certify_smpic(*m.pi).pass())
    invalid("module " + m.name + ": structure morphism of " + m.scheme->name + " is not SmPic",
            certify_smpic(*m.pi).summary());
  auto rgens = generators(w, w.ring);
  auto mgens = generators(w, m);
  auto one = w.canonical(WittSystem::kRing, 0, GroupElement::zero(w.ring.scheme->pic), w.one);
  for (const auto& x : mgens) {
    if (!m.in_scope(x.twist().cls)) continue;
    guarded("module " + m.name + " one law", [&] {
      if (!w.compare(w.lax_product(one, plain_k(m, one.twist(), x.twist()), x), x))
        invalid("module " + m.name + ": 1 * w != w", x.to_string());
    });
    for (const auto& l1 : rgens)
      for (const auto& l2 : rgens)
        guarded("module " + m.name + " associativity", [&] {
          KAlignmentClass a1 = plain_k(m, l1.twist(), x.twist());
          auto inner = w.lax_product(l1, a1, x);
          KAlignmentClass a2 = plain_k(m, l2.twist(), inner.twist());
          KAlignmentClass a3 = plain_k(m, l2.twist() + l1.twist(), x.twist());
          if (!w.compare(w.lax_product(l2, a2, inner), w.lax_product(w.ring_product(l2, l1), a3, x)))
            invalid("module " + m.name + ": associativity fails",
                    l2.to_string() + " ; " + l1.to_string() + " ; " + x.to_string());
        });
    for (const auto& l : rgens)
      for (const auto& sigma : automorphisms(m, x.twist()))
        guarded("module " + m.name + " equivariance", [&] {
          KAlignmentClass a = plain_k(m, l.twist(), x.twist());
          LineBundle pk = pull_bundle(*m.pi, l.twist());
          auto lhs = w.lax_product(l, a, w.transport(x, sigma));
          auto rhs = w.transport(w.lax_product(l, a, x), tensor(AlignmentClass::identity(pk), sigma));
          if (!w.compare(lhs, rhs))
            invalid("module " + m.name + ": action not equivariant under " + sigma.to_string(),
                    l.to_string() + " ; " + x.to_string());
        });
  }
}

void validate_backward(const WittSystem& w, const RegisteredMap& f, const RepresentedClass& x, const LineBundle& lt,
                       const std::vector<RepresentedClass>& rgens, const std::string& ctx) {
  const WittModule& src = w.module(f.source);
  const WittModule& tgt = w.module(f.target);
  auto lift = [&](const AlignmentClass& s) {
    return f.kind == GenKind::Push ? shriek_alignment(*f.f, s) : pull_alignment(*f.f, s);
  };
  for (const auto& sigma : automorphisms(tgt, lt))
    guarded(ctx + " equivariance", [&] {
      auto lhs = w.apply(f, w.transport(x, lift(sigma)), lt.cls);
      auto rhs = w.transport(w.apply(f, x, lt.cls), sigma);
      if (!w.compare(lhs, rhs)) invalid(ctx + ": not equivariant under " + sigma.to_string(), x.to_string());
    });
  for (const auto& l : rgens) {
    KAlignmentClass a = plain_k(tgt, l.twist(), lt);
    if (!tgt.in_scope(a.l2().cls)) continue;
    KAlignmentClass la(src.pi, l.twist(), x.twist(), lift(a.inner()));
    if (!src.in_scope(la.l2().cls)) continue;
    guarded(ctx + " linearity", [&] {
      auto lhs = w.apply(f, w.lax_product(l, la, x), a.l2().cls);
      auto rhs = w.lax_product(l, a, w.apply(f, x, lt.cls));
      if (!w.compare(lhs, rhs)) invalid(ctx + ": not linear over the base ring", l.to_string() + " ; " + x.to_string());
    });
  }
}

void validate_map(const WittSystem& w, const RegisteredMap& f) {
  const WittModule& src = w.module(f.source);
  const WittModule& tgt = w.module(f.target);
  auto rgens = generators(w, w.ring);
  std::string ctx = "map " + f.name;
  for (const auto& x : generators(w, src)) {
    if (f.direction() == MapDirection::Forward) {
      for (const auto& sigma : automorphisms(src, x.twist()))
        guarded(ctx + " equivariance", [&] {
          auto lhs = w.apply(f, w.transport(x, sigma));
          auto rhs = w.transport(w.apply(f, x), pull_alignment(*f.f, sigma));
          if (!w.compare(lhs, rhs)) invalid(ctx + ": not equivariant under " + sigma.to_string(), x.to_string());
        });
      for (const auto& l : rgens) {
        KAlignmentClass a = plain_k(src, l.twist(), x.twist());
        if (!src.in_scope(a.l2().cls)) continue;
        LineBundle fl = pull_bundle(*f.f, x.twist());
        KAlignmentClass fa(tgt.pi, l.twist(), fl, pull_alignment(*f.f, a.inner()));
        if (!tgt.in_scope(fa.l2().cls)) continue;
        guarded(ctx + " linearity", [&] {
          if (!w.compare(w.apply(f, w.lax_product(l, a, x)), w.lax_product(l, fa, w.apply(f, x))))
            invalid(ctx + ": not linear over the base ring", l.to_string() + " ; " + x.to_string());
        });
      }
      continue;
    }
    // backward: x sits at ω + f*L; one L per class of Pic(Y)/2 with that image
    auto sol = solve_linear(f.f->pic_pullback, x.twist().cls - f.omega());
    if (!sol) continue;
    std::vector<GroupElement> kernel;
    for (std::size_t i = 0; i < sol->kernel.group->rank(); ++i)
      kernel.push_back(sol->kernel.inclusion(GroupElement::generator(sol->kernel.group, i)));
    std::set<F2Vec> seen;
    for (const auto& bits : f2::enumerate(kernel.size())) {
      GroupElement t = sol->particular;
      for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i]) t = t + kernel[i];
      if (!seen.insert(tgt.pic_class(t)).second || !tgt.in_scope(t)) continue;
      validate_backward(w, f, x, LineBundle{tgt.scheme, t}, rgens, ctx);
    }
  }
}

}  // namespace

void WittSystem::validate() const {
  validate_shape(*this, ring);
  validate_ring(*this);
  for (const auto& [name, m] : modules) {
    validate_shape(*this, m);
    validate_module(*this, m);
  }
  for (const auto& [name, f] : maps) validate_map(*this, f);
}

// ------------------------------------------------------------- JSON

namespace {

using nlohmann::json;

IntVector int_vector(const json& j) {
  IntVector out;
  for (const auto& x : j) out.emplace_back(x.get<long>());
  return out;
}

json json_vector(const IntVector& v) {
  json out = json::array();
  for (const auto& x : v) out.push_back(x.get_si());
  return out;
}

GroupElement parse_element(const GroupPtr& g, const json& j, const std::string& ctx) {
  IntVector x = int_vector(j);
  if (x.size() != g->presentation_generators()) invalid(ctx + ": element has the wrong number of coordinates");
  return GroupElement::from_presentation(g, x);
}

PieceKey parse_key(const WittModule& m, const json& j, const std::string& ctx) {
  if (!j.is_array() || j.size() != 2) invalid(ctx + ": piece reference must be [degree, twist]");
  return m.key(j.at(0).get<long>(), parse_pic(*m.scheme, j.at(1).get<std::string>()));
}

json key_json(const WittModule& m, const PieceKey& k) {
  return json::array({k.degree, format_pic(*m.scheme, m.representative(k.cls).cls)});
}

/// Canonical images of canonical source generators under a matrix given on presentation generators.
IntMatrix parse_matrix(const GroupPtr& src, const GroupPtr& tgt, const json& j, const std::string& ctx) {
  std::size_t rows = tgt->presentation_generators(), cols = src->presentation_generators();
  if (j.size() != rows) invalid(ctx + ": matrix needs " + std::to_string(rows) + " rows");
  IntMatrix pres(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    IntVector row = int_vector(j.at(r));
    if (row.size() != cols) invalid(ctx + ": matrix needs " + std::to_string(cols) + " columns");
    for (std::size_t c = 0; c < cols; ++c) pres(r, c) = row[c];
  }
  const IntMatrix& rel = src->presentation();
  for (std::size_t r = 0; r < rel.rows(); ++r)
    if (!GroupElement::from_presentation(tgt, pres * rel.row(r)).is_zero())
      invalid(ctx + ": matrix does not respect the relations of the source", std::to_string(r));
  std::vector<IntVector> images;
  for (std::size_t i = 0; i < src->rank(); ++i)
    images.push_back(tgt->canonical_from_presentation(pres * src->presentation_from_canonical(
                                                                  GroupElement::generator(src, i).coords())));
  try {
    return GroupHom(src, tgt, IntMatrix::from_columns(images, tgt->rank())).matrix();
  } catch (const Error& e) {
    invalid(ctx + ": ill-formed matrix", e.witness());
  }
}

json matrix_json(const IntMatrix& m) {
  json out = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) out.push_back(json_vector(m.row(r)));
  return out;
}

Bilinear parse_bilinear(const GroupPtr& p, const GroupPtr& q, const GroupPtr& r, const json& j, const std::string& ctx) {
  std::size_t np = p->presentation_generators(), nq = q->presentation_generators();
  if (j.size() != np) invalid(ctx + ": table needs one row per left generator");
  std::vector<std::vector<IntVector>> pres(np);
  for (std::size_t a = 0; a < np; ++a) {
    if (j.at(a).size() != nq) invalid(ctx + ": table needs one entry per right generator");
    for (std::size_t b = 0; b < nq; ++b) {
      IntVector v = int_vector(j.at(a).at(b));
      if (v.size() != r->presentation_generators()) invalid(ctx + ": table entry has the wrong width");
      pres[a].push_back(v);
    }
  }
  Bilinear out;
  out.table.assign(p->rank(), std::vector<IntVector>(q->rank()));
  for (std::size_t i = 0; i < p->rank(); ++i) {
    IntVector pi = p->presentation_from_canonical(GroupElement::generator(p, i).coords());
    for (std::size_t k = 0; k < q->rank(); ++k) {
      IntVector qk = q->presentation_from_canonical(GroupElement::generator(q, k).coords());
      IntVector sum(r->presentation_generators(), Integer(0));
      for (std::size_t a = 0; a < np; ++a)
        for (std::size_t b = 0; b < nq; ++b)
          for (std::size_t t = 0; t < sum.size(); ++t) sum[t] += pi[a] * qk[b] * pres[a][b][t];
      out.table[i][k] = GroupElement::from_presentation(r, sum).coords();
    }
  }
  // bilinear maps must kill torsion on either side
  for (std::size_t i = 0; i < p->rank(); ++i)
    for (std::size_t k = 0; k < q->rank(); ++k) {
      GroupElement e(r, out.table[i][k]);
      if ((p->invariants()[i] != 0 && !e.times(p->invariants()[i]).is_zero()) ||
          (q->invariants()[k] != 0 && !e.times(q->invariants()[k]).is_zero()))
        invalid(ctx + ": table is not bilinear on the torsion", std::to_string(i) + "," + std::to_string(k));
    }
  return out;
}

json bilinear_json(const Bilinear& b) {
  json out = json::array();
  for (const auto& row : b.table) {
    json r = json::array();
    for (const auto& v : row) r.push_back(json_vector(v));
    out.push_back(r);
  }
  return out;
}

void parse_pieces(WittModule& m, const json& j) {
  for (const auto& pj : j) {
    GroupElement twist = parse_pic(*m.scheme, pj.at("twist").get<std::string>());
    PieceKey k = m.key(pj.at("degree").get<long>(), twist);
    if (m.pieces.count(k)) invalid("module " + m.name + ": piece " + m.key_text(k) + " declared twice");
    GroupPtr g = FgAbGroup::from_invariants(int_vector(pj.at("invariants")));
    if (!g->is_trivial()) m.pieces.emplace(k, g);
  }
}

void parse_auts(WittModule& m, const json& j) {
  for (const auto& aj : j) {
    PieceKey k = parse_key(m, aj.at("piece"), "module " + m.name + " aut");
    GroupPtr g = m.piece(k);
    std::string ctx = "module " + m.name + " aut " + m.key_text(k);
    if (aj.contains("torsion"))
      for (const auto& mj : aj.at("torsion")) m.torsion_aut[k].push_back(parse_matrix(g, g, mj, ctx));
    if (aj.contains("units"))
      for (const auto& mj : aj.at("units")) m.unit_aut[k].push_back(parse_matrix(g, g, mj, ctx));
  }
}

json auts_json(const WittModule& m) {
  json out = json::array();
  std::set<PieceKey> keys;
  for (const auto& [k, v] : m.torsion_aut) keys.insert(k);
  for (const auto& [k, v] : m.unit_aut) keys.insert(k);
  for (const auto& k : keys) {
    json a = {{"piece", key_json(m, k)}};
    if (auto it = m.torsion_aut.find(k); it != m.torsion_aut.end()) {
      a["torsion"] = json::array();
      for (const auto& mat : it->second) a["torsion"].push_back(matrix_json(mat));
    }
    if (auto it = m.unit_aut.find(k); it != m.unit_aut.end()) {
      a["units"] = json::array();
      for (const auto& mat : it->second) a["units"].push_back(matrix_json(mat));
    }
    out.push_back(a);
  }
  return out;
}

json pieces_json(const WittModule& m) {
  json out = json::array();
  for (const auto& [k, g] : m.pieces)
    out.push_back({{"degree", k.degree},
                   {"twist", format_pic(*m.scheme, m.representative(k.cls).cls)},
                   {"invariants", json_vector(g->invariants())}});
  return out;
}

GenKind parse_kind(const std::string& s, const std::string& ctx) {
  if (s == "pull") return GenKind::Pull;
  if (s == "push") return GenKind::Push;
  if (s == "ext") return GenKind::Ext;
  if (s == "restrict") return GenKind::Restrict;
  if (s == "bord") return GenKind::Bord;
  invalid(ctx + ": unknown map kind '" + s + "'");
}

const char* kind_text(GenKind k) {
  switch (k) {
    case GenKind::Pull: return "pull";
    case GenKind::Push: return "push";
    case GenKind::Ext: return "ext";
    case GenKind::Restrict: return "restrict";
    case GenKind::Bord: return "bord";
    default: return "?";
  }
}

void check_endpoints(const Geometry& g, const RegisteredMap& f, const WittModule& src, const WittModule& tgt) {
  std::string ctx = "map " + f.name;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) invalid(ctx + ": " + what, src.name + " -> " + tgt.name);
  };
  switch (f.kind) {
    case GenKind::Pull:
      expect(f.f->target == src.scheme && f.f->source == tgt.scheme, "modules do not match the morphism");
      expect(f.f->pull_support(src.support) == tgt.support, "supports do not match the morphism");
      break;
    case GenKind::Push:
      expect(f.f->source == src.scheme && f.f->target == tgt.scheme, "modules do not match the morphism");
      expect(f.f->push_support(src.support) == tgt.support, "supports do not match the morphism");
      require_proper(*f.f);
      break;
    case GenKind::Ext: {
      const Localization& l = g.localization(f.localization);
      expect(src.scheme->name == l.total && tgt.scheme->name == l.total, "modules do not live on the total space");
      expect(src.support == l.support && tgt.support == "full", "supports must be the closed support and full");
      break;
    }
    case GenKind::Restrict: {
      const Localization& l = g.localization(f.localization);
      expect(src.scheme->name == l.total && tgt.scheme->name == l.open, "modules must be on the total and open parts");
      expect(src.support == "full" && tgt.support == "full", "restriction acts on full supports");
      break;
    }
    case GenKind::Bord: {
      const Localization& l = g.localization(f.localization);
      expect(src.scheme->name == l.open && tgt.scheme->name == l.total, "modules must be on the open and total parts");
      expect(src.support == "full" && tgt.support == l.support, "boundary lands in the closed support");
      break;
    }
    default:
      break;
  }
}

}  // namespace

WittSystem parse_witt_system(Geometry geometry, const nlohmann::json& j) {
  WittSystem w;
  w.geometry = std::move(geometry);
  try {
    SchemePtr x = w.geometry.scheme(w.geometry.base);
    WittModule& r = w.ring;
    r.name = WittSystem::kRing;
    r.scheme = x;
    r.pi = Morphism::identity(x);
    r.scope = {F2Vec(mod2_reduction(relative_pic(*r.pi).group).dim(), 0)};
    r.torsion = two_torsion(x->pic);
    const json& rj = j.at("ring");
    parse_pieces(r, rj.at("pieces"));
    PieceKey k0 = ring_unit_key(r);
    GroupPtr b00 = r.piece(k0);
    w.one = parse_element(b00, rj.at("one"), "ring one");
    for (const auto& label : x->units.labels) {
      if (!rj.contains("units") || !rj.at("units").contains(label))
        invalid("ring: missing class <" + label + "> of unit generator");
      w.unit_classes.push_back(parse_element(b00, rj.at("units").at(label), "ring unit " + label));
    }
    w.minus_one = rj.contains("minus_one") ? parse_element(b00, rj.at("minus_one"), "ring minus_one") : -w.one;
    if (rj.contains("products"))
      for (const auto& pj : rj.at("products")) {
        PieceKey a = parse_key(r, pj.at("left"), "ring product");
        PieceKey b = parse_key(r, pj.at("right"), "ring product");
        PieceKey t{mod4(a.degree + b.degree), f2::add(a.cls, b.cls)};
        std::string ctx = "ring product " + r.key_text(a) + " x " + r.key_text(b);
        Bilinear bl = parse_bilinear(r.piece(a), r.piece(b), r.piece(t), pj.at("table"), ctx);
        bl.left = a, bl.right = b, bl.target = t;
        r.action[{a, b}] = bl;
      }
    if (rj.contains("aut")) parse_auts(r, rj.at("aut"));

    if (j.contains("modules"))
      for (const auto& [name, mj] : j.at("modules").items()) {
        if (name == WittSystem::kRing) invalid("module name '" + name + "' is reserved");
        WittModule m;
        m.name = name;
        m.scheme = w.geometry.scheme(mj.at("scheme").get<std::string>());
        m.pi = w.geometry.structure(m.scheme);
        m.support = mj.value("support", "full");
        if (!m.scheme->has_support(m.support)) invalid("module " + name + ": undeclared support " + m.support);
        m.torsion = two_torsion(m.scheme->pic);
        if (mj.contains("scope")) {
          for (const auto& t : mj.at("scope")) {
            F2Vec c = m.relative_class(parse_pic(*m.scheme, t.get<std::string>()));
            if (std::find(m.scope.begin(), m.scope.end(), c) == m.scope.end()) m.scope.push_back(c);
          }
        } else {
          m.scope = f2::enumerate(mod2_reduction(relative_pic(*m.pi).group).dim());
        }
        parse_pieces(m, mj.at("pieces"));
        if (mj.contains("action"))
          for (const auto& aj : mj.at("action")) {
            PieceKey a = parse_key(r, aj.at("ring"), "module " + name + " action");
            PieceKey b = parse_key(m, aj.at("piece"), "module " + name + " action");
            LineBundle tw = pull_bundle(*m.pi, r.representative(a.cls)) + m.representative(b.cls);
            PieceKey t = m.key(a.degree + b.degree, tw.cls);
            std::string ctx = "module " + name + " action " + r.key_text(a) + " x " + m.key_text(b);
            Bilinear bl = parse_bilinear(r.piece(a), m.piece(b), m.piece(t), aj.at("table"), ctx);
            bl.left = a, bl.right = b, bl.target = t;
            m.action[{a, b}] = bl;
          }
        if (mj.contains("aut")) parse_auts(m, mj.at("aut"));
        w.modules.emplace(name, std::move(m));
      }

    if (j.contains("maps"))
      for (const auto& [name, fj] : j.at("maps").items()) {
        RegisteredMap f;
        f.name = name;
        f.kind = parse_kind(fj.at("kind").get<std::string>(), "map " + name);
        f.source = fj.at("source").get<std::string>();
        f.target = fj.at("target").get<std::string>();
        const WittModule& src = w.module(f.source);
        const WittModule& tgt = w.module(f.target);
        if (f.kind == GenKind::Pull || f.kind == GenKind::Push) {
          f.f = w.geometry.morphism(fj.at("morphism").get<std::string>());
        } else {
          f.localization = fj.at("localization").get<std::string>();
          const Localization& l = w.geometry.localization(f.localization);
          f.f = f.kind == GenKind::Ext ? Morphism::identity(w.geometry.scheme(l.total)) : w.geometry.morphism(l.upsilon);
        }
        check_endpoints(w.geometry, f, src, tgt);
        if (fj.contains("matrices"))
          for (const auto& mj : fj.at("matrices")) {
            std::string ctx = "map " + name;
            if (f.direction() == MapDirection::Forward) {
              PieceKey ks = parse_key(src, mj.at("piece"), ctx);
              LineBundle fl = pull_bundle(*f.f, src.representative(ks.cls));
              PieceKey kt = tgt.key(ks.degree + f.shift(), fl.cls);
              f.matrices[ks] = parse_matrix(src.piece(ks), tgt.piece(kt), mj.at("matrix"), ctx + " " + src.key_text(ks));
            } else {
              PieceKey kt = parse_key(tgt, mj.at("piece"), ctx);
              LineBundle lifted{src.scheme, f.omega() + f.f->pic_pullback(tgt.representative(kt.cls).cls)};
              PieceKey ks = src.key(kt.degree - f.shift(), lifted.cls);
              f.matrices[kt] = parse_matrix(src.piece(ks), tgt.piece(kt), mj.at("matrix"), ctx + " " + tgt.key_text(kt));
            }
          }
        w.maps.emplace(name, std::move(f));
      }
  } catch (const nlohmann::json::exception& e) {
    invalid(std::string("malformed Witt data: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ValidationError) throw;
    invalid(e.message(), e.witness());
  }
  w.validate();
  return w;
}

void serialize_witt_system(const WittSystem& w, nlohmann::json& out) {
  const WittModule& r = w.ring;
  auto pres = [](const GroupElement& x) { return json_vector(x.group()->presentation_from_canonical(x.coords())); };
  json rj = {{"pieces", pieces_json(r)}, {"one", pres(w.one)}};
  json units = json::object();
  for (std::size_t i = 0; i < w.unit_classes.size(); ++i) units[r.scheme->units.labels[i]] = pres(w.unit_classes[i]);
  rj["units"] = units;
  if (w.minus_one != -w.one) rj["minus_one"] = pres(w.minus_one);
  json products = json::array();
  for (const auto& [k, b] : r.action)
    products.push_back({{"left", key_json(r, b.left)}, {"right", key_json(r, b.right)}, {"table", bilinear_json(b)}});
  rj["products"] = products;
  if (!r.torsion_aut.empty() || !r.unit_aut.empty()) rj["aut"] = auts_json(r);
  out["ring"] = rj;

  json modules = json::object();
  for (const auto& [name, m] : w.modules) {
    json mj = {{"scheme", m.scheme->name}, {"support", m.support}, {"pieces", pieces_json(m)}};
    json scope = json::array();
    RelativePic rel = relative_pic(*m.pi);
    Mod2Reduction red = mod2_reduction(rel.group);
    for (const auto& c : m.scope) scope.push_back(format_pic(*m.scheme, rel.lift(red.lift(c), m.scheme->pic)));
    mj["scope"] = scope;
    json action = json::array();
    for (const auto& [k, b] : m.action)
      action.push_back({{"ring", key_json(r, b.left)}, {"piece", key_json(m, b.right)}, {"table", bilinear_json(b)}});
    mj["action"] = action;
    if (!m.torsion_aut.empty() || !m.unit_aut.empty()) mj["aut"] = auts_json(m);
    modules[name] = mj;
  }
  out["modules"] = modules;

  json maps = json::object();
  for (const auto& [name, f] : w.maps) {
    json fj = {{"kind", kind_text(f.kind)}, {"source", f.source}, {"target", f.target}};
    if (f.kind == GenKind::Pull || f.kind == GenKind::Push)
      fj["morphism"] = f.f->name;
    else
      fj["localization"] = f.localization;
    const WittModule& keyed = w.module(f.direction() == MapDirection::Forward ? f.source : f.target);
    json mats = json::array();
    for (const auto& [k, mat] : f.matrices) mats.push_back({{"piece", key_json(keyed, k)}, {"matrix", matrix_json(mat)}});
    fj["matrices"] = mats;
    maps[name] = fj;
  }
  out["maps"] = maps;
}

}  // namespace wtc
