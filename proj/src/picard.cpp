#include "wtc/picard.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "wtc/error.hpp"

namespace wtc {

bool Scheme::has_support(const std::string& label) const {
  return label == "full" || std::find(supports.begin(), supports.end(), label) != supports.end();
}

namespace {

bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\''; }

}  // namespace

GroupElement parse_pic(const Scheme& s, const std::string& text) {
  IntVector x(s.pic->presentation_generators(), Integer(0));
  std::size_t i = 0;
  auto skip = [&] {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  };
  bool first = true;
  skip();
  if (i == text.size()) throw Error(ErrorKind::ParseError, "empty Picard class on " + s.name);
  while (i < text.size()) {
    int sign = 1;
    if (text[i] == '+' || text[i] == '-') {
      sign = text[i] == '-' ? -1 : 1;
      ++i;
      skip();
    } else if (!first) {
      throw Error(ErrorKind::ParseError, "expected '+' or '-' in Picard class", text);
    }
    first = false;
    std::string digits;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) digits += text[i++];
    skip();
    if (i < text.size() && text[i] == '*') {
      ++i;
      skip();
    }
    std::string label;
    if (i < text.size() && (std::isalpha(static_cast<unsigned char>(text[i])) || text[i] == '_'))
      while (i < text.size() && ident_char(text[i])) label += text[i++];
    skip();
    Integer coef = digits.empty() ? Integer(1) : Integer(digits);
    if (label.empty()) {
      if (digits.empty() || coef != 0) throw Error(ErrorKind::ParseError, "bad Picard term", text);
      continue;
    }
    auto it = std::find(s.pic_labels.begin(), s.pic_labels.end(), label);
    if (it != s.pic_labels.end()) {
      x[it - s.pic_labels.begin()] += sign * coef;
      continue;
    }
    auto nb = s.named_bundles.find(label);
    if (nb == s.named_bundles.end())
      throw Error(ErrorKind::ParseError, "unknown Picard generator '" + label + "' on " + s.name, text);
    IntVector p = s.pic->presentation_from_canonical(nb->second.coords());
    for (std::size_t j = 0; j < x.size(); ++j) x[j] += sign * coef * p[j];
  }
  return GroupElement::from_presentation(s.pic, x);
}

std::string format_pic(const Scheme& s, const GroupElement& x) {
  IntVector p = s.pic->presentation_from_canonical(x.coords());
  std::ostringstream os;
  bool any = false;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0) continue;
    Integer c = p[i];
    if (c < 0) {
      os << '-';
      c = -c;
    } else if (any) {
      os << '+';
    }
    if (c != 1) os << c.get_str();
    os << (i < s.pic_labels.size() ? s.pic_labels[i] : "g" + std::to_string(i));
    any = true;
  }
  return any ? os.str() : "0";
}

F2Vec parse_unit(const Scheme& s, const std::string& text) {
  F2Vec u = s.units.zero();
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, '*')) {
    tok.erase(std::remove_if(tok.begin(), tok.end(), [](unsigned char c) { return std::isspace(c); }),
              tok.end());
    if (tok.empty()) throw Error(ErrorKind::ParseError, "empty unit factor", text);
    if (tok == "1") continue;
    auto it = std::find(s.units.labels.begin(), s.units.labels.end(), tok);
    if (it == s.units.labels.end())
      throw Error(ErrorKind::ParseError, "unknown unit '" + tok + "' on " + s.name, text);
    u[it - s.units.labels.begin()] ^= 1;
  }
  return u;
}

std::string format_unit(const Scheme& s, const F2Vec& u) {
  std::string out;
  for (std::size_t i = 0; i < u.size(); ++i)
    if (u[i]) out += (out.empty() ? "" : "*") + s.units.labels[i];
  return out.empty() ? "1" : out;
}

// ---------------------------------------------------------------- Morphism

MorphismPtr Morphism::identity(const SchemePtr& s) {
  auto m = std::make_shared<Morphism>();
  m->name = "id_" + s->name;
  m->source = s;
  m->target = s;
  m->pic_pullback = GroupHom::identity(s->pic);
  m->unit_pullback = F2Map::identity(s->units.dim());
  m->proper = ProperData{GroupElement::zero(s->pic), 0};
  m->affine_bundle = true;
  m->witt_pullback_iso = true;
  m->witt_pushforward_iso = true;
  return m;
}

MorphismPtr Morphism::compose(const MorphismPtr& outer, const MorphismPtr& inner) {
  if (inner->target != outer->source)
    throw Error(ErrorKind::TypeMismatch, "morphisms not composable", outer->name + " after " + inner->name);
  auto m = std::make_shared<Morphism>();
  m->name = outer->name + "∘" + inner->name;
  m->source = inner->source;
  m->target = outer->target;
  m->pic_pullback = inner->pic_pullback.after(outer->pic_pullback);
  m->unit_pullback = inner->unit_pullback.after(outer->unit_pullback);
  if (outer->proper && inner->proper)
    m->proper = ProperData{inner->proper->omega + inner->pic_pullback(outer->proper->omega),
                           inner->proper->dimension + outer->proper->dimension};
  m->affine_bundle = outer->affine_bundle && inner->affine_bundle;
  m->witt_pullback_iso = outer->witt_pullback_iso && inner->witt_pullback_iso;
  m->witt_pushforward_iso = outer->witt_pushforward_iso && inner->witt_pushforward_iso;
  // support maps compose where both legs are declared
  auto labels_of = [](const SchemePtr& s) {
    std::vector<std::string> out = s->supports;
    out.push_back("full");
    return out;
  };
  for (const auto& label : labels_of(outer->target)) try {
      m->pull_supports[label] = inner->pull_support(outer->pull_support(label));
    } catch (const Error&) {
    }
  for (const auto& label : labels_of(inner->source)) try {
      m->push_supports[label] = outer->push_support(inner->push_support(label));
    } catch (const Error&) {
    }
  return m;
}

std::string Morphism::pull_support(const std::string& label) const {
  auto it = pull_supports.find(label);
  if (it != pull_supports.end()) return it->second;
  if (label == "full") return "full";
  throw Error(ErrorKind::TypeMismatch, "morphism " + name + " has no pullback for support " + label);
}

std::string Morphism::push_support(const std::string& label) const {
  auto it = push_supports.find(label);
  if (it != push_supports.end()) return it->second;
  if (label == "full") return "full";
  throw Error(ErrorKind::TypeMismatch, "morphism " + name + " has no pushforward for support " + label);
}

const ProperData& require_proper(const Morphism& f) {
  if (!f.proper) throw Error(ErrorKind::NotProper, "morphism " + f.name + " has no proper data");
  return *f.proper;
}

// -------------------------------------------------------------- LineBundle

LineBundle LineBundle::trivial(const SchemePtr& s) { return {s, GroupElement::zero(s->pic)}; }

LineBundle LineBundle::operator+(const LineBundle& o) const {
  if (scheme != o.scheme) throw Error(ErrorKind::TypeMismatch, "line bundles on different schemes");
  return {scheme, cls + o.cls};
}

LineBundle LineBundle::operator-(const LineBundle& o) const {
  if (scheme != o.scheme) throw Error(ErrorKind::TypeMismatch, "line bundles on different schemes");
  return {scheme, cls - o.cls};
}

LineBundle pull_bundle(const Morphism& f, const LineBundle& l) {
  if (l.scheme != f.target)
    throw Error(ErrorKind::TypeMismatch, "pullback along " + f.name + " of a bundle on " + l.scheme->name);
  return {f.source, f.pic_pullback(l.cls)};
}

LineBundle shriek_bundle(const Morphism& f, const LineBundle& l) {
  const ProperData& p = require_proper(f);
  LineBundle pulled = pull_bundle(f, l);
  return {f.source, p.omega + pulled.cls};
}

// ---------------------------------------------------------- AlignmentClass

AlignmentClass::AlignmentClass(LineBundle source, LineBundle target, GroupElement m, F2Vec u)
    : source_(std::move(source)), target_(std::move(target)), m_(std::move(m)), u_(std::move(u)) {
  if (source_.scheme != target_.scheme)
    throw Error(ErrorKind::TypeMismatch, "alignment endpoints on different schemes");
  const Scheme& s = *source_.scheme;
  if (m_.group() != s.pic || u_.size() != s.units.dim())
    throw Error(ErrorKind::TypeMismatch, "alignment data not on scheme " + s.name);
  if (m_.times(2) + source_.cls != target_.cls)
    throw Error(ErrorKind::TypeMismatch, "2m + L1 != L2 for alignment on " + s.name,
                "m=" + format_pic(s, m_) + " L1=" + format_pic(s, source_.cls) +
                    " L2=" + format_pic(s, target_.cls));
}

AlignmentClass AlignmentClass::identity(const LineBundle& l) {
  return AlignmentClass(l, l, GroupElement::zero(l.scheme->pic), l.scheme->units.zero());
}

bool AlignmentClass::is_identity_shaped() const { return m_.is_zero() && f2::is_zero(u_); }

bool AlignmentClass::operator==(const AlignmentClass& o) const {
  return source_ == o.source_ && target_ == o.target_ && m_ == o.m_ && u_ == o.u_;
}

bool AlignmentClass::operator<(const AlignmentClass& o) const {
  if (m_ != o.m_) return m_ < o.m_;
  return u_ < o.u_;
}

std::string AlignmentClass::to_string() const {
  const Scheme& s = *scheme();
  return "(" + format_pic(s, m_) + "," + format_unit(s, u_) + "): " + format_pic(s, source_.cls) +
         " ~> " + format_pic(s, target_.cls);
}

bool alignment_exists(const LineBundle& l1, const LineBundle& l2) {
  if (l1.scheme != l2.scheme) throw Error(ErrorKind::TypeMismatch, "line bundles on different schemes");
  return solve_linear(GroupHom::doubling(l1.scheme->pic), l2.cls - l1.cls).has_value();
}

std::vector<AlignmentClass> alignments_between(const LineBundle& l1, const LineBundle& l2,
                                               std::size_t limit) {
  if (l1.scheme != l2.scheme) throw Error(ErrorKind::TypeMismatch, "line bundles on different schemes");
  const Scheme& s = *l1.scheme;
  auto sol = solve_linear(GroupHom::doubling(s.pic), l2.cls - l1.cls);
  if (!sol) return {};
  if (!sol->kernel.group->is_finite())
    throw Error(ErrorKind::NotEnumerable, "infinitely many square roots on " + s.name);
  std::size_t units = s.units.dim();
  if (units > 20 || (std::size_t{1} << units) > limit)
    throw Error(ErrorKind::NotEnumerable, "too many unit classes on " + s.name);
  std::vector<AlignmentClass> out;
  for (const auto& m : solution_set(GroupHom::doubling(s.pic), l2.cls - l1.cls, limit))
    for (const auto& u : f2::enumerate(units)) {
      out.emplace_back(l1, l2, m, u);
      if (out.size() > limit) throw Error(ErrorKind::NotEnumerable, "too many alignments on " + s.name);
    }
  std::sort(out.begin(), out.end());
  return out;
}

AlignmentClass standard_alignment(const LineBundle& l1, const LineBundle& l2) {
  if (l1.scheme != l2.scheme) throw Error(ErrorKind::TypeMismatch, "line bundles on different schemes");
  const Scheme& s = *l1.scheme;
  auto sol = solve_linear(GroupHom::doubling(s.pic), l2.cls - l1.cls);
  if (!sol)
    throw Error(ErrorKind::ClassMismatch, "no alignment between classes differing by a non-square",
                format_pic(s, l1.cls) + " vs " + format_pic(s, l2.cls));
  return AlignmentClass(l1, l2, sol->particular, s.units.zero());
}

AlignmentClass compose(const AlignmentClass& a2, const AlignmentClass& a1) {
  if (a1.target() != a2.source())
    throw Error(ErrorKind::TypeMismatch, "alignments not composable", a2.to_string() + " after " + a1.to_string());
  return AlignmentClass(a1.source(), a2.target(), a1.m() + a2.m(), f2::add(a1.u(), a2.u()));
}

AlignmentClass invert(const AlignmentClass& a) {
  return AlignmentClass(a.target(), a.source(), -a.m(), a.u());
}

AlignmentClass tensor(const AlignmentClass& a1, const AlignmentClass& a2) {
  if (a1.scheme() != a2.scheme()) throw Error(ErrorKind::TypeMismatch, "tensor of alignments on different schemes");
  return AlignmentClass(a1.source() + a2.source(), a1.target() + a2.target(), a1.m() + a2.m(),
                        f2::add(a1.u(), a2.u()));
}

AlignmentClass pull_alignment(const Morphism& f, const AlignmentClass& a) {
  if (a.scheme() != f.target)
    throw Error(ErrorKind::TypeMismatch, "alignment not on the target of " + f.name, a.to_string());
  return AlignmentClass(pull_bundle(f, a.source()), pull_bundle(f, a.target()), f.pic_pullback(a.m()),
                        f.unit_pullback.apply(a.u()));
}

AlignmentClass shriek_alignment(const Morphism& f, const AlignmentClass& a) {
  const ProperData& p = require_proper(f);
  AlignmentClass pulled = pull_alignment(f, a);
  return tensor(AlignmentClass::identity({f.source, p.omega}), pulled);
}

AlignmentClass strip_omega(const Morphism& f, const AlignmentClass& a) {
  const ProperData& p = require_proper(f);
  if (a.scheme() != f.source) throw Error(ErrorKind::TypeMismatch, "alignment not on the source of " + f.name);
  return tensor(AlignmentClass::identity({f.source, -p.omega}), a);
}

AlignmentClass solve_composition(const AlignmentClass& a1, const AlignmentClass& a2, Side side) {
  AlignmentClass b;
  if (side == Side::Left) {
    if (a1.source() != a2.source()) throw Error(ErrorKind::TypeMismatch, "left solve needs a common source");
    b = compose(a2, invert(a1));
    if (compose(b, a1) != a2) throw Error(ErrorKind::InternalContradiction, "left solve failed to recompose");
  } else {
    if (a1.target() != a2.target()) throw Error(ErrorKind::TypeMismatch, "right solve needs a common target");
    b = compose(invert(a1), a2);
    if (compose(a1, b) != a2) throw Error(ErrorKind::InternalContradiction, "right solve failed to recompose");
  }
  return b;
}

KAlignmentClass::KAlignmentClass(MorphismPtr pi, LineBundle k, LineBundle l1, AlignmentClass inner)
    : pi_(std::move(pi)), k_(std::move(k)), l1_(std::move(l1)), inner_(std::move(inner)) {
  if (k_.scheme != pi_->target) throw Error(ErrorKind::TypeMismatch, "K must live on the base of " + pi_->name);
  if (l1_.scheme != pi_->source) throw Error(ErrorKind::TypeMismatch, "L1 must live on the source of " + pi_->name);
  if (inner_.source() != pull_bundle(*pi_, k_) + l1_)
    throw Error(ErrorKind::TypeMismatch, "K-alignment source is not π*K ⊗ L1", inner_.to_string());
}

}  // namespace wtc
