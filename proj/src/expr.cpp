#include "wtc/expr.hpp"

#include <algorithm>
#include <cctype>
#include <random>

#include "wtc/error.hpp"

namespace wtc {

// ------------------------------------------------------------------ labels

Label Label::operator+(const Label& o) const {
  Label out = *this;
  for (const auto& [a, c] : o.pic) {
    long v = (out.pic[a] += c);
    if (v == 0) out.pic.erase(a);
  }
  for (const auto& [a, c] : o.units) {
    int v = (out.units[a] + c) % 2;
    if (v == 0)
      out.units.erase(a);
    else
      out.units[a] = 1;
  }
  return out;
}

namespace {

std::string pulled_atom(const std::string& morphism, const std::string& atom) {
  bool simple = std::all_of(atom.begin(), atom.end(),
                            [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '*'; });
  return morphism + "*" + (simple ? atom : "(" + atom + ")");
}

}  // namespace

Label Label::pulled(const std::string& morphism) const {
  Label out;
  for (const auto& [a, c] : pic) out.pic[pulled_atom(morphism, a)] = c;
  for (const auto& [a, c] : units) out.units[pulled_atom(morphism, a)] = c;
  return out;
}

std::string Label::pic_text() const {
  if (pic.empty()) return "0";
  std::string s;
  for (const auto& [a, c] : pic) {
    if (c < 0)
      s += "-";
    else if (!s.empty())
      s += "+";
    long k = c < 0 ? -c : c;
    if (k != 1) s += std::to_string(k);
    s += a;
  }
  return s;
}

std::string Label::unit_text() const {
  if (units.empty()) return "1";
  std::string s;
  for (const auto& [a, c] : units) s += (s.empty() ? "" : "*") + a;
  return s;
}

namespace {

Label label_of(const Scheme& s, const GroupElement& m, const F2Vec& u) {
  Label l;
  IntVector p = s.pic->presentation_from_canonical(m.coords());
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] != 0) l.pic[s.pic_labels[i]] = p[i].get_si();
  for (std::size_t i = 0; i < u.size(); ++i)
    if (u[i]) l.units[s.units.labels[i]] = 1;
  return l;
}

std::string kind_name(GenKind k) {
  switch (k) {
    case GenKind::Per: return "per";
    case GenKind::Lbi: return "lbi";
    case GenKind::Alis: return "alis";
    case GenKind::Pull: return "pull";
    case GenKind::Push: return "push";
    case GenKind::Ext: return "ext";
    case GenKind::Restrict: return "restrict";
    case GenKind::Bord: return "bord";
  }
  return "?";
}

}  // namespace

std::string TwistedGroupRef::to_string() const {
  std::string s = "W^" + std::to_string(degree);
  if (support != "full") s += "_" + support;
  return s + "(" + scheme->name + ", " + format_pic(*scheme, twist) + ")";
}

bool Generator::is_identity_class() const { return is_alis() && m.is_zero() && f2::is_zero(u); }

std::string Generator::to_string() const {
  switch (kind) {
    case GenKind::Per: return "per(" + label.pic_text() + ")";
    case GenKind::Lbi: return "lbi(" + label.unit_text() + ")";
    case GenKind::Alis: return "alis(M=" + label.pic_text() + ",u=" + label.unit_text() + ")";
    case GenKind::Pull:
    case GenKind::Push: return kind_name(kind) + "(" + f->name + ")";
    default: return kind_name(kind) + "(" + localization + ")";
  }
}

Generator make_alis(const AlignmentClass& a, Label label) {
  Generator g;
  g.kind = GenKind::Alis;
  g.m = a.m();
  g.u = a.u();
  g.label = label.empty() ? label_of(*a.scheme(), a.m(), a.u()) : std::move(label);
  return g;
}

Generator make_pull(const MorphismPtr& f) {
  Generator g;
  g.kind = GenKind::Pull;
  g.f = f;
  return g;
}

Generator make_push(const MorphismPtr& f, std::optional<GroupElement> target_twist) {
  Generator g;
  g.kind = GenKind::Push;
  g.f = f;
  g.target_twist = std::move(target_twist);
  return g;
}

Generator make_local(GenKind kind, const std::string& localization, std::optional<GroupElement> target_twist) {
  Generator g;
  g.kind = kind;
  g.localization = localization;
  g.target_twist = std::move(target_twist);
  return g;
}

namespace {

/// Class of the alis generator read off its label kind.
void settle_kind(Generator& g) {
  if (!g.is_alis()) return;
  if (g.label.units.empty())
    g.kind = GenKind::Per;
  else if (g.label.pic.empty())
    g.kind = GenKind::Lbi;
  else
    g.kind = GenKind::Alis;
}

std::optional<GroupElement> canonical_preimage(const GroupHom& pull, const GroupElement& x) {
  auto s = solve_linear(pull, x);
  if (!s) return std::nullopt;
  return s->particular;
}

Error type_error(std::size_t index, const Generator& g, const std::string& what) {
  return Error(ErrorKind::TypeMismatch, "generator " + std::to_string(index) + " (" + g.to_string() + "): " + what);
}

/// Domain of generator `index` is `ref`; returns its codomain and pins the
/// codomain twist of push and boundary generators.
TwistedGroupRef advance(const Geometry& geo, Generator& g, const TwistedGroupRef& ref, std::size_t index) {
  TwistedGroupRef out = ref;
  switch (g.kind) {
    case GenKind::Per:
    case GenKind::Lbi:
    case GenKind::Alis:
      if (g.m.group() != ref.scheme->pic || g.u.size() != ref.scheme->units.dim())
        throw type_error(index, g, "alignment class does not live on " + ref.scheme->name);
      out.twist = ref.twist + g.m.times(2);
      return out;
    case GenKind::Pull:
      if (g.f->target != ref.scheme) throw type_error(index, g, "pull-back expects a class on " + g.f->target->name);
      out.scheme = g.f->source;
      out.support = g.f->pull_support(ref.support);
      out.twist = g.f->pic_pullback(ref.twist);
      return out;
    case GenKind::Push: {
      if (g.f->source != ref.scheme) throw type_error(index, g, "push-forward expects a class on " + g.f->source->name);
      if (!g.f->proper) throw type_error(index, g, "push-forward along a morphism without proper data");
      const ProperData& p = *g.f->proper;
      GroupElement rest = ref.twist - p.omega;
      if (g.target_twist) {
        if (g.target_twist->group() != g.f->target->pic || !(g.f->pic_pullback(*g.target_twist) == rest))
          throw type_error(index, g, "domain twist is not ω_f + f*L for the given L");
      } else {
        g.target_twist = canonical_preimage(g.f->pic_pullback, rest);
        if (!g.target_twist) throw type_error(index, g, "domain twist is not of the form ω_f + f*L");
      }
      out.scheme = g.f->target;
      out.support = g.f->push_support(ref.support);
      out.degree = ref.degree - p.dimension;
      out.twist = *g.target_twist;
      return out;
    }
    case GenKind::Ext: {
      const Localization& l = geo.localization(g.localization);
      if (ref.scheme != geo.scheme(l.total) || ref.support != l.support)
        throw type_error(index, g, "extension expects W_" + l.support + "(" + l.total + ")");
      out.support = "full";
      return out;
    }
    case GenKind::Restrict: {
      const Localization& l = geo.localization(g.localization);
      if (ref.scheme != geo.scheme(l.total) || ref.support != "full")
        throw type_error(index, g, "restriction expects W(" + l.total + ")");
      MorphismPtr u = geo.morphism(l.upsilon);
      g.f = u;
      out.scheme = u->source;
      out.twist = u->pic_pullback(ref.twist);
      return out;
    }
    case GenKind::Bord: {
      const Localization& l = geo.localization(g.localization);
      MorphismPtr u = geo.morphism(l.upsilon);
      g.f = u;
      if (ref.scheme != u->source || ref.support != "full")
        throw type_error(index, g, "boundary expects W(" + l.open + ")");
      if (g.target_twist) {
        if (g.target_twist->group() != u->target->pic || !(u->pic_pullback(*g.target_twist) == ref.twist))
          throw type_error(index, g, "domain twist is not the restriction of the given L");
      } else {
        g.target_twist = canonical_preimage(u->pic_pullback, ref.twist);
        if (!g.target_twist) throw type_error(index, g, "domain twist does not extend over " + l.total);
      }
      out.scheme = u->target;
      out.support = l.support;
      out.degree = ref.degree + 1;
      out.twist = *g.target_twist;
      return out;
    }
  }
  return out;
}

}  // namespace

MorphismExpr typecheck(const Geometry& g, std::vector<Generator> word, const TwistedGroupRef& domain) {
  if (domain.twist.group() != domain.scheme->pic) throw Error(ErrorKind::TypeMismatch, "domain twist off its scheme");
  if (!domain.scheme->has_support(domain.support))
    throw Error(ErrorKind::TypeMismatch, "undeclared support " + domain.support + " on " + domain.scheme->name);
  bool has_push = false, has_bord = false;
  MorphismExpr e;
  e.refs.push_back(domain);
  for (std::size_t i = 0; i < word.size(); ++i) {
    has_push |= word[i].kind == GenKind::Push;
    has_bord |= word[i].kind == GenKind::Bord;
    if (has_push && has_bord)
      throw type_error(i, word[i], "words mixing boundary maps and push-forwards are not supported");
    e.refs.push_back(advance(g, word[i], e.refs.back(), i));
  }
  e.word = std::move(word);
  return e;
}

std::string MorphismExpr::to_string() const {
  if (word.empty()) return "id";
  std::vector<std::string> parts;
  for (std::size_t i = 0; i < word.size(); ++i) {
    const Generator& gen = word[i];
    std::string s = gen.to_string();
    if (gen.target_twist && (gen.kind == GenKind::Push || gen.kind == GenKind::Bord)) {
      // print L= only when it differs from the canonical choice
      GroupElement rest = refs[i].twist;
      if (gen.kind == GenKind::Push) rest = rest - gen.f->proper->omega;
      std::optional<GroupElement> canon = canonical_preimage(gen.f->pic_pullback, rest);
      if (canon && !(*canon == *gen.target_twist)) {
        s.pop_back();
        s += ",L=" + format_pic(*refs[i + 1].scheme, *gen.target_twist) + ")";
      }
    }
    parts.push_back(s);
  }
  std::string out;
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) out += (out.empty() ? "" : " . ") + *it;
  return out;
}

}  // namespace wtc

// ------------------------------------------------------------------ parsing

namespace wtc {
namespace {

struct RawGen {
  std::string name;
  std::vector<std::pair<std::string, std::string>> args;  // key may be empty
  std::size_t column = 0;                                  // 1-based
};

Error parse_error(std::size_t column, const std::string& what) {
  return Error(ErrorKind::ParseError, what + " at column " + std::to_string(column));
}

/// Tokens in text order (left to right).
std::vector<RawGen> lex(const std::string& text) {
  std::vector<std::pair<char, std::size_t>> cs;
  for (std::size_t i = 0; i < text.size(); ++i)
    if (!std::isspace(static_cast<unsigned char>(text[i]))) cs.emplace_back(text[i], i + 1);
  std::vector<RawGen> out;
  std::size_t i = 0;
  if (cs.empty()) throw parse_error(1, "empty expression");
  while (i < cs.size()) {
    RawGen r;
    r.column = cs[i].second;
    while (i < cs.size() && (std::isalpha(static_cast<unsigned char>(cs[i].first)) || cs[i].first == '_'))
      r.name += cs[i++].first;
    if (r.name.empty()) throw parse_error(cs[i].second, std::string("unexpected '") + cs[i].first + "'");
    if (r.name == "id") {
      if (i < cs.size() && cs[i].first == '(') throw parse_error(cs[i].second, "id takes no arguments");
    } else {
      if (i >= cs.size() || cs[i].first != '(')
        throw parse_error(i < cs.size() ? cs[i].second : text.size() + 1, "expected '(' after " + r.name);
      ++i;
      std::string cur;
      bool closed = false;
      while (i < cs.size()) {
        char c = cs[i].first;
        ++i;
        if (c == ')') {
          closed = true;
          break;
        }
        if (c == '(') throw parse_error(cs[i - 1].second, "nested parentheses");
        if (c == ',') {
          if (cur.empty()) throw parse_error(cs[i - 1].second, "empty argument");
          r.args.emplace_back("", cur);
          cur.clear();
        } else {
          cur += c;
        }
      }
      if (!closed) throw parse_error(text.size() + 1, "missing ')'");
      if (!cur.empty()) r.args.emplace_back("", cur);
      for (auto& [k, v] : r.args) {
        auto eq = v.find('=');
        if (eq != std::string::npos) {
          k = v.substr(0, eq);
          v = v.substr(eq + 1);
          if (v.empty()) throw parse_error(r.column, "empty value for " + k);
        }
      }
    }
    out.push_back(std::move(r));
    if (i < cs.size()) {
      if (cs[i].first != '.') throw parse_error(cs[i].second, "expected '.' between generators");
      ++i;
      if (i >= cs.size()) throw parse_error(text.size() + 1, "dangling '.'");
    }
  }
  return out;
}

struct PicParse {
  GroupElement cls;
  Label label;
};

PicParse parse_pic_label(const Scheme& s, const std::string& text, std::size_t column) {
  PicParse out{GroupElement::zero(s.pic), {}};
  std::size_t i = 0;
  bool first = true;
  while (i < text.size()) {
    long sign = 1;
    if (text[i] == '+' || text[i] == '-') {
      sign = text[i] == '-' ? -1 : 1;
      ++i;
    } else if (!first) {
      throw parse_error(column, "expected '+' or '-' in '" + text + "'");
    }
    first = false;
    std::string digits;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) digits += text[i++];
    if (i < text.size() && text[i] == '*') ++i;
    std::string atom;
    while (i < text.size() && (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_' || text[i] == '\''))
      atom += text[i++];
    if (atom.empty()) {
      if (digits.empty() || std::stol(digits) != 0) throw parse_error(column, "bad Picard term in '" + text + "'");
      continue;
    }
    long coeff = sign * (digits.empty() ? 1 : std::stol(digits));
    GroupElement a;
    try {
      a = parse_pic(s, atom);
    } catch (const Error&) {
      throw parse_error(column, "unknown Picard atom '" + atom + "' on " + s.name);
    }
    out.cls = out.cls + a.times(coeff);
    out.label = out.label + Label{{{atom, coeff}}, {}};
  }
  return out;
}

F2Vec parse_unit_label(const Scheme& s, const std::string& text, std::size_t column, Label& label) {
  F2Vec u = s.units.zero();
  if (text == "1") return u;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('*', start);
    std::string atom = text.substr(start, end == std::string::npos ? std::string::npos : end - start);
    if (atom != "1") {
      auto it = std::find(s.units.labels.begin(), s.units.labels.end(), atom);
      if (it == s.units.labels.end()) throw parse_error(column, "unknown unit '" + atom + "' on " + s.name);
      u[it - s.units.labels.begin()] ^= 1;
      label = label + Label{{}, {{atom, 1}}};
    }
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return u;
}

MorphismPtr lookup_morphism(const Geometry& g, const RawGen& r, const std::string& name) {
  auto it = g.morphisms.find(name);
  if (it == g.morphisms.end()) throw parse_error(r.column, "unknown morphism '" + name + "'");
  return it->second;
}

const Localization& lookup_localization(const Geometry& g, const RawGen& r, const std::string& name) {
  auto it = g.localizations.find(name);
  if (it == g.localizations.end()) throw parse_error(r.column, "unknown localization '" + name + "'");
  return it->second;
}

std::string single_arg(const RawGen& r) {
  if (r.args.size() != 1 || !r.args[0].first.empty()) throw parse_error(r.column, r.name + " takes one argument");
  return r.args[0].second;
}

/// Target name plus optional L= twist text.
std::pair<std::string, std::string> target_args(const RawGen& r) {
  if (r.args.empty() || r.args.size() > 2 || !r.args[0].first.empty())
    throw parse_error(r.column, r.name + " takes a name and an optional L=twist");
  std::string twist;
  if (r.args.size() == 2) {
    if (r.args[1].first != "L") throw parse_error(r.column, "unknown key '" + r.args[1].first + "'");
    twist = r.args[1].second;
  }
  return {r.args[0].second, twist};
}

Generator resolve(const Geometry& g, const RawGen& r, const SchemePtr& scheme) {
  Generator gen;
  if (r.name == "per") {
    PicParse p = parse_pic_label(*scheme, single_arg(r), r.column);
    gen.kind = GenKind::Per;
    gen.m = p.cls;
    gen.u = scheme->units.zero();
    gen.label = p.label;
  } else if (r.name == "lbi") {
    gen.kind = GenKind::Lbi;
    gen.m = GroupElement::zero(scheme->pic);
    gen.u = parse_unit_label(*scheme, single_arg(r), r.column, gen.label);
  } else if (r.name == "alis") {
    gen.kind = GenKind::Alis;
    gen.m = GroupElement::zero(scheme->pic);
    gen.u = scheme->units.zero();
    for (const auto& [k, v] : r.args) {
      if (k == "M") {
        PicParse p = parse_pic_label(*scheme, v, r.column);
        gen.m = p.cls;
        gen.label = gen.label + p.label;
      } else if (k == "u") {
        gen.u = parse_unit_label(*scheme, v, r.column, gen.label);
      } else {
        throw parse_error(r.column, "alis takes M= and u= arguments");
      }
    }
  } else if (r.name == "pull") {
    gen = make_pull(lookup_morphism(g, r, single_arg(r)));
  } else if (r.name == "push") {
    auto [name, twist] = target_args(r);
    gen = make_push(lookup_morphism(g, r, name));
    if (!twist.empty()) gen.target_twist = parse_pic_label(*gen.f->target, twist, r.column).cls;
  } else if (r.name == "ext" || r.name == "restrict") {
    lookup_localization(g, r, single_arg(r));
    gen = make_local(r.name == "ext" ? GenKind::Ext : GenKind::Restrict, single_arg(r));
  } else if (r.name == "bord") {
    auto [name, twist] = target_args(r);
    const Localization& l = lookup_localization(g, r, name);
    gen = make_local(GenKind::Bord, name);
    if (!twist.empty()) gen.target_twist = parse_pic_label(*g.scheme(l.total), twist, r.column).cls;
  } else {
    throw parse_error(r.column, "unknown generator '" + r.name + "'");
  }
  settle_kind(gen);
  return gen;
}

}  // namespace

std::optional<std::string> infer_domain_scheme(const Geometry& g, const std::string& text) {
  auto raw = lex(text);
  for (auto it = raw.rbegin(); it != raw.rend(); ++it) {
    const RawGen& r = *it;
    if (r.name == "pull") return lookup_morphism(g, r, single_arg(r))->target->name;
    if (r.name == "push") return lookup_morphism(g, r, target_args(r).first)->source->name;
    if (r.name == "ext" || r.name == "restrict") return lookup_localization(g, r, single_arg(r)).total;
    if (r.name == "bord") return lookup_localization(g, r, target_args(r).first).open;
  }
  return std::nullopt;
}

MorphismExpr parse_expr(const Geometry& g, const std::string& text, const TwistedGroupRef& domain) {
  auto raw = lex(text);
  std::vector<Generator> word;
  TwistedGroupRef ref = domain;
  for (auto it = raw.rbegin(); it != raw.rend(); ++it) {
    if (it->name == "id") continue;
    word.push_back(resolve(g, *it, ref.scheme));
    ref = advance(g, word.back(), ref, word.size() - 1);
  }
  return typecheck(g, std::move(word), domain);
}

// ------------------------------------------------------------ normalization

namespace {

bool moves_earlier_past(const Generator& g) {
  return g.kind == GenKind::Push || g.kind == GenKind::Ext || g.kind == GenKind::Bord;
}

bool moves_later_past(const Generator& g) { return g.kind == GenKind::Pull || g.kind == GenKind::Restrict; }

Generator transform(const MorphismPtr& f, const Generator& a) {
  Generator out = a;
  out.m = f->pic_pullback(a.m);
  out.u = f->unit_pullback.apply(a.u);
  out.label = a.label.pulled(f->name);
  return out;
}

/// [fixed, a] -> [a', fixed]; updates the pinned twist of fixed.
Generator cross_earlier(Generator& fixed, const Generator& a) {
  if (fixed.kind == GenKind::Ext) return a;
  *fixed.target_twist = *fixed.target_twist + a.m.times(2);
  return transform(fixed.f, a);
}

/// [a, fixed] -> [fixed, a'].
Generator cross_later(const Generator& fixed, const Generator& a) { return transform(fixed.f, a); }

Generator merge(const Generator& later, const Generator& earlier) {
  Generator out = earlier;
  out.m = earlier.m + later.m;
  out.u = f2::add(earlier.u, later.u);
  out.label = earlier.label + later.label;
  return out;
}

bool droppable(const Generator& g) { return g.is_identity_class() && g.label.empty(); }

std::size_t budget(std::size_t n) { return 4 * (n + 1) * (n + 1) + 16; }

}  // namespace

MorphismExpr normalize(const Geometry& g, const MorphismExpr& e) {
  NormalizeStats stats;
  return normalize(g, e, stats);
}

MorphismExpr normalize(const Geometry& g, const MorphismExpr& e, NormalizeStats& stats) {
  std::vector<Generator> fixed;
  std::vector<std::vector<Generator>> gaps(1);
  for (const auto& gen : e.word) {
    if (gen.is_alis()) {
      gaps.back().push_back(gen);
    } else {
      fixed.push_back(gen);
      gaps.emplace_back();
    }
  }
  const std::size_t n = fixed.size();
  std::vector<std::optional<Generator>> dest(n + 1);
  for (std::size_t j = 0; j <= n; ++j)
    for (Generator a : gaps[j]) {
      std::size_t pos = j;
      for (;;) {
        if (pos > 0 && moves_earlier_past(fixed[pos - 1])) {
          a = cross_earlier(fixed[pos - 1], a);
          --pos;
        } else if (pos < n && moves_later_past(fixed[pos])) {
          a = cross_later(fixed[pos], a);
          ++pos;
        } else {
          break;
        }
        ++stats.steps;
      }
      dest[pos] = dest[pos] ? merge(a, *dest[pos]) : a;
      ++stats.steps;
    }
  std::vector<Generator> word;
  for (std::size_t j = 0; j <= n; ++j) {
    if (dest[j] && !droppable(*dest[j])) {
      settle_kind(*dest[j]);
      word.push_back(*dest[j]);
    }
    if (j < n) word.push_back(fixed[j]);
  }
  if (stats.steps > budget(e.word.size()))
    throw Error(ErrorKind::InternalContradiction, "normalization exceeded its step budget", e.to_string());
  return typecheck(g, std::move(word), e.domain());
}

MorphismExpr normalize_randomized(const Geometry& g, const MorphismExpr& e, unsigned seed, NormalizeStats& stats) {
  std::mt19937 rng(seed);
  std::vector<Generator> w = e.word;
  enum class Step { Merge, Drop, Earlier, Later };
  for (;;) {
    std::vector<std::pair<Step, std::size_t>> options;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (!w[i].is_alis()) continue;
      if (droppable(w[i])) options.emplace_back(Step::Drop, i);
      if (i + 1 < w.size() && w[i + 1].is_alis()) options.emplace_back(Step::Merge, i);
      if (i > 0 && moves_earlier_past(w[i - 1])) options.emplace_back(Step::Earlier, i);
      if (i + 1 < w.size() && moves_later_past(w[i + 1])) {
        // only when the gap is not bounded on the left by a generator alis moves past
        std::size_t k = i;
        while (k > 0 && w[k - 1].is_alis()) --k;
        if (k == 0 || !moves_earlier_past(w[k - 1])) options.emplace_back(Step::Later, i);
      }
    }
    if (options.empty()) break;
    auto [step, i] = options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)];
    switch (step) {
      case Step::Drop: w.erase(w.begin() + i); break;
      case Step::Merge:
        w[i] = merge(w[i + 1], w[i]);
        w.erase(w.begin() + i + 1);
        break;
      case Step::Earlier: {
        Generator a = cross_earlier(w[i - 1], w[i]);
        w[i] = w[i - 1];
        w[i - 1] = a;
        break;
      }
      case Step::Later: {
        Generator a = cross_later(w[i + 1], w[i]);
        w[i] = w[i + 1];
        w[i + 1] = a;
        break;
      }
    }
    if (++stats.steps > budget(e.word.size()))
      throw Error(ErrorKind::InternalContradiction, "normalization exceeded its step budget", e.to_string());
  }
  for (auto& gen : w) settle_kind(gen);
  return typecheck(g, std::move(w), e.domain());
}

bool expr_equal(const Geometry& g, const MorphismExpr& a, const MorphismExpr& b) {
  if (a.domain() != b.domain())
    throw Error(ErrorKind::TypeMismatch, "expressions have different domains",
                a.domain().to_string() + " vs " + b.domain().to_string());
  if (a.codomain() != b.codomain()) return false;
  auto strip = [](const MorphismExpr& e) {
    std::vector<Generator> out;
    for (const auto& gen : e.word)
      if (!gen.is_identity_class()) out.push_back(gen);
    return out;
  };
  auto wa = strip(normalize(g, a)), wb = strip(normalize(g, b));
  if (wa.size() != wb.size()) return false;
  for (std::size_t i = 0; i < wa.size(); ++i) {
    const Generator &x = wa[i], &y = wb[i];
    if (x.is_alis() != y.is_alis()) return false;
    if (x.is_alis()) {
      if (!(x.m == y.m) || x.u != y.u) return false;
      continue;
    }
    if (x.kind != y.kind || x.f != y.f || x.localization != y.localization) return false;
    if (x.target_twist.has_value() != y.target_twist.has_value()) return false;
    if (x.target_twist && !(*x.target_twist == *y.target_twist)) return false;
  }
  return true;
}

// --------------------------------------------------------------- lax words

LaxPull compose_lax(const LaxPull& outer, const LaxPull& inner) {
  if (outer.f->target != inner.f->source)
    throw Error(ErrorKind::TypeMismatch, "lax pull-backs do not compose", inner.f->name + ", " + outer.f->name);
  AlignmentClass pulled = pull_alignment(*outer.f, inner.a);
  return {Morphism::compose(inner.f, outer.f), compose(outer.a, pulled)};
}

LaxPush compose_lax(const LaxPush& outer, const LaxPush& inner) {
  if (inner.f->target != outer.f->source)
    throw Error(ErrorKind::TypeMismatch, "lax push-forwards do not compose", inner.f->name + ", " + outer.f->name);
  require_proper(*outer.f);
  require_proper(*inner.f);
  AlignmentClass shrieked = shriek_alignment(*inner.f, outer.a);
  return {Morphism::compose(outer.f, inner.f), compose(shrieked, inner.a)};
}

MorphismExpr lax_word(const Geometry& g, const LaxPull& p, const TwistedGroupRef& domain) {
  if (!(p.a.source().cls == p.f->pic_pullback(domain.twist)) || p.a.scheme() != p.f->source)
    throw Error(ErrorKind::TypeMismatch, "lax pull-back alignment must start at f*L", p.a.to_string());
  return typecheck(g, {make_pull(p.f), make_alis(p.a)}, domain);
}

MorphismExpr lax_word(const Geometry& g, const LaxPush& p, const TwistedGroupRef& domain) {
  if (!(p.a.source().cls == domain.twist) || p.a.scheme() != p.f->source)
    throw Error(ErrorKind::TypeMismatch, "lax push-forward alignment must start at the domain twist", p.a.to_string());
  return typecheck(g, {make_alis(p.a), make_push(p.f)}, domain);
}

}  // namespace wtc
