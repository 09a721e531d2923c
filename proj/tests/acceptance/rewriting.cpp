#include <random>

#include "acceptance.hpp"
#include "random_expr.hpp"
#include "wtc/error.hpp"

namespace wtc::acceptance {

namespace {

std::size_t budget(std::size_t n) { return 4 * (n + 1) * (n + 1) + 16; }

/// Normalization laws on one expression; returns the normal form.
MorphismExpr normal_laws(Checks& c, const Geometry& g, const MorphismExpr& e, std::mt19937& rng) {
  NormalizeStats stats;
  MorphismExpr n = normalize(g, e, stats);
  c.expect(stats.steps <= budget(e.word.size()), "normalization exceeded the step budget on " + e.to_string());
  c.expect(n.domain() == e.domain() && n.codomain() == e.codomain(), "normal form changed the endpoints");
  c.expect(normalize(g, n).to_string() == n.to_string(), "normalization is not idempotent on " + e.to_string());
  for (int k = 0; k < 3; ++k) {
    NormalizeStats s;
    MorphismExpr r = normalize_randomized(g, e, static_cast<unsigned>(rng()), s);
    c.expect(s.steps <= budget(e.word.size()), "randomized normalization exceeded the step budget");
    c.expect(r.to_string() == n.to_string(), "rewrite order changes the normal form of " + e.to_string());
  }
  return n;
}

void geometry_only(Checks& c, const char* fx, std::size_t count, std::mt19937& rng) {
  Geometry g = load_geometry(fx);
  std::vector<SchemePtr> schemes;
  for (const auto& [name, s] : g.schemes) schemes.push_back(s);
  for (std::size_t i = 0; i < count; ++i) {
    SchemePtr s = schemes[rng() % schemes.size()];
    auto twists = box(s->pic, 2);
    TwistedGroupRef dom{s, "full", static_cast<long>(rng() % 4), twists[rng() % twists.size()]};
    normal_laws(c, g, random_expr(g, dom, 1 + rng() % 12, rng), rng);
  }
}

/// Expressions typed at module pieces, evaluated on every element of the piece.
std::size_t with_modules(Checks& c, const char* fx, std::size_t count, std::mt19937& rng) {
  WittSystem w = load_system(fx);
  const Geometry& g = w.geometry;
  std::vector<const WittModule*> mods;
  for (const auto& [name, m] : w.modules) mods.push_back(&m);
  std::size_t evaluated = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const WittModule& m = *mods[rng() % mods.size()];
    auto key = std::next(m.pieces.begin(), static_cast<long>(rng() % m.pieces.size()))->first;
    LineBundle rep = m.representative(key.cls);
    TwistedGroupRef dom{m.scheme, m.support, key.degree, rep.cls};
    MorphismExpr e = random_expr(g, dom, 1 + rng() % 12, rng);
    MorphismExpr n = normal_laws(c, g, e, rng);
    for (const auto& x : w.elements(m.name)) {
      if (mod4(x.degree) != key.degree || m.pic_class(x.twist().cls) != key.cls) continue;
      try {
        RepresentedClass a = w.eval(e, x);
        RepresentedClass b = w.eval(n, x);
        c.expect(w.compare(a, b), "evaluation differs after normalization: " + e.to_string() + " on " + x.to_string());
        ++evaluated;
      } catch (const Error& err) {
        c.expect(err.kind() == ErrorKind::MissingMap, "evaluation failed: " + err.message());
        break;
      }
    }
  }
  return evaluated;
}

}  // namespace

void rewriting_suite(Checks& c) {
  std::mt19937 rng(seed_or(20261017));
  geometry_only(c, "f1.json", 300, rng);
  geometry_only(c, "torsion_pic.json", 300, rng);
  std::size_t evaluated = 0;
  evaluated += with_modules(c, "f1.json", 800, rng);
  evaluated += with_modules(c, "projective_line.json", 400, rng);
  evaluated += with_modules(c, "affine_line.json", 100, rng);
  evaluated += with_modules(c, "point.json", 100, rng);
  // evaluations stop at the first missing registered map of an expression
  c.expect(evaluated >= 1000, "too few evaluations: " + std::to_string(evaluated));
}

}  // namespace wtc::acceptance
