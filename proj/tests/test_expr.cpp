#include "doctest.h"
#include "random_expr.hpp"
#include "support.hpp"
#include "wtc/error.hpp"

using namespace wtc;
using namespace wtc::testing;

namespace {

TwistedGroupRef at(const Geometry& g, const std::string& scheme, const std::string& twist = "0", long degree = 0) {
  auto s = g.scheme(scheme);
  return {s, "full", degree, parse_pic(*s, twist)};
}

std::string normal_text(const Geometry& g, const std::string& text, const TwistedGroupRef& domain) {
  return normalize(g, parse_expr(g, text, domain)).to_string();
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::UsageError;
}

}  // namespace

TEST_CASE("typecheck bookkeeping") {
  Geometry g = load_geometry("f1.json");
  auto e = parse_expr(g, "per(h)", at(g, "Y", "h", 3));
  CHECK(e.codomain().twist == parse_pic(*g.scheme("Y"), "3h"));
  CHECK(e.codomain().degree == 3);

  // ω_f = -2h̄: the domain twist -2h̄ + f*L forces L = 2h
  auto p = parse_expr(g, "push(f)", at(g, "Ybar", "0"));
  CHECK(p.codomain().scheme == g.scheme("Y"));
  CHECK(p.codomain().twist == parse_pic(*g.scheme("Y"), "2h"));
  CHECK(kind_of([&] { parse_expr(g, "push(g)", at(g, "Ybar", "hb")); }) == ErrorKind::TypeMismatch);
  CHECK(kind_of([&] { parse_expr(g, "pull(f)", at(g, "Ybar")); }) == ErrorKind::TypeMismatch);
  CHECK(kind_of([&] { parse_expr(g, "push(piY)", at(g, "Y")); }) == ErrorKind::TypeMismatch);

  auto explicit_l = parse_expr(g, "push(f, L=2h)", at(g, "Ybar", "0"));
  CHECK(explicit_l.codomain().twist == p.codomain().twist);
  CHECK(kind_of([&] { parse_expr(g, "push(f,L=h)", at(g, "Ybar", "0")); }) == ErrorKind::TypeMismatch);
}

TEST_CASE("parse errors carry a column") {
  Geometry g = load_geometry("f1.json");
  for (const char* bad : {"per(h", "per(h)..per(h)", "frob(h)", "per(q)", "per(h) per(h)", "alis(K=h)", ""}) {
    try {
      parse_expr(g, bad, at(g, "Y"));
      FAIL("accepted " << bad);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::ParseError);
      CHECK(e.message().find("column") != std::string::npos);
    }
  }
}

TEST_CASE("rewrite rules") {
  Geometry g = load_geometry("f1.json");
  CHECK(normal_text(g, "per(M2).per(M1)", at(g, "Y")) == "per(M1+M2)");
  CHECK(normal_text(g, "per(h) . per(h)", at(g, "Y")) == "per(2h)");
  CHECK(normal_text(g, "lbi(a) . per(h)", at(g, "Y")) == "alis(M=h,u=a)");
  CHECK(normal_text(g, "per(h) . lbi(a)", at(g, "Y")) == "alis(M=h,u=a)");
  CHECK(normal_text(g, "lbi(a) . lbi(a)", at(g, "Y")) == "id");
  CHECK(normal_text(g, "per(-h) . per(h)", at(g, "Y")) == "id");
  CHECK(normal_text(g, "pull(g) . per(h)", at(g, "Y")) == "per(g*h) . pull(g)");
  CHECK(normal_text(g, "per(h) . push(f)", at(g, "Ybar")) == "push(f) . per(f*h)");
  CHECK(normal_text(g, "per(h) . push(f) . per(hb) . pull(g)", at(g, "Y")) == "push(f) . per(f*h+hb) . pull(g)");
}

TEST_CASE("normal form shapes") {
  Geometry g = load_geometry("f1.json");
  auto pulls = normalize(g, parse_expr(g, "lbi(a) . pull(d) . per(hb) . pull(f) . alis(M=h,u=a)", at(g, "Y")));
  REQUIRE(pulls.word.size() == 3);
  CHECK(pulls.word[0].kind == GenKind::Pull);
  CHECK(pulls.word[1].kind == GenKind::Pull);
  CHECK(pulls.word[2].is_alis());

  auto pushes = normalize(g, parse_expr(g, "per(h) . push(f) . lbi(a) . push(d) . per(hb)", at(g, "Ybar")));
  REQUIRE(pushes.word.size() == 3);
  CHECK(pushes.word[0].is_alis());
  CHECK(pushes.word[1].kind == GenKind::Push);
  CHECK(pushes.word[2].kind == GenKind::Push);
}

TEST_CASE("expression equality") {
  Geometry g = load_geometry("f1.json");
  auto d = at(g, "Y");
  CHECK(expr_equal(g, parse_expr(g, "lbi(a).lbi(a)", d), parse_expr(g, "id", d)));
  CHECK_FALSE(expr_equal(g, parse_expr(g, "per(h)", d), parse_expr(g, "per(-h)", d)));
  CHECK(expr_equal(g, parse_expr(g, "per(M1+M2)", d), parse_expr(g, "per(3h)", d)));
  CHECK(kind_of([&] { expr_equal(g, parse_expr(g, "id", d), parse_expr(g, "id", at(g, "Y", "h"))); }) ==
        ErrorKind::TypeMismatch);
}

TEST_CASE("random words: termination, idempotence, order independence") {
  std::mt19937 rng(20261017);
  for (const char* fx : {"f1.json", "torsion_pic.json"}) {
    Geometry g = load_geometry(fx);
    for (int trial = 0; trial < 150; ++trial) {
      auto e = random_expr(g, at(g, trial % 2 ? "Y" : "Ybar"), 1 + trial % 12, rng);
      NormalizeStats s1, s2;
      auto n1 = normalize(g, e, s1);
      auto n2 = normalize_randomized(g, e, rng(), s2);
      CHECK(n1.to_string() == n2.to_string());
      CHECK(n1.codomain() == e.codomain());
      CHECK(normalize(g, n1).to_string() == n1.to_string());
      CHECK(expr_equal(g, e, n1));
    }
  }
}

TEST_CASE("lax composition") {
  Geometry g = load_geometry("f1.json");
  auto y = g.scheme("Y"), yb = g.scheme("Ybar");
  auto f = g.morphism("f"), d = g.morphism("d");
  auto dom = at(g, "Y", "h");

  LineBundle fl = pull_bundle(*f, {y, dom.twist});
  AlignmentClass abar(fl, {yb, fl.cls + parse_pic(*yb, "2hb")}, parse_pic(*yb, "hb"), parse_unit(*yb, "a"));
  LineBundle dl = pull_bundle(*d, abar.target());
  AlignmentClass atil(dl, {yb, dl.cls + parse_pic(*yb, "-4hb")}, parse_pic(*yb, "-2hb"), yb->units.zero());
  LaxPull inner{f, abar}, outer{d, atil};

  LaxPull id_outer{Morphism::identity(yb), AlignmentClass::identity(abar.target())};
  CHECK(compose_lax(id_outer, inner).a == inner.a);

  LaxPull c = compose_lax(outer, inner);
  auto concat = typecheck(g, {make_pull(f), make_alis(abar), make_pull(d), make_alis(atil)}, dom);
  auto nf = normalize(g, concat);
  REQUIRE(nf.word.size() == 3);
  CHECK(nf.word[2].m == c.a.m());
  CHECK(nf.word[2].u == c.a.u());
  CHECK(lax_word(g, c, dom).codomain() == concat.codomain());

  // pushes: Push f[Ā] ∘ Push d[Ã]
  auto pdom = at(g, "Ybar", "hb");
  LineBundle l{yb, pdom.twist};
  LineBundle mid_target{yb, d->proper->omega + d->pic_pullback(parse_pic(*yb, "-hb"))};
  AlignmentClass pt(l, mid_target, solve_linear(GroupHom::doubling(yb->pic), mid_target.cls - l.cls)->particular,
                    parse_unit(*yb, "a"));
  LaxPush pin{d, pt};
  auto first = lax_word(g, pin, pdom);
  LineBundle after_d{yb, first.codomain().twist};
  LineBundle fy{yb, f->proper->omega + f->pic_pullback(parse_pic(*y, "3h"))};
  AlignmentClass pa(after_d, fy, solve_linear(GroupHom::doubling(yb->pic), fy.cls - after_d.cls)->particular, yb->units.zero());
  LaxPush pout{f, pa};
  LaxPush pc = compose_lax(pout, pin);
  REQUIRE(pc.f->proper);
  CHECK(pc.f->proper->omega == d->proper->omega + d->pic_pullback(f->proper->omega));
  auto pconcat = typecheck(g, {make_alis(pt), make_push(d), make_alis(pa), make_push(f)}, pdom);
  auto pnf = normalize(g, pconcat);
  REQUIRE(pnf.word.size() == 3);
  CHECK(pnf.word[0].m == pc.a.m());
  CHECK(pnf.word[0].u == pc.a.u());
  CHECK(lax_word(g, pc, pdom).codomain() == pconcat.codomain());
}
