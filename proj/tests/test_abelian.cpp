#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "wtc/abelian.hpp"
#include "wtc/error.hpp"

using namespace wtc;

namespace {

IntMatrix mat(std::vector<std::vector<long>> rows) {
  std::size_t cols = rows.empty() ? 0 : rows[0].size();
  std::vector<IntVector> r;
  for (auto& row : rows) {
    IntVector v;
    for (long x : row) v.emplace_back(x);
    r.push_back(v);
  }
  return IntMatrix::from_rows(r, cols);
}

IntVector iv(std::vector<long> xs) {
  IntVector v;
  for (long x : xs) v.emplace_back(x);
  return v;
}

// Determinant by cofactor expansion; fine for the tiny matrices used here.
Integer det(const IntMatrix& m) {
  std::size_t n = m.rows();
  if (n == 0) return 1;
  if (n == 1) return m(0, 0);
  Integer d = 0;
  for (std::size_t j = 0; j < n; ++j) {
    IntMatrix sub(n - 1, n - 1);
    for (std::size_t i = 1; i < n; ++i)
      for (std::size_t c = 0, k = 0; c < n; ++c)
        if (c != j) sub(i - 1, k++) = m(i, c);
    Integer t = m(0, j) * det(sub);
    d += (j % 2 == 0) ? t : Integer(-t);
  }
  return d;
}

void subsets(std::size_t n, std::size_t k, std::size_t start, std::vector<std::size_t>& cur,
             std::vector<std::vector<std::size_t>>& out) {
  if (cur.size() == k) {
    out.push_back(cur);
    return;
  }
  for (std::size_t i = start; i < n; ++i) {
    cur.push_back(i);
    subsets(n, k, i + 1, cur, out);
    cur.pop_back();
  }
}

// Determinantal divisors: gcd of all k x k minors; invariant factor k is D_k / D_{k-1}.
IntVector factors_by_minors(const IntMatrix& m) {
  IntVector out;
  Integer prev = 1;
  std::size_t n = std::min(m.rows(), m.cols());
  for (std::size_t k = 1; k <= n; ++k) {
    std::vector<std::vector<std::size_t>> rs, cs;
    std::vector<std::size_t> cur;
    subsets(m.rows(), k, 0, cur, rs);
    subsets(m.cols(), k, 0, cur, cs);
    Integer g = 0;
    for (auto& r : rs)
      for (auto& c : cs) {
        IntMatrix sub(k, k);
        for (std::size_t i = 0; i < k; ++i)
          for (std::size_t j = 0; j < k; ++j) sub(i, j) = m(r[i], c[j]);
        Integer d = det(sub);
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), d.get_mpz_t());
      }
    if (g == 0) {
      out.emplace_back(0);
      prev = 0;
    } else {
      out.push_back(prev == 0 ? Integer(0) : Integer(g / prev));
      prev = g;
    }
  }
  return out;
}

IntMatrix random_matrix(std::mt19937& rng, std::size_t r, std::size_t c, int bound) {
  std::uniform_int_distribution<int> d(-bound, bound);
  IntMatrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = d(rng);
  return m;
}

}  // namespace

TEST_CASE("smith normal form matches determinantal divisors") {
  SmithForm s = smith_normalize(mat({{2, 4}, {6, 8}}));
  CHECK(s.factors == factors_by_minors(mat({{2, 4}, {6, 8}})));
  CHECK(s.factors == iv({2, 4}));
  CHECK(smith_normalize(mat({{1}})).factors == iv({1}));
  CHECK(smith_normalize(mat({{0}})).factors == iv({0}));
  CHECK(FgAbGroup::from_relations(mat({{0}}), 1)->describe() == "Z");

  std::mt19937 rng(7);
  for (int t = 0; t < 200; ++t) {
    std::size_t r = 1 + rng() % 3, c = 1 + rng() % 3;
    IntMatrix m = random_matrix(rng, r, c, 6);
    SmithForm f = smith_normalize(m);
    CHECK(f.left * m * f.right == f.diagonal);
    CHECK(f.right * f.right_inverse == IntMatrix::identity(c));
    CHECK(f.diagonal.is_diagonal());
    CHECK(f.factors == factors_by_minors(m));
    SmithForm again = smith_normalize(f.diagonal);
    CHECK(again.factors == f.factors);
  }
}

TEST_CASE("group from relations reproduces presentation") {
  GroupPtr g = FgAbGroup::from_relations(mat({{2, 4}, {6, 8}}), 2);
  CHECK(g->invariants() == iv({2, 4}));
  GroupPtr h = FgAbGroup::from_relations(mat({{1, 1}}), 2);
  CHECK(h->describe() == "Z");
  // relation rows map to zero, generators round-trip through canonical coordinates
  std::mt19937 rng(3);
  for (int t = 0; t < 100; ++t) {
    std::size_t k = rng() % 3, n = 1 + rng() % 3;
    IntMatrix rel = random_matrix(rng, k, n, 5);
    GroupPtr grp = FgAbGroup::from_relations(rel, n);
    for (std::size_t i = 0; i < k; ++i) CHECK(GroupElement::from_presentation(grp, rel.row(i)).is_zero());
    for (std::size_t i = 0; i < n; ++i) {
      IntVector e(n, Integer(0));
      e[i] = 1;
      GroupElement x = GroupElement::from_presentation(grp, e);
      CHECK(GroupElement::from_presentation(grp, grp->presentation_from_canonical(x.coords())) == x);
    }
  }
}

TEST_CASE("hom_analyze basic cases") {
  GroupPtr z = FgAbGroup::from_invariants(iv({0}));
  auto a = hom_analyze(GroupHom::doubling(z));
  CHECK(a.kernel.group->is_trivial());
  CHECK(a.cokernel->invariants() == iv({2}));

  GroupPtr z2 = FgAbGroup::from_invariants(iv({2}));
  auto b = hom_analyze(GroupHom::zero(z, z2));
  CHECK(b.cokernel->invariants() == iv({2}));
  CHECK(b.kernel.group->invariants() == iv({0}));

  GroupPtr zz2 = FgAbGroup::from_invariants(iv({0, 2}));
  auto inc = GroupHom::from_generator_images(z, zz2, {GroupElement::from_presentation(zz2, iv({1, 0}))});
  auto c = hom_analyze(inc);
  CHECK(c.cokernel->invariants() == iv({2}));
  CHECK(c.kernel.group->is_trivial());

  CHECK_THROWS_AS(GroupHom(z2, z, mat({{1}})), Error);
  try {
    GroupHom(z2, z, mat({{1}}));
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IllFormedHom);
  }
}

TEST_CASE("hom_analyze agrees with enumeration on finite groups") {
  std::mt19937 rng(11);
  const std::vector<IntVector> shapes = {iv({2}), iv({4}), iv({2, 2}), iv({2, 4}), iv({3}), iv({6}), iv({2, 6})};
  for (int t = 0; t < 150; ++t) {
    GroupPtr s = FgAbGroup::from_invariants(shapes[rng() % shapes.size()]);
    GroupPtr g = FgAbGroup::from_invariants(shapes[rng() % shapes.size()]);
    // build a random well-defined hom by choosing images of the canonical generators
    std::vector<GroupElement> imgs;
    auto elems = enumerate_elements(g);
    for (std::size_t i = 0; i < s->presentation_generators(); ++i) {
      GroupElement x = elems[rng() % elems.size()];
      imgs.push_back(x);
    }
    GroupHom f;
    try {
      f = GroupHom::from_generator_images(s, g, imgs);
    } catch (const Error&) {
      continue;
    }
    auto an = hom_analyze(f);
    std::set<IntVector> image, kernel;
    for (auto& x : enumerate_elements(s)) {
      image.insert(f(x).coords());
      if (f(x).is_zero()) kernel.insert(x.coords());
    }
    CHECK(an.kernel.group->torsion_order() == Integer(kernel.size()));
    CHECK(an.image.group->torsion_order() == Integer(image.size()));
    CHECK(an.cokernel->torsion_order() * Integer(image.size()) == g->torsion_order());
    for (auto& k : enumerate_elements(an.kernel.group)) CHECK(f(an.kernel.inclusion(k)).is_zero());
    for (auto& x : enumerate_elements(s)) CHECK(an.projection(f(x)).is_zero());
  }
}

TEST_CASE("two torsion and mod 2 reduction") {
  auto t = two_torsion(FgAbGroup::from_invariants(iv({0, 4})));
  CHECK(t.group->invariants() == iv({2}));
  CHECK(t.inclusion(GroupElement::generator(t.group, 0)).coords() == iv({2, 0}));
  CHECK(two_torsion(FgAbGroup::from_invariants(iv({3}))).group->is_trivial());
  CHECK(two_torsion(FgAbGroup::from_invariants(iv({2, 2}))).group->invariants() == iv({2, 2}));

  CHECK(mod2_reduction(FgAbGroup::from_invariants(iv({0}))).dim() == 1);
  CHECK(mod2_reduction(FgAbGroup::from_invariants(iv({3}))).dim() == 0);
  CHECK(mod2_reduction(FgAbGroup::from_invariants(iv({4}))).dim() == 1);

  // randomized re-presentation: Z/2 + Z/4 + Z given through a unimodular change of generators
  std::mt19937 rng(5);
  for (int t2 = 0; t2 < 50; ++t2) {
    IntMatrix diag = mat({{2, 0, 0}, {0, 4, 0}});
    IntMatrix u = IntMatrix::identity(3);
    for (int k = 0; k < 6; ++k) {
      std::size_t a = rng() % 3, b = rng() % 3;
      if (a != b) u.add_col_multiple(a, b, Integer(int(rng() % 5) - 2));
    }
    GroupPtr g = FgAbGroup::from_relations(diag * u, 3);
    CHECK(g->invariants() == iv({2, 4, 0}));
    CHECK(two_torsion(g).group->invariants() == iv({2, 2}));
    CHECK(mod2_reduction(g).dim() == 3);
    // 2-torsion elements are exactly those x with 2x = 0 (enumerate the torsion part)
    auto tt = two_torsion(g);
    std::size_t count = 0;
    for (long a = 0; a < 2; ++a)
      for (long b = 0; b < 4; ++b) {
        GroupElement x(g, iv({a, b, 0}));
        if (x.times(2).is_zero()) ++count;
      }
    CHECK(Integer(count) == tt.group->torsion_order());
  }
}

TEST_CASE("solve_linear canonical solutions") {
  GroupPtr z4 = FgAbGroup::from_invariants(iv({4}));
  auto dbl = GroupHom::doubling(z4);
  GroupElement two(z4, iv({2}));
  auto sol = solve_linear(dbl, two);
  REQUIRE(sol);
  CHECK(sol->particular.coords() == iv({1}));
  // oracle: enumerate all x in Z/4
  std::vector<IntVector> brute;
  for (auto& x : enumerate_elements(z4))
    if (dbl(x) == two) brute.push_back(x.coords());
  std::vector<IntVector> got;
  for (auto& x : solution_set(dbl, two)) got.push_back(x.coords());
  CHECK(got == brute);
  CHECK(brute.front() == sol->particular.coords());

  GroupPtr z = FgAbGroup::from_invariants(iv({0}));
  CHECK_FALSE(solve_linear(GroupHom::doubling(z), GroupElement(z, iv({1}))));
  CHECK(solve_linear(GroupHom::doubling(z), GroupElement(z, iv({6})))->particular.coords() == iv({3}));

  // lexicographic minimality against brute force on Z/2 + Z/4 + Z/6
  GroupPtr g = FgAbGroup::from_invariants(iv({2, 4, 6}));
  std::mt19937 rng(2);
  auto elems = enumerate_elements(g);
  for (int t = 0; t < 60; ++t) {
    std::vector<GroupElement> imgs;
    for (int i = 0; i < 3; ++i) imgs.push_back(elems[rng() % elems.size()]);
    GroupHom f;
    try {
      f = GroupHom::from_generator_images(g, g, imgs);
    } catch (const Error&) {
      continue;
    }
    GroupElement target = elems[rng() % elems.size()];
    std::optional<GroupElement> best;
    for (auto& x : elems)
      if (f(x) == target && (!best || x < *best)) best = x;
    auto s = solve_linear(f, target);
    CHECK(bool(s) == bool(best));
    if (s && best) CHECK(s->particular == *best);
  }
}

TEST_CASE("verify_short_exact") {
  GroupPtr zero = FgAbGroup::trivial();
  GroupPtr z2 = FgAbGroup::from_invariants(iv({2}));
  GroupPtr v = FgAbGroup::from_invariants(iv({2, 2}));
  CHECK(verify_short_exact(GroupHom::zero(zero, z2), GroupHom::identity(z2)).exact());

  auto inc = GroupHom(z2, v, mat({{1}, {0}}));
  auto proj = GroupHom(v, z2, mat({{0, 1}}));
  CHECK(verify_short_exact(inc, proj).exact());

  auto bad = GroupHom(v, z2, mat({{1, 1}}));
  auto r = verify_short_exact(inc, bad);
  CHECK_FALSE(r.composite_zero);
  REQUIRE(r.composite_witness);
  CHECK_FALSE(bad(inc(*r.composite_witness)).is_zero());

  auto r2 = verify_short_exact(GroupHom::zero(z2, v), proj);
  CHECK_FALSE(r2.injective);
  CHECK_FALSE(r2.middle_exact);
  REQUIRE(r2.middle_witness);
  CHECK(proj(*r2.middle_witness).is_zero());
  auto r3 = verify_short_exact(inc, GroupHom::zero(v, z2));
  CHECK_FALSE(r3.surjective);
}

TEST_CASE("enumeration limits") {
  CHECK_THROWS_AS(enumerate_elements(FgAbGroup::from_invariants(iv({0}))), Error);
  CHECK(enumerate_elements(FgAbGroup::from_invariants(iv({2, 2}))).size() == 4);
  CHECK(enumerate_elements(FgAbGroup::trivial()).size() == 1);
}
