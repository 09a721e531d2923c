#pragma once

// Exact arithmetic for finitely generated abelian groups.
//
// A group is presented as Z^n modulo the row span of an integer relation
// matrix. Its Smith normal form fixes a canonical generating set: one
// generator per invariant factor d != 1, ordered so that d_1 | d_2 | ... with
// free factors (d = 0) last. Elements are stored in canonical coordinates,
// each reduced into [0, d_i) when d_i > 0.

#include <gmpxx.h>

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wtc/f2.hpp"

namespace wtc {

using Integer = mpz_class;
using IntVector = std::vector<Integer>;

class IntMatrix {
 public:
  IntMatrix() = default;
  IntMatrix(std::size_t rows, std::size_t cols);

  static IntMatrix identity(std::size_t n);
  static IntMatrix from_rows(const std::vector<IntVector>& rows, std::size_t cols);
  static IntMatrix from_columns(const std::vector<IntVector>& cols, std::size_t rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  Integer& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Integer& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  IntVector row(std::size_t i) const;
  IntVector col(std::size_t j) const;

  IntMatrix operator*(const IntMatrix& rhs) const;
  IntVector operator*(const IntVector& v) const;
  bool operator==(const IntMatrix& rhs) const;

  IntMatrix transposed() const;
  bool is_diagonal() const;

  void swap_rows(std::size_t a, std::size_t b);
  void swap_cols(std::size_t a, std::size_t b);
  /// row[dst] += q * row[src]
  void add_row_multiple(std::size_t dst, std::size_t src, const Integer& q);
  /// col[dst] += q * col[src]
  void add_col_multiple(std::size_t dst, std::size_t src, const Integer& q);
  void negate_row(std::size_t r);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Integer> data_;
};

/// diagonal = left * input * right with left, right unimodular.
struct SmithForm {
  IntMatrix diagonal;
  IntMatrix left;
  IntMatrix right;
  IntMatrix right_inverse;
  IntVector factors;  // min(rows, cols) diagonal entries, zeros last
  std::size_t rank = 0;
};

SmithForm smith_normalize(const IntMatrix& m);

/// Basis of {x in Z^cols : m x = 0}, one basis vector per column.
IntMatrix integer_kernel(const IntMatrix& m);

/// Row Hermite normal form of the lattice spanned by `rows`; zero rows dropped.
/// Pivots are positive and entries above each pivot lie in [0, pivot).
std::vector<IntVector> hermite_rows(std::vector<IntVector> rows, std::size_t cols);

class FgAbGroup;
using GroupPtr = std::shared_ptr<const FgAbGroup>;

class FgAbGroup {
 public:
  /// Z^generators modulo the row span of `relations` (k x generators).
  static GroupPtr from_relations(const IntMatrix& relations, std::size_t generators);
  /// Direct sum of cyclic groups Z/d (d = 0 gives Z); presentation generators
  /// are the given cyclic factors in order.
  static GroupPtr from_invariants(const IntVector& invariants);
  static GroupPtr trivial();
  /// (Z/2)^dim, matching an F2 space.
  static GroupPtr elementary_two(std::size_t dim);

  std::size_t rank() const { return invariants_.size(); }
  const IntVector& invariants() const { return invariants_; }
  std::size_t presentation_generators() const { return to_canonical_.rows(); }
  const IntMatrix& presentation() const { return presentation_; }

  bool is_trivial() const { return invariants_.empty(); }
  bool is_finite() const;
  std::size_t free_rank() const;
  /// Order of the torsion subgroup.
  Integer torsion_order() const;

  IntVector reduce(IntVector canonical) const;
  IntVector canonical_from_presentation(const IntVector& x) const;
  /// A presentation-coordinate representative of a canonical element.
  IntVector presentation_from_canonical(const IntVector& y) const;

  std::string describe() const;

 private:
  FgAbGroup() = default;

  IntMatrix presentation_;
  IntVector invariants_;
  IntMatrix to_canonical_;    // presentation gens x canonical gens
  IntMatrix from_canonical_;  // canonical gens x presentation gens
};

class GroupElement {
 public:
  GroupElement() = default;
  GroupElement(GroupPtr group, IntVector canonical);

  static GroupElement zero(GroupPtr group);
  static GroupElement generator(GroupPtr group, std::size_t i);
  static GroupElement from_presentation(GroupPtr group, const IntVector& x);

  const GroupPtr& group() const { return group_; }
  const IntVector& coords() const { return coords_; }
  bool is_zero() const;

  GroupElement operator+(const GroupElement& o) const;
  GroupElement operator-(const GroupElement& o) const;
  GroupElement operator-() const;
  GroupElement times(const Integer& k) const;

  bool operator==(const GroupElement& o) const;
  bool operator!=(const GroupElement& o) const { return !(*this == o); }
  /// Lexicographic on canonical coordinates.
  bool operator<(const GroupElement& o) const;

  std::string to_string() const;

 private:
  void check_same_group(const GroupElement& o) const;

  GroupPtr group_;
  IntVector coords_;
};

/// Homomorphism in canonical coordinates: matrix is target.rank() x source.rank().
class GroupHom {
 public:
  GroupHom() = default;
  /// Throws IllFormedHom if a source relation does not map into the target relations.
  GroupHom(GroupPtr source, GroupPtr target, IntMatrix matrix);

  /// Images of the source presentation generators. Throws IllFormedHom if
  /// a presentation relation is not sent to zero.
  static GroupHom from_generator_images(GroupPtr source, GroupPtr target,
                                        const std::vector<GroupElement>& images);
  static GroupHom identity(GroupPtr group);
  static GroupHom zero(GroupPtr source, GroupPtr target);
  static GroupHom doubling(GroupPtr group);

  const GroupPtr& source() const { return source_; }
  const GroupPtr& target() const { return target_; }
  const IntMatrix& matrix() const { return matrix_; }

  GroupElement operator()(const GroupElement& x) const;
  /// this ∘ inner
  GroupHom after(const GroupHom& inner) const;
  GroupHom operator+(const GroupHom& o) const;

 private:
  GroupPtr source_;
  GroupPtr target_;
  IntMatrix matrix_;
};

struct Subgroup {
  GroupPtr group;
  GroupHom inclusion;
};

/// Subgroup of `parent` generated by the given elements.
Subgroup generated_subgroup(const GroupPtr& parent, const std::vector<GroupElement>& gens);

struct HomAnalysis {
  Subgroup kernel;
  Subgroup image;
  GroupPtr cokernel;
  GroupHom projection;  // target -> cokernel
};

HomAnalysis hom_analyze(const GroupHom& f);

Subgroup two_torsion(const GroupPtr& g);

/// G/2G as an F2 space. Coordinates of the F2 space are the canonical
/// coordinates of G whose invariant factor is even or zero.
struct Mod2Reduction {
  GroupPtr group;
  std::vector<std::size_t> even_coordinates;

  std::size_t dim() const { return even_coordinates.size(); }
  F2Vec project(const GroupElement& x) const;
  /// Representative with coordinates in {0, 1}.
  GroupElement lift(const F2Vec& v) const;
};

Mod2Reduction mod2_reduction(const GroupPtr& g);
/// The map induced by f on G/2G -> H/2H.
F2Map mod2_map(const GroupHom& f);

struct LinearSolution {
  GroupElement particular;  // lexicographically smallest nonnegative preimage
  Subgroup kernel;
};

std::optional<LinearSolution> solve_linear(const GroupHom& f, const GroupElement& target);

/// All elements of a finite group in lexicographic order. Throws
/// NotEnumerable for infinite groups or groups larger than `limit`.
std::vector<GroupElement> enumerate_elements(const GroupPtr& g, std::size_t limit = 1u << 16);

/// Full preimage of `target` under f (requires finite kernel).
std::vector<GroupElement> solution_set(const GroupHom& f, const GroupElement& target,
                                       std::size_t limit = 1u << 16);

/// Short sequence 0 -> A -f-> B -g-> C -> 0.
struct ExactnessReport {
  bool injective = true;
  bool composite_zero = true;
  bool middle_exact = true;
  bool surjective = true;
  std::optional<GroupElement> injectivity_witness;  // nonzero kernel element of f
  std::optional<GroupElement> composite_witness;    // a in A with g(f(a)) != 0
  std::optional<GroupElement> middle_witness;       // b in ker g outside im f
  std::optional<GroupElement> surjectivity_witness; // c in C outside im g

  bool exact() const { return injective && composite_zero && middle_exact && surjective; }
};

ExactnessReport verify_short_exact(const GroupHom& f, const GroupHom& g);

/// F2 map as a homomorphism between elementary abelian 2-groups of matching rank.
GroupHom as_group_hom(const F2Map& map, GroupPtr source, GroupPtr target);

}  // namespace wtc
