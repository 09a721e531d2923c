#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace wtc {

/// Vector over F2, one byte per coordinate (always 0 or 1).
using F2Vec = std::vector<std::uint8_t>;

/// A finite dimensional F2 vector space with named basis vectors. Used for
/// unit groups modulo squares, where the basis labels name units.
struct F2Space {
  std::vector<std::string> labels;

  std::size_t dim() const { return labels.size(); }
  F2Vec zero() const { return F2Vec(labels.size(), 0); }
  F2Vec basis(std::size_t i) const;
  static F2Space anonymous(std::size_t dim, const std::string& prefix = "e");
};

/// Linear map given by the images of the source basis vectors.
class F2Map {
 public:
  F2Map() = default;
  F2Map(std::size_t source_dim, std::size_t target_dim, std::vector<F2Vec> columns);

  static F2Map identity(std::size_t dim);
  static F2Map zero(std::size_t source_dim, std::size_t target_dim);

  std::size_t source_dim() const { return source_dim_; }
  std::size_t target_dim() const { return target_dim_; }
  const std::vector<F2Vec>& columns() const { return columns_; }

  F2Vec apply(const F2Vec& v) const;
  /// this ∘ inner
  F2Map after(const F2Map& inner) const;

  bool operator==(const F2Map&) const = default;

 private:
  std::size_t source_dim_ = 0;
  std::size_t target_dim_ = 0;
  std::vector<F2Vec> columns_;
};

namespace f2 {

F2Vec add(const F2Vec& a, const F2Vec& b);
bool is_zero(const F2Vec& v);

/// Reduced row echelon form of a span; pivots are leading (smallest) indices.
struct Echelon {
  std::size_t dim = 0;
  std::vector<F2Vec> rows;
  std::vector<std::size_t> pivots;

  std::size_t rank() const { return rows.size(); }
  bool contains(const F2Vec& v) const;
  /// Lexicographically smallest element of v + span.
  F2Vec reduce(F2Vec v) const;
};

Echelon echelon(const std::vector<F2Vec>& vectors, std::size_t dim);
std::size_t rank(const F2Map& map);
std::vector<F2Vec> kernel_basis(const F2Map& map);
/// Lexicographically smallest x with map(x) = target, if any.
std::optional<F2Vec> solve(const F2Map& map, const F2Vec& target);
/// All vectors of F2^dim in lexicographic order.
std::vector<F2Vec> enumerate(std::size_t dim);

}  // namespace f2
}  // namespace wtc
