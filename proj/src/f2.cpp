#include "wtc/f2.hpp"

#include <cassert>
#include <stdexcept>

namespace wtc {

F2Vec F2Space::basis(std::size_t i) const {
  F2Vec v = zero();
  v.at(i) = 1;
  return v;
}

F2Space F2Space::anonymous(std::size_t dim, const std::string& prefix) {
  F2Space space;
  for (std::size_t i = 0; i < dim; ++i) space.labels.push_back(prefix + std::to_string(i));
  return space;
}

F2Map::F2Map(std::size_t source_dim, std::size_t target_dim, std::vector<F2Vec> columns)
    : source_dim_(source_dim), target_dim_(target_dim), columns_(std::move(columns)) {
  if (columns_.size() != source_dim_) throw std::invalid_argument("F2Map: wrong number of columns");
  for (auto& c : columns_) {
    if (c.size() != target_dim_) throw std::invalid_argument("F2Map: column of wrong length");
    for (auto& b : c) b &= 1;
  }
}

F2Map F2Map::identity(std::size_t dim) {
  std::vector<F2Vec> cols(dim, F2Vec(dim, 0));
  for (std::size_t i = 0; i < dim; ++i) cols[i][i] = 1;
  return F2Map(dim, dim, std::move(cols));
}

F2Map F2Map::zero(std::size_t source_dim, std::size_t target_dim) {
  return F2Map(source_dim, target_dim, std::vector<F2Vec>(source_dim, F2Vec(target_dim, 0)));
}

F2Vec F2Map::apply(const F2Vec& v) const {
  if (v.size() != source_dim_) throw std::invalid_argument("F2Map::apply: dimension mismatch");
  F2Vec out(target_dim_, 0);
  for (std::size_t i = 0; i < source_dim_; ++i)
    if (v[i])
      for (std::size_t j = 0; j < target_dim_; ++j) out[j] ^= columns_[i][j];
  return out;
}

F2Map F2Map::after(const F2Map& inner) const {
  if (inner.target_dim_ != source_dim_) throw std::invalid_argument("F2Map::after: not composable");
  std::vector<F2Vec> cols;
  cols.reserve(inner.source_dim_);
  for (auto& c : inner.columns_) cols.push_back(apply(c));
  return F2Map(inner.source_dim_, target_dim_, std::move(cols));
}

namespace f2 {

F2Vec add(const F2Vec& a, const F2Vec& b) {
  assert(a.size() == b.size());
  F2Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] ^ b[i];
  return out;
}

bool is_zero(const F2Vec& v) {
  for (auto b : v)
    if (b) return false;
  return true;
}

bool Echelon::contains(const F2Vec& v) const { return is_zero(reduce(v)); }

F2Vec Echelon::reduce(F2Vec v) const {
  for (std::size_t r = 0; r < rows.size(); ++r)
    if (v[pivots[r]]) v = add(v, rows[r]);
  return v;
}

Echelon echelon(const std::vector<F2Vec>& vectors, std::size_t dim) {
  Echelon e;
  e.dim = dim;
  std::vector<F2Vec> work = vectors;
  std::size_t row = 0;
  for (std::size_t col = 0; col < dim && row < work.size(); ++col) {
    std::size_t pick = row;
    while (pick < work.size() && !work[pick][col]) ++pick;
    if (pick == work.size()) continue;
    std::swap(work[row], work[pick]);
    for (std::size_t r = 0; r < work.size(); ++r)
      if (r != row && work[r][col]) work[r] = add(work[r], work[row]);
    e.rows.push_back(work[row]);
    e.pivots.push_back(col);
    ++row;
  }
  return e;
}

std::size_t rank(const F2Map& map) { return echelon(map.columns(), map.target_dim()).rank(); }

std::vector<F2Vec> kernel_basis(const F2Map& map) {
  // Row reduce the augmented system [columns | identity] so combinations of
  // source basis vectors with zero image are tracked.
  const std::size_t n = map.source_dim(), m = map.target_dim();
  std::vector<F2Vec> aug;
  for (std::size_t i = 0; i < n; ++i) {
    F2Vec v(m + n, 0);
    for (std::size_t j = 0; j < m; ++j) v[j] = map.columns()[i][j];
    v[m + i] = 1;
    aug.push_back(std::move(v));
  }
  std::size_t row = 0;
  for (std::size_t col = 0; col < m && row < aug.size(); ++col) {
    std::size_t pick = row;
    while (pick < aug.size() && !aug[pick][col]) ++pick;
    if (pick == aug.size()) continue;
    std::swap(aug[row], aug[pick]);
    for (std::size_t r = 0; r < aug.size(); ++r)
      if (r != row && aug[r][col]) aug[r] = add(aug[r], aug[row]);
    ++row;
  }
  std::vector<F2Vec> basis;
  for (std::size_t r = row; r < aug.size(); ++r) basis.emplace_back(aug[r].begin() + m, aug[r].end());
  return echelon(basis, n).rows;
}

std::optional<F2Vec> solve(const F2Map& map, const F2Vec& target) {
  const std::size_t n = map.source_dim(), m = map.target_dim();
  if (target.size() != m) throw std::invalid_argument("f2::solve: dimension mismatch");
  // Echelonize the image while recording which source combination produced each row.
  std::vector<std::pair<F2Vec, F2Vec>> rows;
  for (std::size_t i = 0; i < n; ++i) {
    F2Vec tag(n, 0);
    tag[i] = 1;
    rows.emplace_back(map.columns()[i], tag);
  }
  std::vector<std::size_t> pivots;
  std::size_t row = 0;
  for (std::size_t col = 0; col < m && row < rows.size(); ++col) {
    std::size_t pick = row;
    while (pick < rows.size() && !rows[pick].first[col]) ++pick;
    if (pick == rows.size()) continue;
    std::swap(rows[row], rows[pick]);
    for (std::size_t r = 0; r < rows.size(); ++r)
      if (r != row && rows[r].first[col]) {
        rows[r].first = add(rows[r].first, rows[row].first);
        rows[r].second = add(rows[r].second, rows[row].second);
      }
    pivots.push_back(col);
    ++row;
  }
  F2Vec rest = target;
  F2Vec x(n, 0);
  for (std::size_t r = 0; r < pivots.size(); ++r)
    if (rest[pivots[r]]) {
      rest = add(rest, rows[r].first);
      x = add(x, rows[r].second);
    }
  if (!is_zero(rest)) return std::nullopt;
  return echelon(kernel_basis(map), n).reduce(x);
}

std::vector<F2Vec> enumerate(std::size_t dim) {
  if (dim > 20) throw std::length_error("f2::enumerate: dimension too large");
  std::vector<F2Vec> out;
  const std::size_t count = std::size_t{1} << dim;
  out.reserve(count);
  for (std::size_t code = 0; code < count; ++code) {
    F2Vec v(dim, 0);
    // coordinate 0 is the most significant so codes come out in lex order
    for (std::size_t i = 0; i < dim; ++i) v[i] = (code >> (dim - 1 - i)) & 1;
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace f2
}  // namespace wtc
