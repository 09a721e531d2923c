#include "wtc/abelian.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "wtc/error.hpp"

namespace wtc {
namespace {

Integer floor_div(const Integer& a, const Integer& b) {
  Integer q;
  mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return q;
}

Integer floor_mod(const Integer& a, const Integer& b) {
  Integer r;
  mpz_fdiv_r(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return r;
}

bool all_zero(const IntVector& v) {
  return std::all_of(v.begin(), v.end(), [](const Integer& x) { return x == 0; });
}

std::string vector_string(const IntVector& v) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i].get_str();
  os << ']';
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------- IntMatrix

IntMatrix::IntMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, Integer(0)) {}

IntMatrix IntMatrix::identity(std::size_t n) {
  IntMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

IntMatrix IntMatrix::from_rows(const std::vector<IntVector>& rows, std::size_t cols) {
  IntMatrix m(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) throw std::invalid_argument("IntMatrix::from_rows: ragged rows");
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

IntMatrix IntMatrix::from_columns(const std::vector<IntVector>& cols, std::size_t rows) {
  IntMatrix m(rows, cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (cols[j].size() != rows) throw std::invalid_argument("IntMatrix::from_columns: ragged columns");
    for (std::size_t i = 0; i < rows; ++i) m(i, j) = cols[j][i];
  }
  return m;
}

IntVector IntMatrix::row(std::size_t i) const {
  return IntVector(data_.begin() + i * cols_, data_.begin() + (i + 1) * cols_);
}

IntVector IntMatrix::col(std::size_t j) const {
  IntVector v(rows_);
  for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
  return v;
}

IntMatrix IntMatrix::operator*(const IntMatrix& rhs) const {
  if (cols_ != rhs.rows_) throw std::invalid_argument("IntMatrix: shape mismatch in product");
  IntMatrix out(rows_, rhs.cols_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t k = 0; k < cols_; ++k) {
      const Integer& a = (*this)(i, k);
      if (a == 0) continue;
      for (std::size_t j = 0; j < rhs.cols_; ++j) out(i, j) += a * rhs(k, j);
    }
  return out;
}

IntVector IntMatrix::operator*(const IntVector& v) const {
  if (cols_ != v.size()) throw std::invalid_argument("IntMatrix: shape mismatch in apply");
  IntVector out(rows_, Integer(0));
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t k = 0; k < cols_; ++k) out[i] += (*this)(i, k) * v[k];
  return out;
}

bool IntMatrix::operator==(const IntMatrix& rhs) const {
  return rows_ == rhs.rows_ && cols_ == rhs.cols_ && data_ == rhs.data_;
}

IntMatrix IntMatrix::transposed() const {
  IntMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

bool IntMatrix::is_diagonal() const {
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j)
      if (i != j && (*this)(i, j) != 0) return false;
  return true;
}

void IntMatrix::swap_rows(std::size_t a, std::size_t b) {
  if (a == b) return;
  for (std::size_t j = 0; j < cols_; ++j) std::swap((*this)(a, j), (*this)(b, j));
}

void IntMatrix::swap_cols(std::size_t a, std::size_t b) {
  if (a == b) return;
  for (std::size_t i = 0; i < rows_; ++i) std::swap((*this)(i, a), (*this)(i, b));
}

void IntMatrix::add_row_multiple(std::size_t dst, std::size_t src, const Integer& q) {
  if (q == 0) return;
  for (std::size_t j = 0; j < cols_; ++j) (*this)(dst, j) += q * (*this)(src, j);
}

void IntMatrix::add_col_multiple(std::size_t dst, std::size_t src, const Integer& q) {
  if (q == 0) return;
  for (std::size_t i = 0; i < rows_; ++i) (*this)(i, dst) += q * (*this)(i, src);
}

void IntMatrix::negate_row(std::size_t r) {
  for (std::size_t j = 0; j < cols_; ++j) (*this)(r, j) = -(*this)(r, j);
}

// ------------------------------------------------------------- Smith / HNF

SmithForm smith_normalize(const IntMatrix& m) {
  const std::size_t rows = m.rows(), cols = m.cols();
  IntMatrix a = m;
  IntMatrix u = IntMatrix::identity(rows);
  IntMatrix v = IntMatrix::identity(cols);
  IntMatrix vinv = IntMatrix::identity(cols);

  // Column operation col[dst] += q col[src] on a and v; the inverse row
  // operation row[src] -= q row[dst] keeps vinv = v^{-1}.
  auto col_op = [&](std::size_t dst, std::size_t src, const Integer& q) {
    a.add_col_multiple(dst, src, q);
    v.add_col_multiple(dst, src, q);
    vinv.add_row_multiple(src, dst, -q);
  };
  auto col_swap = [&](std::size_t x, std::size_t y) {
    a.swap_cols(x, y);
    v.swap_cols(x, y);
    vinv.swap_rows(x, y);
  };
  auto row_op = [&](std::size_t dst, std::size_t src, const Integer& q) {
    a.add_row_multiple(dst, src, q);
    u.add_row_multiple(dst, src, q);
  };
  auto row_swap = [&](std::size_t x, std::size_t y) {
    a.swap_rows(x, y);
    u.swap_rows(x, y);
  };

  const std::size_t diag = std::min(rows, cols);
  std::size_t rank = 0;
  for (std::size_t t = 0; t < diag; ++t) {
    bool found_any = false;
    for (;;) {
      // smallest nonzero |entry| in the trailing block becomes the pivot
      std::size_t pi = rows, pj = cols;
      Integer best;
      for (std::size_t i = t; i < rows; ++i)
        for (std::size_t j = t; j < cols; ++j)
          if (a(i, j) != 0 && (pi == rows || abs(a(i, j)) < best)) {
            best = abs(a(i, j));
            pi = i;
            pj = j;
          }
      if (pi == rows) break;
      found_any = true;
      row_swap(t, pi);
      col_swap(t, pj);

      bool dirty = false;
      for (std::size_t i = t + 1; i < rows; ++i)
        if (a(i, t) != 0) {
          Integer q;
          mpz_tdiv_q(q.get_mpz_t(), a(i, t).get_mpz_t(), a(t, t).get_mpz_t());
          row_op(i, t, -q);
          if (a(i, t) != 0) dirty = true;
        }
      for (std::size_t j = t + 1; j < cols; ++j)
        if (a(t, j) != 0) {
          Integer q;
          mpz_tdiv_q(q.get_mpz_t(), a(t, j).get_mpz_t(), a(t, t).get_mpz_t());
          col_op(j, t, -q);
          if (a(t, j) != 0) dirty = true;
        }
      if (dirty) continue;

      // divisibility: fold an offending row into the pivot row and retry
      std::size_t bad = rows;
      for (std::size_t i = t + 1; i < rows && bad == rows; ++i)
        for (std::size_t j = t + 1; j < cols; ++j)
          if (a(i, j) % a(t, t) != 0) {
            bad = i;
            break;
          }
      if (bad == rows) break;
      row_op(t, bad, Integer(1));
    }
    if (!found_any) break;
    if (a(t, t) < 0) {
      a.negate_row(t);
      u.negate_row(t);
    }
    ++rank;
  }

  SmithForm s;
  s.factors.resize(diag);
  for (std::size_t i = 0; i < diag; ++i) s.factors[i] = a(i, i);
  s.diagonal = std::move(a);
  s.left = std::move(u);
  s.right = std::move(v);
  s.right_inverse = std::move(vinv);
  s.rank = rank;
  return s;
}

IntMatrix integer_kernel(const IntMatrix& m) {
  SmithForm s = smith_normalize(m);
  const std::size_t n = m.cols();
  std::vector<IntVector> basis;
  for (std::size_t j = s.rank; j < n; ++j) basis.push_back(s.right.col(j));
  return IntMatrix::from_columns(basis, n);
}

std::vector<IntVector> hermite_rows(std::vector<IntVector> rows, std::size_t cols) {
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows.size(); ++c) {
    for (;;) {
      std::size_t pick = rows.size();
      for (std::size_t i = r; i < rows.size(); ++i)
        if (rows[i][c] != 0 && (pick == rows.size() || abs(rows[i][c]) < abs(rows[pick][c]))) pick = i;
      if (pick == rows.size()) break;
      std::swap(rows[r], rows[pick]);
      bool others = false;
      for (std::size_t i = r + 1; i < rows.size(); ++i)
        if (rows[i][c] != 0) {
          Integer q;
          mpz_tdiv_q(q.get_mpz_t(), rows[i][c].get_mpz_t(), rows[r][c].get_mpz_t());
          for (std::size_t j = 0; j < cols; ++j) rows[i][j] -= q * rows[r][j];
          if (rows[i][c] != 0) others = true;
        }
      if (!others) break;
    }
    if (r >= rows.size() || rows[r][c] == 0) continue;
    if (rows[r][c] < 0)
      for (auto& x : rows[r]) x = -x;
    for (std::size_t i = 0; i < r; ++i) {
      Integer q = floor_div(rows[i][c], rows[r][c]);
      if (q != 0)
        for (std::size_t j = 0; j < cols; ++j) rows[i][j] -= q * rows[r][j];
    }
    ++r;
  }
  rows.resize(r);
  return rows;
}

namespace {

/// Reduce x modulo the lattice with the given Hermite basis.
IntVector hermite_reduce(IntVector x, const std::vector<IntVector>& hnf) {
  for (const auto& row : hnf) {
    std::size_t c = 0;
    while (row[c] == 0) ++c;
    Integer q = floor_div(x[c], row[c]);
    if (q != 0)
      for (std::size_t j = 0; j < x.size(); ++j) x[j] -= q * row[j];
  }
  return x;
}

}  // namespace

// ---------------------------------------------------------------- FgAbGroup

GroupPtr FgAbGroup::from_relations(const IntMatrix& relations, std::size_t generators) {
  if (relations.rows() > 0 && relations.cols() != generators)
    throw std::invalid_argument("FgAbGroup: relation width differs from generator count");
  IntMatrix rel = relations.rows() == 0 ? IntMatrix(0, generators) : relations;
  SmithForm s = smith_normalize(rel);

  auto g = std::shared_ptr<FgAbGroup>(new FgAbGroup());
  g->presentation_ = rel;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < generators; ++i) {
    Integer d = i < s.factors.size() ? s.factors[i] : Integer(0);
    if (d == 1) continue;
    keep.push_back(i);
    g->invariants_.push_back(d);
  }
  g->to_canonical_ = IntMatrix(generators, keep.size());
  g->from_canonical_ = IntMatrix(keep.size(), generators);
  for (std::size_t k = 0; k < keep.size(); ++k)
    for (std::size_t i = 0; i < generators; ++i) {
      g->to_canonical_(i, k) = s.right(i, keep[k]);
      g->from_canonical_(k, i) = s.right_inverse(keep[k], i);
    }
  return g;
}

GroupPtr FgAbGroup::from_invariants(const IntVector& invariants) {
  std::vector<IntVector> rows;
  for (std::size_t i = 0; i < invariants.size(); ++i) {
    if (invariants[i] < 0) throw std::invalid_argument("FgAbGroup: negative invariant factor");
    if (invariants[i] == 0) continue;
    IntVector r(invariants.size(), Integer(0));
    r[i] = invariants[i];
    rows.push_back(std::move(r));
  }
  return from_relations(IntMatrix::from_rows(rows, invariants.size()), invariants.size());
}

GroupPtr FgAbGroup::trivial() { return from_invariants({}); }

GroupPtr FgAbGroup::elementary_two(std::size_t dim) {
  return from_invariants(IntVector(dim, Integer(2)));
}

bool FgAbGroup::is_finite() const { return free_rank() == 0; }

std::size_t FgAbGroup::free_rank() const {
  return static_cast<std::size_t>(std::count(invariants_.begin(), invariants_.end(), Integer(0)));
}

Integer FgAbGroup::torsion_order() const {
  Integer n = 1;
  for (const auto& d : invariants_)
    if (d != 0) n *= d;
  return n;
}

IntVector FgAbGroup::reduce(IntVector canonical) const {
  if (canonical.size() != invariants_.size())
    throw Error(ErrorKind::TypeMismatch, "coordinate vector has wrong length for " + describe(),
                vector_string(canonical));
  for (std::size_t i = 0; i < canonical.size(); ++i)
    if (invariants_[i] != 0) canonical[i] = floor_mod(canonical[i], invariants_[i]);
  return canonical;
}

IntVector FgAbGroup::canonical_from_presentation(const IntVector& x) const {
  if (x.size() != presentation_generators())
    throw Error(ErrorKind::TypeMismatch, "presentation vector has wrong length for " + describe(),
                vector_string(x));
  IntVector y(rank(), Integer(0));
  for (std::size_t k = 0; k < rank(); ++k)
    for (std::size_t i = 0; i < x.size(); ++i) y[k] += x[i] * to_canonical_(i, k);
  return reduce(std::move(y));
}

IntVector FgAbGroup::presentation_from_canonical(const IntVector& y) const {
  IntVector x(presentation_generators(), Integer(0));
  for (std::size_t k = 0; k < rank(); ++k)
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += y[k] * from_canonical_(k, i);
  return x;
}

std::string FgAbGroup::describe() const {
  if (invariants_.empty()) return "0";
  std::ostringstream os;
  for (std::size_t i = 0; i < invariants_.size(); ++i) {
    if (i) os << " + ";
    if (invariants_[i] == 0)
      os << "Z";
    else
      os << "Z/" << invariants_[i].get_str();
  }
  return os.str();
}

// ------------------------------------------------------------- GroupElement

GroupElement::GroupElement(GroupPtr group, IntVector canonical)
    : group_(std::move(group)), coords_(group_->reduce(std::move(canonical))) {}

GroupElement GroupElement::zero(GroupPtr group) {
  IntVector z(group->rank(), Integer(0));
  return GroupElement(std::move(group), std::move(z));
}

GroupElement GroupElement::generator(GroupPtr group, std::size_t i) {
  IntVector z(group->rank(), Integer(0));
  z.at(i) = 1;
  return GroupElement(std::move(group), std::move(z));
}

GroupElement GroupElement::from_presentation(GroupPtr group, const IntVector& x) {
  IntVector y = group->canonical_from_presentation(x);
  return GroupElement(std::move(group), std::move(y));
}

bool GroupElement::is_zero() const { return all_zero(coords_); }

void GroupElement::check_same_group(const GroupElement& o) const {
  if (group_ != o.group_)
    throw Error(ErrorKind::TypeMismatch, "elements of different groups combined",
                to_string() + " vs " + o.to_string());
}

GroupElement GroupElement::operator+(const GroupElement& o) const {
  check_same_group(o);
  IntVector s(coords_.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = coords_[i] + o.coords_[i];
  return GroupElement(group_, std::move(s));
}

GroupElement GroupElement::operator-(const GroupElement& o) const { return *this + (-o); }

GroupElement GroupElement::operator-() const {
  IntVector s(coords_.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = -coords_[i];
  return GroupElement(group_, std::move(s));
}

GroupElement GroupElement::times(const Integer& k) const {
  IntVector s(coords_.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = k * coords_[i];
  return GroupElement(group_, std::move(s));
}

bool GroupElement::operator==(const GroupElement& o) const {
  return group_ == o.group_ && coords_ == o.coords_;
}

bool GroupElement::operator<(const GroupElement& o) const {
  check_same_group(o);
  return coords_ < o.coords_;
}

std::string GroupElement::to_string() const { return vector_string(coords_); }

// ----------------------------------------------------------------- GroupHom

GroupHom::GroupHom(GroupPtr source, GroupPtr target, IntMatrix matrix)
    : source_(std::move(source)), target_(std::move(target)), matrix_(std::move(matrix)) {
  if (matrix_.rows() != target_->rank() || matrix_.cols() != source_->rank())
    throw Error(ErrorKind::IllFormedHom, "matrix shape does not match groups " +
                                             source_->describe() + " -> " + target_->describe());
  for (std::size_t k = 0; k < source_->rank(); ++k) {
    IntVector col = target_->reduce(matrix_.col(k));
    for (std::size_t i = 0; i < col.size(); ++i) matrix_(i, k) = col[i];
    const Integer& d = source_->invariants()[k];
    if (d == 0) continue;
    IntVector img = col;
    for (auto& x : img) x *= d;
    if (!all_zero(target_->reduce(img)))
      throw Error(ErrorKind::IllFormedHom,
                  "relation " + d.get_str() + "*e" + std::to_string(k) + " not sent to zero",
                  "image of generator " + std::to_string(k) + " = " + vector_string(col));
  }
}

GroupHom GroupHom::from_generator_images(GroupPtr source, GroupPtr target,
                                         const std::vector<GroupElement>& images) {
  if (images.size() != source->presentation_generators())
    throw Error(ErrorKind::IllFormedHom, "expected one image per presentation generator");
  for (const auto& img : images)
    if (img.group() != target) throw Error(ErrorKind::IllFormedHom, "image outside the target group");
  const IntMatrix& rel = source->presentation();
  for (std::size_t r = 0; r < rel.rows(); ++r) {
    GroupElement sum = GroupElement::zero(target);
    for (std::size_t i = 0; i < images.size(); ++i) sum = sum + images[i].times(rel(r, i));
    if (!sum.is_zero())
      throw Error(ErrorKind::IllFormedHom, "presentation relation not sent to zero",
                  "relation " + vector_string(rel.row(r)) + " maps to " + sum.to_string());
  }
  IntMatrix m(target->rank(), source->rank());
  for (std::size_t k = 0; k < source->rank(); ++k) {
    IntVector e(source->rank(), Integer(0));
    e[k] = 1;
    IntVector pres = source->presentation_from_canonical(e);
    GroupElement sum = GroupElement::zero(target);
    for (std::size_t i = 0; i < pres.size(); ++i) sum = sum + images[i].times(pres[i]);
    for (std::size_t j = 0; j < target->rank(); ++j) m(j, k) = sum.coords()[j];
  }
  return GroupHom(std::move(source), std::move(target), std::move(m));
}

GroupHom GroupHom::identity(GroupPtr group) {
  std::size_t n = group->rank();
  return GroupHom(group, group, IntMatrix::identity(n));
}

GroupHom GroupHom::zero(GroupPtr source, GroupPtr target) {
  IntMatrix m(target->rank(), source->rank());
  return GroupHom(std::move(source), std::move(target), std::move(m));
}

GroupHom GroupHom::doubling(GroupPtr group) {
  IntMatrix m = IntMatrix::identity(group->rank());
  for (std::size_t i = 0; i < group->rank(); ++i) m(i, i) = 2;
  return GroupHom(group, group, std::move(m));
}

GroupElement GroupHom::operator()(const GroupElement& x) const {
  if (x.group() != source_)
    throw Error(ErrorKind::TypeMismatch, "homomorphism applied outside its source", x.to_string());
  return GroupElement(target_, matrix_ * x.coords());
}

GroupHom GroupHom::after(const GroupHom& inner) const {
  if (inner.target_ != source_) throw Error(ErrorKind::TypeMismatch, "homomorphisms not composable");
  return GroupHom(inner.source_, target_, matrix_ * inner.matrix_);
}

GroupHom GroupHom::operator+(const GroupHom& o) const {
  if (o.source_ != source_ || o.target_ != target_)
    throw Error(ErrorKind::TypeMismatch, "adding homomorphisms with different endpoints");
  IntMatrix m = matrix_;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) += o.matrix_(i, j);
  return GroupHom(source_, target_, std::move(m));
}

// ------------------------------------------------------ subgroups, kernels

namespace {

/// Lattice {x in Z^s : M x in diag(d) Z^t} for M : Z^s -> Z^t in canonical coordinates.
std::vector<IntVector> preimage_of_zero(const IntMatrix& m, const IntVector& target_invariants) {
  const std::size_t s = m.cols(), t = m.rows();
  IntMatrix a(t, s + t);
  for (std::size_t i = 0; i < t; ++i) {
    for (std::size_t j = 0; j < s; ++j) a(i, j) = m(i, j);
    a(i, s + i) = target_invariants[i];
  }
  IntMatrix ker = integer_kernel(a);
  std::vector<IntVector> gens;
  for (std::size_t c = 0; c < ker.cols(); ++c) {
    IntVector v(s);
    for (std::size_t j = 0; j < s; ++j) v[j] = ker(j, c);
    if (!all_zero(v)) gens.push_back(std::move(v));
  }
  return gens;
}

}  // namespace

Subgroup generated_subgroup(const GroupPtr& parent, const std::vector<GroupElement>& gens) {
  std::vector<IntVector> cols;
  for (const auto& g : gens) {
    if (g.group() != parent) throw Error(ErrorKind::TypeMismatch, "subgroup generator outside parent");
    cols.push_back(g.coords());
  }
  IntMatrix gm = IntMatrix::from_columns(cols, parent->rank());
  std::vector<IntVector> rel = preimage_of_zero(gm, parent->invariants());
  GroupPtr sub = FgAbGroup::from_relations(IntMatrix::from_rows(rel, gens.size()), gens.size());
  GroupHom inc = GroupHom::from_generator_images(sub, parent, gens);
  return {sub, inc};
}

HomAnalysis hom_analyze(const GroupHom& f) {
  HomAnalysis out;
  const GroupPtr& src = f.source();
  const GroupPtr& tgt = f.target();

  std::vector<GroupElement> kgens;
  for (auto& v : preimage_of_zero(f.matrix(), tgt->invariants())) kgens.emplace_back(src, v);
  out.kernel = generated_subgroup(src, kgens);

  std::vector<GroupElement> igens;
  for (std::size_t k = 0; k < src->rank(); ++k) igens.push_back(f(GroupElement::generator(src, k)));
  out.image = generated_subgroup(tgt, igens);

  std::vector<IntVector> rel;
  for (std::size_t i = 0; i < tgt->rank(); ++i)
    if (tgt->invariants()[i] != 0) {
      IntVector r(tgt->rank(), Integer(0));
      r[i] = tgt->invariants()[i];
      rel.push_back(std::move(r));
    }
  for (std::size_t k = 0; k < src->rank(); ++k) rel.push_back(f.matrix().col(k));
  out.cokernel = FgAbGroup::from_relations(IntMatrix::from_rows(rel, tgt->rank()), tgt->rank());
  // the cokernel is presented on the canonical coordinates of tgt
  IntMatrix proj(out.cokernel->rank(), tgt->rank());
  for (std::size_t i = 0; i < tgt->rank(); ++i) {
    IntVector e(tgt->rank(), Integer(0));
    e[i] = 1;
    GroupElement img = GroupElement::from_presentation(out.cokernel, e);
    for (std::size_t j = 0; j < proj.rows(); ++j) proj(j, i) = img.coords()[j];
  }
  out.projection = GroupHom(tgt, out.cokernel, proj);
  return out;
}

Subgroup two_torsion(const GroupPtr& g) {
  std::vector<GroupElement> gens;
  for (std::size_t i = 0; i < g->rank(); ++i) {
    const Integer& d = g->invariants()[i];
    if (d != 0 && d % 2 == 0) gens.push_back(GroupElement::generator(g, i).times(d / 2));
  }
  return generated_subgroup(g, gens);
}

F2Vec Mod2Reduction::project(const GroupElement& x) const {
  if (x.group() != group) throw Error(ErrorKind::TypeMismatch, "mod 2 projection of foreign element");
  F2Vec v(even_coordinates.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    Integer r = floor_mod(x.coords()[even_coordinates[i]], Integer(2));
    v[i] = r == 0 ? 0 : 1;
  }
  return v;
}

GroupElement Mod2Reduction::lift(const F2Vec& v) const {
  IntVector c(group->rank(), Integer(0));
  for (std::size_t i = 0; i < v.size(); ++i) c[even_coordinates[i]] = v[i];
  return GroupElement(group, c);
}

Mod2Reduction mod2_reduction(const GroupPtr& g) {
  Mod2Reduction r{g, {}};
  for (std::size_t i = 0; i < g->rank(); ++i)
    if (g->invariants()[i] % 2 == 0) r.even_coordinates.push_back(i);
  return r;
}

F2Map mod2_map(const GroupHom& f) {
  Mod2Reduction src = mod2_reduction(f.source());
  Mod2Reduction tgt = mod2_reduction(f.target());
  std::vector<F2Vec> cols;
  for (std::size_t i : src.even_coordinates)
    cols.push_back(tgt.project(f(GroupElement::generator(f.source(), i))));
  return F2Map(src.dim(), tgt.dim(), std::move(cols));
}

std::optional<LinearSolution> solve_linear(const GroupHom& f, const GroupElement& target) {
  if (target.group() != f.target())
    throw Error(ErrorKind::TypeMismatch, "solve_linear: target outside codomain", target.to_string());
  const GroupPtr& src = f.source();
  const GroupPtr& tgt = f.target();
  const std::size_t s = src->rank(), t = tgt->rank();
  IntMatrix a(t, s + t);
  for (std::size_t i = 0; i < t; ++i) {
    for (std::size_t j = 0; j < s; ++j) a(i, j) = f.matrix()(i, j);
    a(i, s + i) = tgt->invariants()[i];
  }
  SmithForm sf = smith_normalize(a);
  IntVector c = sf.left * target.coords();
  IntVector y(s + t, Integer(0));
  for (std::size_t i = 0; i < t; ++i) {
    if (i < sf.rank) {
      if (c[i] % sf.factors[i] != 0) return std::nullopt;
      y[i] = c[i] / sf.factors[i];
    } else if (c[i] != 0) {
      return std::nullopt;
    }
  }
  IntVector sol = sf.right * y;
  IntVector x(sol.begin(), sol.begin() + s);

  std::vector<IntVector> lattice = preimage_of_zero(f.matrix(), tgt->invariants());
  std::vector<GroupElement> kgens;
  for (auto& v : lattice) kgens.emplace_back(src, v);
  for (std::size_t i = 0; i < s; ++i)
    if (src->invariants()[i] != 0) {
      IntVector r(s, Integer(0));
      r[i] = src->invariants()[i];
      lattice.push_back(std::move(r));
    }
  x = hermite_reduce(x, hermite_rows(lattice, s));
  LinearSolution out{GroupElement(src, x), generated_subgroup(src, kgens)};
  if (f(out.particular) != target)
    throw Error(ErrorKind::InternalContradiction, "solve_linear produced a non-solution",
                out.particular.to_string());
  return out;
}

std::vector<GroupElement> enumerate_elements(const GroupPtr& g, std::size_t limit) {
  if (!g->is_finite())
    throw Error(ErrorKind::NotEnumerable, "group is infinite", g->describe());
  if (g->torsion_order() > limit)
    throw Error(ErrorKind::NotEnumerable, "group too large to enumerate", g->describe());
  std::vector<GroupElement> out;
  IntVector cur(g->rank(), Integer(0));
  for (;;) {
    out.emplace_back(g, cur);
    std::size_t i = g->rank();
    while (i > 0) {
      --i;
      cur[i] += 1;
      if (cur[i] < g->invariants()[i]) break;
      cur[i] = 0;
      if (i == 0) return out;
    }
    if (g->rank() == 0) return out;
  }
}

std::vector<GroupElement> solution_set(const GroupHom& f, const GroupElement& target, std::size_t limit) {
  auto sol = solve_linear(f, target);
  if (!sol) return {};
  std::vector<GroupElement> out;
  for (const auto& k : enumerate_elements(sol->kernel.group, limit))
    out.push_back(sol->particular + sol->kernel.inclusion(k));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

ExactnessReport verify_short_exact(const GroupHom& f, const GroupHom& g) {
  if (f.target() != g.source()) throw Error(ErrorKind::TypeMismatch, "verify_short_exact: maps not composable");
  ExactnessReport r;
  HomAnalysis af = hom_analyze(f);
  if (!af.kernel.group->is_trivial()) {
    r.injective = false;
    r.injectivity_witness = af.kernel.inclusion(GroupElement::generator(af.kernel.group, 0));
  }
  for (std::size_t k = 0; k < f.source()->rank(); ++k) {
    GroupElement a = GroupElement::generator(f.source(), k);
    if (!g(f(a)).is_zero()) {
      r.composite_zero = false;
      r.composite_witness = a;
      break;
    }
  }
  HomAnalysis ag = hom_analyze(g);
  for (std::size_t k = 0; k < ag.kernel.group->rank(); ++k) {
    GroupElement b = ag.kernel.inclusion(GroupElement::generator(ag.kernel.group, k));
    if (!solve_linear(f, b)) {
      r.middle_exact = false;
      r.middle_witness = b;
      break;
    }
  }
  if (!ag.cokernel->is_trivial()) {
    r.surjective = false;
    IntVector e(ag.cokernel->rank(), Integer(0));
    e[0] = 1;
    r.surjectivity_witness = GroupElement(g.target(), g.target()->reduce(ag.cokernel->presentation_from_canonical(e)));
  }
  return r;
}

GroupHom as_group_hom(const F2Map& map, GroupPtr source, GroupPtr target) {
  IntMatrix m(map.target_dim(), map.source_dim());
  for (std::size_t j = 0; j < map.source_dim(); ++j)
    for (std::size_t i = 0; i < map.target_dim(); ++i) m(i, j) = map.columns()[j][i];
  return GroupHom(std::move(source), std::move(target), std::move(m));
}

}  // namespace wtc
