#include "hnlab/algebra.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace hnlab {

Integer floor_div(const Integer& a, const Integer& b) {
  Integer q = a / b;  // truncates toward zero
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

namespace {

void axpy(ZVec& row, const Integer& q, const ZVec& pivot_row) {
  if (q == 0) return;
  for (std::size_t c = 0; c < row.size(); ++c) row[c] -= q * pivot_row[c];
}

// In-place echelon reduction of the first `dim` columns of m (extra columns
// ride along). Returns the pivot column of each leading row; rows past the
// returned count are zero in the first `dim` columns.
std::vector<std::size_t> echelonize(std::vector<ZVec>& m, std::size_t dim) {
  std::vector<std::size_t> pivots;
  std::size_t top = 0;
  for (std::size_t col = 0; col < dim && top < m.size(); ++col) {
    while (true) {
      std::size_t best = m.size();
      for (std::size_t r = top; r < m.size(); ++r) {
        if (m[r][col] == 0) continue;
        if (best == m.size() || abs(m[r][col]) < abs(m[best][col])) best = r;
      }
      if (best == m.size()) break;
      std::swap(m[top], m[best]);
      bool clean = true;
      for (std::size_t r = top + 1; r < m.size(); ++r) {
        if (m[r][col] == 0) continue;
        axpy(m[r], floor_div(m[r][col], m[top][col]), m[top]);
        if (m[r][col] != 0) clean = false;
      }
      if (clean) break;
    }
    if (m[top][col] == 0) continue;
    if (m[top][col] < 0) {
      for (auto& x : m[top]) x = -x;
    }
    for (std::size_t r = 0; r < top; ++r) axpy(m[r], floor_div(m[r][col], m[top][col]), m[top]);
    pivots.push_back(col);
    ++top;
  }
  return pivots;
}

}  // namespace

Lattice hnf(std::span<const ZVec> rows, std::size_t dim) { return Lattice::from_rows(rows, dim); }

Lattice Lattice::from_rows(std::span<const ZVec> rows, std::size_t dim) {
  std::vector<ZVec> m;
  m.reserve(rows.size());
  for (const auto& r : rows) {
    if (r.size() != dim) throw AlgebraError("lattice row has wrong dimension");
    if (std::any_of(r.begin(), r.end(), [](const Integer& x) { return x != 0; })) m.push_back(r);
  }
  Lattice l(dim);
  l.pivots_ = echelonize(m, dim);
  m.resize(l.pivots_.size());
  l.basis_ = std::move(m);
  return l;
}

Lattice Lattice::full(std::size_t dim) {
  Lattice l(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    ZVec e(dim, 0);
    e[i] = 1;
    l.basis_.push_back(std::move(e));
    l.pivots_.push_back(i);
  }
  return l;
}

ZVec Lattice::reduce(const ZVec& v) const {
  if (v.size() != dim_) throw AlgebraError("vector has wrong dimension");
  ZVec r = v;
  for (std::size_t j = 0; j < basis_.size(); ++j) {
    const std::size_t p = pivots_[j];
    axpy(r, floor_div(r[p], basis_[j][p]), basis_[j]);
  }
  return r;
}

bool Lattice::contains(const ZVec& v) const {
  ZVec r = reduce(v);
  return std::all_of(r.begin(), r.end(), [](const Integer& x) { return x == 0; });
}

bool Lattice::contains(const Lattice& other) const {
  if (other.dim_ != dim_) return false;
  return std::all_of(other.basis_.begin(), other.basis_.end(),
                     [&](const ZVec& b) { return contains(b); });
}

Lattice Lattice::join(const Lattice& other) const {
  if (other.dim_ != dim_) throw AlgebraError("lattice dimension mismatch");
  std::vector<ZVec> rows = basis_;
  rows.insert(rows.end(), other.basis_.begin(), other.basis_.end());
  return from_rows(rows, dim_);
}

Lattice Lattice::with(const ZVec& v) const {
  if (contains(v)) return *this;
  std::vector<ZVec> rows = basis_;
  rows.push_back(v);
  return from_rows(rows, dim_);
}

HnfWithTransform hnf_with_transform(std::span<const ZVec> rows, std::size_t dim) {
  const std::size_t m = rows.size();
  std::vector<ZVec> aug;
  aug.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (rows[i].size() != dim) throw AlgebraError("lattice row has wrong dimension");
    ZVec r = rows[i];
    r.resize(dim + m, 0);
    r[dim + i] = 1;
    aug.push_back(std::move(r));
  }
  HnfWithTransform out;
  out.pivots = echelonize(aug, dim);
  for (std::size_t j = 0; j < out.pivots.size(); ++j) {
    out.basis.emplace_back(aug[j].begin(), aug[j].begin() + static_cast<std::ptrdiff_t>(dim));
    out.transform.emplace_back(aug[j].begin() + static_cast<std::ptrdiff_t>(dim), aug[j].end());
  }
  return out;
}

std::optional<std::vector<Integer>> solve_in_span(std::span<const ZVec> rows, const ZVec& v,
                                                  std::size_t dim) {
  auto h = hnf_with_transform(rows, dim);
  ZVec r = v;
  std::vector<Integer> coeff(rows.size(), 0);
  for (std::size_t j = 0; j < h.basis.size(); ++j) {
    const std::size_t p = h.pivots[j];
    if (r[p] % h.basis[j][p] != 0) return std::nullopt;
    Integer q = r[p] / h.basis[j][p];
    axpy(r, q, h.basis[j]);
    for (std::size_t l = 0; l < rows.size(); ++l) coeff[l] += q * h.transform[j][l];
  }
  if (std::any_of(r.begin(), r.end(), [](const Integer& x) { return x != 0; })) return std::nullopt;
  return coeff;
}

Lattice lattice_intersect(const Lattice& a, const Lattice& b) {
  if (a.dim() != b.dim()) throw AlgebraError("lattice dimension mismatch");
  const std::size_t k = a.dim();
  // Rows (u, u) for u in a and (w, 0) for w in b: combinations with a zero
  // first half are exactly (0, x) with x in a and b.
  std::vector<ZVec> m;
  for (const auto& u : a.basis()) {
    ZVec r(2 * k);
    std::copy(u.begin(), u.end(), r.begin());
    std::copy(u.begin(), u.end(), r.begin() + static_cast<std::ptrdiff_t>(k));
    m.push_back(std::move(r));
  }
  for (const auto& w : b.basis()) {
    ZVec r(2 * k, 0);
    std::copy(w.begin(), w.end(), r.begin());
    m.push_back(std::move(r));
  }
  auto pivots = echelonize(m, 2 * k);
  std::vector<ZVec> tail;
  for (std::size_t j = 0; j < pivots.size(); ++j) {
    if (pivots[j] < k) continue;
    tail.emplace_back(m[j].begin() + static_cast<std::ptrdiff_t>(k), m[j].end());
  }
  return Lattice::from_rows(tail, k);
}

std::optional<Integer> lattice_index(const Lattice& sub, const Lattice& sup) {
  if (sub.dim() != sup.dim()) throw AlgebraError("lattice dimension mismatch");
  if (!sup.contains(sub)) throw AlgebraError("lattice_index: sub is not contained in sup");
  if (sub.rank() < sup.rank()) return std::nullopt;
  // Equal rank and containment: both bases share pivot columns, and the
  // index is the ratio of the pivot products.
  Integer num = 1, den = 1;
  for (std::size_t j = 0; j < sub.rank(); ++j) {
    num *= sub.basis()[j][sub.pivots()[j]];
    den *= sup.basis()[j][sup.pivots()[j]];
  }
  return num / den;
}

// ---------------------------------------------------------------------------

void validate_table(const FiniteTable& t) {
  const std::size_t n = t.size();
  if (n == 0) throw AlgebraError("group table is empty");
  for (const auto& row : t) {
    if (row.size() != n) throw AlgebraError("group table is not square");
    std::vector<bool> seen(n, false);
    for (int x : row) {
      if (x < 0 || static_cast<std::size_t>(x) >= n || seen[x])
        throw AlgebraError("group table row is not a permutation");
      seen[x] = true;
    }
  }
  for (std::size_t c = 0; c < n; ++c) {
    std::vector<bool> seen(n, false);
    for (std::size_t r = 0; r < n; ++r) {
      if (seen[t[r][c]]) throw AlgebraError("group table column is not a permutation");
      seen[t[r][c]] = true;
    }
  }
  for (std::size_t x = 0; x < n; ++x)
    if (t[0][x] != static_cast<int>(x) || t[x][0] != static_cast<int>(x))
      throw AlgebraError("element 0 is not the identity");
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t z = 0; z < n; ++z)
        if (t[t[x][y]][z] != t[x][t[y][z]]) throw AlgebraError("group table is not associative");
}

FactorSpec FactorSpec::cyclic(int n) {
  if (n <= 0) throw AlgebraError("cyclic order must be positive");
  FactorSpec f;
  f.kind_ = Kind::finite_cyclic;
  f.table_.assign(n, std::vector<int>(n));
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) f.table_[x][y] = (x + y) % n;
  f.finish_finite();
  return f;
}

FactorSpec FactorSpec::table(FiniteTable t) {
  validate_table(t);
  FactorSpec f;
  f.kind_ = Kind::finite_table;
  f.table_ = std::move(t);
  f.finish_finite();
  return f;
}

FactorSpec FactorSpec::free_abelian(int k) {
  if (k <= 0) throw AlgebraError("free abelian rank must be positive");
  FactorSpec f;
  f.kind_ = Kind::free_abelian;
  f.rank_ = k;
  return f;
}

void FactorSpec::finish_finite() {
  const int n = order();
  inverse_.assign(n, 0);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      if (table_[x][y] == 0) inverse_[x] = y;
}

std::vector<int> finite_subgroup_closure(const FactorSpec& f, std::span<const int> gens) {
  if (!f.is_finite()) throw AlgebraError("finite_subgroup_closure needs a finite factor");
  std::vector<bool> in(f.order(), false);
  std::vector<int> elems{0};
  in[0] = true;
  for (std::size_t pos = 0; pos < elems.size(); ++pos) {
    for (int g : gens) {
      if (g < 0 || g >= f.order()) throw AlgebraError("element out of range");
      int p = f.mul(elems[pos], g);
      if (!in[p]) {
        in[p] = true;
        elems.push_back(p);
      }
    }
  }
  std::sort(elems.begin(), elems.end());
  return elems;
}

// ---------------------------------------------------------------------------

bool shortlex_less(const NormalForm& a, const NormalForm& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

Universe::Universe(std::vector<FactorSpec> factors) : factors_(std::move(factors)) {
  finite_pos_.assign(factors_.size(), -1);
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (!factors_[i].is_finite()) continue;
    finite_pos_[i] = static_cast<int>(finite_ids_.size());
    finite_ids_.push_back(i);
    radix_.push_back(static_cast<std::size_t>(factors_[i].order()));
  }
  stride_.resize(radix_.size());
  q_order_ = 1;
  for (std::size_t p = 0; p < radix_.size(); ++p) {
    stride_[p] = q_order_;
    q_order_ *= radix_[p];
  }
}

bool Universe::is_free() const {
  return std::all_of(factors_.begin(), factors_.end(), [](const FactorSpec& f) {
    return f.kind() == FactorSpec::Kind::free_abelian && f.rank() == 1;
  });
}

Element Universe::identity(std::size_t i) const {
  const auto& f = factor(i);
  if (f.is_finite()) return 0;
  return ZVec(f.rank(), 0);
}

Element Universe::mul(std::size_t i, const Element& x, const Element& y) const {
  const auto& f = factor(i);
  if (f.is_finite()) return f.mul(std::get<int>(x), std::get<int>(y));
  const auto& u = std::get<ZVec>(x);
  const auto& v = std::get<ZVec>(y);
  ZVec r(u.size());
  for (std::size_t c = 0; c < u.size(); ++c) r[c] = u[c] + v[c];
  return r;
}

Element Universe::inv(std::size_t i, const Element& x) const {
  const auto& f = factor(i);
  if (f.is_finite()) return f.inv(std::get<int>(x));
  ZVec r = std::get<ZVec>(x);
  for (auto& c : r) c = -c;
  return r;
}

bool Universe::is_identity(const Element& x) const {
  if (const int* p = std::get_if<int>(&x)) return *p == 0;
  const auto& v = std::get<ZVec>(x);
  return std::all_of(v.begin(), v.end(), [](const Integer& c) { return c == 0; });
}

void Universe::check_letter(const Letter& l) const {
  if (l.factor >= factors_.size()) throw AlgebraError("letter factor index out of range");
  const auto& f = factors_[l.factor];
  if (f.is_finite()) {
    const int* x = std::get_if<int>(&l.elem);
    if (!x || *x < 0 || *x >= f.order()) throw AlgebraError("malformed finite-factor letter");
  } else {
    const ZVec* v = std::get_if<ZVec>(&l.elem);
    if (!v || v->size() != static_cast<std::size_t>(f.rank()))
      throw AlgebraError("malformed free-abelian letter");
  }
}

NormalForm Universe::reduce(const Word& w) const {
  std::vector<Letter> out;
  out.reserve(w.size());
  for (const auto& l : w) {
    check_letter(l);
    if (is_identity(l.elem)) continue;
    if (!out.empty() && out.back().factor == l.factor) {
      out.back().elem = mul(l.factor, out.back().elem, l.elem);
      if (is_identity(out.back().elem)) out.pop_back();
    } else {
      out.push_back(l);
    }
  }
  return NormalForm(std::move(out));
}

NormalForm Universe::mul(const NormalForm& a, const NormalForm& b) const {
  std::vector<Letter> out = a.letters_;
  for (const auto& l : b.letters_) {
    if (!out.empty() && out.back().factor == l.factor) {
      out.back().elem = mul(l.factor, out.back().elem, l.elem);
      if (is_identity(out.back().elem)) out.pop_back();
    } else {
      out.push_back(l);
    }
  }
  return NormalForm(std::move(out));
}

NormalForm Universe::inverse(const NormalForm& a) const {
  std::vector<Letter> out;
  out.reserve(a.size());
  for (auto it = a.letters_.rbegin(); it != a.letters_.rend(); ++it)
    out.push_back(Letter{it->factor, inv(it->factor, it->elem)});
  return NormalForm(std::move(out));
}

NormalForm Universe::conjugate(const NormalForm& g, const NormalForm& h) const {
  return mul(mul(g, h), inverse(g));
}

NormalForm Universe::letter(std::size_t i, const Element& x) const {
  return reduce(Word{Letter{i, x}});
}

QElem Universe::q_mul(QElem a, QElem b) const {
  QElem r = 0;
  for (std::size_t p = 0; p < radix_.size(); ++p) {
    const int x = static_cast<int>((a / stride_[p]) % radix_[p]);
    const int y = static_cast<int>((b / stride_[p]) % radix_[p]);
    r += static_cast<QElem>(factors_[finite_ids_[p]].mul(x, y)) * stride_[p];
  }
  return r;
}

QElem Universe::q_inv(QElem a) const {
  QElem r = 0;
  for (std::size_t p = 0; p < radix_.size(); ++p) {
    const int x = static_cast<int>((a / stride_[p]) % radix_[p]);
    r += static_cast<QElem>(factors_[finite_ids_[p]].inv(x)) * stride_[p];
  }
  return r;
}

QElem Universe::q_from_letter(std::size_t i, int x) const {
  const int p = finite_pos_.at(i);
  if (p < 0) return 0;
  return static_cast<QElem>(x) * stride_[p];
}

int Universe::q_coordinate(QElem q, std::size_t i) const {
  const int p = finite_pos_.at(i);
  if (p < 0) return 0;
  return static_cast<int>((q / stride_[p]) % radix_[p]);
}

QElem Universe::project(const NormalForm& w) const { return project(w.letters()); }

QElem Universe::project(const Word& w) const {
  QElem q = 0;
  for (const auto& l : w) {
    if (!factor(l.factor).is_finite()) continue;
    q = q_mul(q, q_from_letter(l.factor, std::get<int>(l.elem)));
  }
  return q;
}

NormalForm Universe::section(QElem q) const {
  std::vector<Letter> out;
  for (std::size_t p = 0; p < finite_ids_.size(); ++p) {
    const int x = static_cast<int>((q / stride_[p]) % radix_[p]);
    if (x != 0) out.push_back(Letter{finite_ids_[p], x});
  }
  return NormalForm(std::move(out));
}

std::string to_string(const Universe& u, const NormalForm& w) {
  std::ostringstream os;
  if (w.empty()) return "e";
  bool first = true;
  for (const auto& l : w.letters()) {
    if (!first) os << '.';
    first = false;
    os << 'g' << l.factor;
    if (u.factor(l.factor).is_finite()) {
      os << '[' << std::get<int>(l.elem) << ']';
    } else {
      os << '(';
      const auto& v = std::get<ZVec>(l.elem);
      for (std::size_t c = 0; c < v.size(); ++c) os << (c ? "," : "") << v[c];
      os << ')';
    }
  }
  return os.str();
}

}  // namespace hnlab
