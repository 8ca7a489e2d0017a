#pragma once

// Exact arithmetic for the factor groups of a free product and for words in
// the free product itself.
//
// Factors are either finite groups, given by a multiplication table whose
// element 0 is the identity, or free abelian groups Z^k. Subgroups of Z^k are
// carried as lattices in Hermite normal form; subgroups of finite factors as
// sorted element sets.

#include <boost/multiprecision/cpp_int.hpp>

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace hnlab {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;
using ZVec = std::vector<Integer>;

class AlgebraError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Floor division and the matching non-negative remainder.
Integer floor_div(const Integer& a, const Integer& b);

// ---------------------------------------------------------------------------
// Lattices
// ---------------------------------------------------------------------------

// A subgroup of Z^k. The basis is the canonical row-style Hermite normal
// form: upper echelon, positive pivots, entries above each pivot reduced
// into [0, pivot). Two lattices are equal iff their bases are identical.
class Lattice {
 public:
  Lattice() = default;
  explicit Lattice(std::size_t dim) : dim_(dim) {}

  static Lattice from_rows(std::span<const ZVec> rows, std::size_t dim);
  static Lattice full(std::size_t dim);

  std::size_t dim() const { return dim_; }
  std::size_t rank() const { return basis_.size(); }
  bool is_zero() const { return basis_.empty(); }
  const std::vector<ZVec>& basis() const { return basis_; }
  const std::vector<std::size_t>& pivots() const { return pivots_; }

  bool contains(const ZVec& v) const;
  bool contains(const Lattice& other) const;

  // Canonical representative of the coset v + L.
  ZVec reduce(const ZVec& v) const;

  // Lattice generated by this one and the extra vectors.
  Lattice join(const Lattice& other) const;
  Lattice with(const ZVec& v) const;

  friend bool operator==(const Lattice&, const Lattice&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<ZVec> basis_;
  std::vector<std::size_t> pivots_;
};

// HNF of the row span. Empty input gives the zero lattice.
Lattice hnf(std::span<const ZVec> rows, std::size_t dim);

// Row echelon reduction that also records, for every nonzero output row, the
// integer combination of input rows producing it.
struct HnfWithTransform {
  std::vector<ZVec> basis;                // nonzero rows, canonical HNF
  std::vector<std::size_t> pivots;
  std::vector<std::vector<Integer>> transform;  // basis[j] = sum transform[j][l] * rows[l]
};
HnfWithTransform hnf_with_transform(std::span<const ZVec> rows, std::size_t dim);

// Integer coefficients expressing v over `rows`, or nullopt if v is not in
// their span.
std::optional<std::vector<Integer>> solve_in_span(std::span<const ZVec> rows, const ZVec& v,
                                                  std::size_t dim);

Lattice lattice_intersect(const Lattice& a, const Lattice& b);

// [sup : sub]; nullopt stands for an infinite index. Throws if sub is not
// contained in sup.
std::optional<Integer> lattice_index(const Lattice& sub, const Lattice& sup);

// ---------------------------------------------------------------------------
// Factor groups
// ---------------------------------------------------------------------------

using FiniteTable = std::vector<std::vector<int>>;

class FactorSpec {
 public:
  enum class Kind { finite_cyclic, finite_table, free_abelian };

  static FactorSpec cyclic(int n);
  static FactorSpec table(FiniteTable t);
  static FactorSpec free_abelian(int k);

  Kind kind() const { return kind_; }
  bool is_finite() const { return kind_ != Kind::free_abelian; }
  int order() const { return static_cast<int>(table_.size()); }
  int rank() const { return rank_; }
  const FiniteTable& mult_table() const { return table_; }

  int mul(int x, int y) const { return table_[x][y]; }
  int inv(int x) const { return inverse_[x]; }

 private:
  FactorSpec() = default;
  void finish_finite();

  Kind kind_ = Kind::free_abelian;
  int rank_ = 0;
  FiniteTable table_;
  std::vector<int> inverse_;
};

// Checks the group axioms of a table; throws AlgebraError on failure.
void validate_table(const FiniteTable& t);

// Subgroup of a finite factor generated by gens, returned sorted.
std::vector<int> finite_subgroup_closure(const FactorSpec& f, std::span<const int> gens);

// ---------------------------------------------------------------------------
// Words in a free product
// ---------------------------------------------------------------------------

// An element of one factor: an index for finite factors, a vector for Z^k.
using Element = std::variant<int, ZVec>;

struct Letter {
  std::size_t factor = 0;
  Element elem;

  friend bool operator==(const Letter&, const Letter&) = default;
  friend auto operator<=>(const Letter& a, const Letter& b) {
    if (a.factor != b.factor) return a.factor <=> b.factor;
    if (a.elem.index() != b.elem.index()) return a.elem.index() <=> b.elem.index();
    if (const int* x = std::get_if<int>(&a.elem)) return *x <=> std::get<int>(b.elem);
    const auto& u = std::get<ZVec>(a.elem);
    const auto& v = std::get<ZVec>(b.elem);
    return std::lexicographical_compare_three_way(u.begin(), u.end(), v.begin(), v.end(),
                                                  [](const Integer& p, const Integer& q) {
                                                    return p < q   ? std::strong_ordering::less
                                                           : q < p ? std::strong_ordering::greater
                                                                   : std::strong_ordering::equal;
                                                  });
  }
};

using Word = std::vector<Letter>;

// A reduced word: no identity letters, no two adjacent letters from the same
// factor. Only Universe builds these, so equality is syntactic.
class NormalForm {
 public:
  NormalForm() = default;

  const std::vector<Letter>& letters() const { return letters_; }
  std::size_t size() const { return letters_.size(); }
  bool empty() const { return letters_.empty(); }
  const Letter& operator[](std::size_t i) const { return letters_[i]; }

  friend bool operator==(const NormalForm&, const NormalForm&) = default;
  friend auto operator<=>(const NormalForm& a, const NormalForm& b) {
    return std::lexicographical_compare_three_way(a.letters_.begin(), a.letters_.end(),
                                                  b.letters_.begin(), b.letters_.end());
  }

 private:
  friend class Universe;
  explicit NormalForm(std::vector<Letter> l) : letters_(std::move(l)) {}
  std::vector<Letter> letters_;
};

// Shortest first, then lexicographic.
bool shortlex_less(const NormalForm& a, const NormalForm& b);

// Elements of Q, the direct product of the finite factors, are encoded in
// mixed radix over the finite factors in factor order; 0 is the identity.
using QElem = std::size_t;

class Universe {
 public:
  Universe() = default;
  explicit Universe(std::vector<FactorSpec> factors);

  const std::vector<FactorSpec>& factors() const { return factors_; }
  const FactorSpec& factor(std::size_t i) const { return factors_.at(i); }
  std::size_t num_factors() const { return factors_.size(); }

  bool all_free_abelian() const { return finite_ids_.empty(); }
  bool all_finite() const { return finite_ids_.size() == factors_.size(); }
  // Every factor is Z: the universe is a free group with basis the factor
  // generators.
  bool is_free() const;

  // Factor-level arithmetic.
  Element identity(std::size_t i) const;
  Element mul(std::size_t i, const Element& x, const Element& y) const;
  Element inv(std::size_t i, const Element& x) const;
  bool is_identity(const Element& x) const;
  void check_letter(const Letter& l) const;

  // Word-level arithmetic.
  NormalForm reduce(const Word& w) const;
  NormalForm mul(const NormalForm& a, const NormalForm& b) const;
  NormalForm inverse(const NormalForm& a) const;
  NormalForm conjugate(const NormalForm& g, const NormalForm& h) const;  // g h g^-1
  NormalForm letter(std::size_t i, const Element& x) const;

  // The finite quotient Q and the retraction pi: G -> Q.
  std::size_t q_order() const { return q_order_; }
  QElem q_mul(QElem a, QElem b) const;
  QElem q_inv(QElem a) const;
  QElem q_from_letter(std::size_t i, int x) const;
  int q_coordinate(QElem q, std::size_t i) const;
  QElem project(const NormalForm& w) const;
  QElem project(const Word& w) const;

  // Product of finite-factor letters realising q, in factor order.
  NormalForm section(QElem q) const;

 private:
  std::vector<FactorSpec> factors_;
  std::vector<std::size_t> finite_ids_;
  std::vector<std::size_t> radix_;     // per finite factor position
  std::vector<std::size_t> stride_;
  std::vector<int> finite_pos_;        // factor index -> position or -1
  std::size_t q_order_ = 1;
};

std::string to_string(const Universe& u, const NormalForm& w);

}  // namespace hnlab
