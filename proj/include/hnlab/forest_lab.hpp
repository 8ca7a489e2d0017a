#pragma once

// Sandbox for the forest machinery: the orbit-intersection lemma on finite
// free actions, the Magnus order on F_r and the edge order it induces on the
// Bass-Serre tree of the free product of r infinite cyclic groups, witness
// lines and important edges, and induced actions on forests of copies.

#include "hnlab/stallings.hpp"

#include <compare>
#include <optional>
#include <string>
#include <vector>

namespace hnlab {

class ForestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Finite groups and actions

// Multiplication table with identity 0: table[g][h] = g h.
class FiniteGroup {
 public:
  FiniteGroup() = default;
  // Validates closure, identity, inverses and associativity.
  FiniteGroup(std::string name, std::vector<std::vector<int>> table);

  const std::string& name() const { return name_; }
  int order() const { return static_cast<int>(table_.size()); }
  int mul(int g, int h) const { return table_[g][h]; }
  int inverse(int g) const { return inverse_[g]; }
  const std::vector<std::vector<int>>& table() const { return table_; }

 private:
  std::string name_;
  std::vector<std::vector<int>> table_;
  std::vector<int> inverse_;
};

// A catalog of groups of order <= max_order: all abelian types, dihedral,
// dicyclic, several semidirect products, A4, S4 and SL(2,3). It does not
// cover every isomorphism class of order 16 or 24.
std::vector<FiniteGroup> small_groups(int max_order);

// Sorted element lists.
using ElementSet = std::vector<int>;

ElementSet group_closure(const FiniteGroup& g, const ElementSet& gens);
// Every subgroup, sorted by (order, elements).
std::vector<ElementSet> subgroups(const FiniteGroup& g);

struct FiniteAction {
  FiniteGroup group;
  std::vector<std::vector<int>> perm;  // perm[g][x] = g o x
  ElementSet a, b;

  int num_points() const { return perm.empty() ? 0 : static_cast<int>(perm[0].size()); }
};

FiniteAction regular_action(const FiniteGroup& g, ElementSet a, ElementSet b);

struct OrbitLemmaReport {
  std::vector<int> reps;          // double coset representatives d in A\G/B
  std::vector<int> terms;         // #((d^-1 Y ∩ Z)/(A^d ∩ B)) per representative
  int lhs = 0;                    // sum of terms
  int y_orbits = 0, z_orbits = 0;  // #(Y/A), #(Z/B)
  bool well_defined = false;
  bool injective = false;
  bool ok = false;                // well_defined, injective and lhs <= y_orbits z_orbits
};

// Y is A-invariant and Z is B-invariant (point lists). Throws ForestError on
// a non-free action, broken action axioms, non-subgroups or non-invariant
// subsets.
OrbitLemmaReport orbit_lemma_check(const FiniteAction& fa, const std::vector<int>& y, const std::vector<int>& z);

struct OrbitSweepReport {
  int groups = 0;
  long pairs = 0;
  long checks = 0;
  long failures = 0;
};

// Regular actions of every catalog group of order <= max_order, every
// subgroup pair, three (Y, Z) choices per pair.
OrbitSweepReport orbit_sweep(int max_order, bool parallel);

// ---------------------------------------------------------------------------
// Orders

// Magnus order: u < v iff the lowest-degree part of M(u^-1 v) - 1 has a
// positive coefficient at its lexicographically largest monomial, with
// M(a_i) = 1 + X_i and X_1 < X_2 < ... . Bi-invariant and total.
std::strong_ordering order_compare(const FreeWord& u, const FreeWord& v);

// Edge (g, i) joins the element vertex g to the coset vertex g<a_i>.
struct Edge {
  FreeWord g;
  int i = 1;

  friend bool operator==(const Edge&, const Edge&) = default;
};

std::strong_ordering edge_compare(const Edge& e, const Edge& f);
Edge act(const FreeWord& w, const Edge& e);

// Coset vertex h<a_i> with h not ending in a_i or its inverse.
struct CosetVertex {
  FreeWord h;
  int i = 1;

  friend bool operator==(const CosetVertex&, const CosetVertex&) = default;
  friend auto operator<=>(const CosetVertex&, const CosetVertex&) = default;
};

CosetVertex coset_vertex(const FreeWord& g, int i);

// Element vertices of length <= radius, their coset vertices and edges.
class TreeBall {
 public:
  TreeBall(int rank, int radius);

  int rank() const { return rank_; }
  int radius() const { return radius_; }
  const std::vector<FreeWord>& elements() const { return elements_; }
  const std::vector<CosetVertex>& cosets() const { return cosets_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t num_vertices() const { return elements_.size() + cosets_.size(); }

  bool contains(const Edge& e) const { return static_cast<int>(e.g.size()) <= radius_; }
  // w o e, or nullopt when it leaves the ball.
  std::optional<Edge> act(const FreeWord& w, const Edge& e) const;
  // Connected with |E| = |V| - 1.
  bool is_tree() const;

 private:
  int rank_, radius_;
  std::vector<FreeWord> elements_;
  std::vector<CosetVertex> cosets_;
  std::vector<Edge> edges_;
};

// ---------------------------------------------------------------------------
// Lines

struct Syllable {
  int gen;  // 1..r
  int exp;  // nonzero

  friend bool operator==(const Syllable&, const Syllable&) = default;
};

std::vector<Syllable> syllables(const FreeWord& w);
FreeWord from_syllables(const std::vector<Syllable>& s);

// A path of element vertices start, start s_1, start s_1 s_2, ...; the step
// by a_i^k passes through the coset vertex with edges (g, i), (g a_i^k, i).
struct TreePath {
  FreeWord start;
  std::vector<Syllable> steps;

  FreeWord end() const;
  std::vector<Edge> edges() const;
};

// x = u c u^-1 with c cyclically reduced in syllables (first and last
// syllables on different generators); nullopt iff x is elliptic.
struct Axis {
  FreeWord u, c;
};
std::optional<Axis> axis_of(const FreeWord& x);

// The line p ∪ (x^k o p_x, k >= 0) ∪ (y^k o p_y, k >= 0) with p running
// from the start of p_y to the start of p_x.
struct WitnessLine {
  TreePath p;
  FreeWord x;
  TreePath px;
  FreeWord y;
  TreePath py;
};

// Ends start at u_x c_x^tx and u_y c_y^ty; nullopt if an element is
// elliptic or the result is not a simple line.
std::optional<WitnessLine> witness_line(const FreeWord& x, const FreeWord& y, int tx, int ty);

// Periodic ends and no backtracking over `periods` unrolled periods.
bool line_simple(const WitnessLine& line, int periods);

// Maximum edge of p ∪ p_x ∪ p_y.
Edge line_max_edge(const WitnessLine& line);

struct ImportantResult {
  bool important = false;
  std::string reason;  // empty when important
};

// `bound` is the number of periods unrolled per end for the simplicity
// check and for locating e.
ImportantResult important_test(const StallingsGraph& h, const Edge& e, const WitnessLine& line, int bound);

struct ImportantSearchReport {
  std::vector<Edge> representatives;  // one per orbit, sorted
  std::size_t count = 0;
  Integer rr;
  std::size_t lines = 0;               // simple lines with decreasing ends examined
};

// Lower bound on the number of H-orbits of important edges from lines whose
// ends are H-elements of length <= length, keeping edges within radius.
// Throws ForestError if the count exceeds rr(H).
ImportantSearchReport important_orbit_search(const StallingsGraph& h, int radius, int length, bool parallel = true);

// ---------------------------------------------------------------------------
// Induced forests

struct CopyEdge {
  std::size_t copy;
  Edge e;

  friend bool operator==(const CopyEdge&, const CopyEdge&) = default;
};

struct CopyVertex {
  std::size_t copy;
  CosetVertex v;

  friend bool operator==(const CopyVertex&, const CopyVertex&) = default;
};

// F_r acting on n copies of the tree of a finite-index K <= F_r:
// g o (s, t) = (s(gs), f(gs) o t) with g = s(g) f(g), s(g) in S, f(g) in K.
class InducedForest {
 public:
  InducedForest(const StallingsGraph& k, int radius);

  std::size_t n() const { return reps_.size(); }
  const TreeBall& ball() const { return ball_; }
  const StallingsGraph& kernel() const { return k_; }
  // Left coset representatives, reps()[0] = 1.
  const std::vector<FreeWord>& reps() const { return reps_; }
  // (index of s(g), f(g)).
  std::pair<std::size_t, FreeWord> decompose(const FreeWord& g) const;

  std::optional<CopyEdge> act(const FreeWord& g, const CopyEdge& x) const;
  CopyVertex act(const FreeWord& g, const CopyVertex& x) const;

 private:
  StallingsGraph k_;
  TreeBall ball_;
  std::vector<FreeWord> paths_;  // w_v, base to v
  std::vector<FreeWord> reps_;   // w_v^-1
};

struct InducedForestReport {
  std::size_t copies = 0;
  long samples = 0;
  bool axioms = false;
  bool order_preserved = false;
  bool free_on_edges = false;
  bool stabilizers = false;
  bool matches_original = false;  // n = 1 only; true otherwise
  bool ok = false;
};

// Throws ForestError if K has infinite index.
InducedForestReport induced_forest_check(const StallingsGraph& k, int radius);

}  // namespace hnlab
