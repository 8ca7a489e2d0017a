#pragma once

// Kurosh automata: core graphs of groups for finitely generated subgroups of
// a free product G = *G_i with trivial edge groups.
//
// Junctions are plain vertices (one is the basepoint); fvertices carry a
// factor index i and a vertex group S <= G_i; every edge joins a junction to
// an fvertex and is labelled by a canonical right-coset representative of S.
// Passing junction -(c_in)- fvertex(S) -(c_out)- junction reads any element
// of c_in^-1 S c_out.

#include "hnlab/algebra.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace hnlab {

class KuroshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A subgroup of one factor: a lattice for Z^k, a sorted element set for a
// finite factor.
struct VertexGroup {
  Lattice lattice;
  std::vector<int> elements;

  friend bool operator==(const VertexGroup&, const VertexGroup&) = default;
};

// Subgroup arithmetic inside factor i of a universe.
class FactorGroups {
 public:
  explicit FactorGroups(const Universe& u) : u_(&u) {}

  VertexGroup trivial(std::size_t i) const;
  VertexGroup whole(std::size_t i) const;
  bool is_trivial(std::size_t i, const VertexGroup& s) const;
  bool contains(std::size_t i, const VertexGroup& s, const Element& x) const;
  VertexGroup with(std::size_t i, const VertexGroup& s, const Element& x) const;
  VertexGroup join(std::size_t i, const VertexGroup& s, const VertexGroup& t) const;
  VertexGroup intersect(std::size_t i, const VertexGroup& s, const VertexGroup& t) const;
  // d S d^-1
  VertexGroup conjugate(std::size_t i, const Element& d, const VertexGroup& s) const;
  // Canonical representative of the right coset S c.
  Element coset_rep(std::size_t i, const VertexGroup& s, const Element& c) const;
  // Canonical representative of the double coset S d T.
  Element double_coset_rep(std::size_t i, const VertexGroup& s, const Element& d, const VertexGroup& t) const;
  // Some element of S a ∩ d T b, or nullopt.
  std::optional<Element> coset_meet(std::size_t i, const VertexGroup& s, const Element& a, const Element& d,
                                    const VertexGroup& t, const Element& b) const;
  // Representatives of all double cosets S x T, or nullopt if there are
  // infinitely many.
  std::optional<std::vector<Element>> double_cosets(std::size_t i, const VertexGroup& s,
                                                    const VertexGroup& t) const;
  std::vector<Element> generators(std::size_t i, const VertexGroup& s) const;

  const Universe& universe() const { return *u_; }

 private:
  const Universe* u_;
};

struct FVertex {
  std::size_t factor = 0;
  VertexGroup group;
  friend bool operator==(const FVertex&, const FVertex&) = default;
};

struct KEdge {
  std::size_t junction = 0;
  std::size_t fvertex = 0;
  Element label;
  friend bool operator==(const KEdge&, const KEdge&) = default;
};

class KuroshAutomaton {
 public:
  KuroshAutomaton() = default;

  // Takes already folded data as is (junction 0 is the basepoint); only the
  // lookup tables are built.
  static KuroshAutomaton assemble(std::shared_ptr<const Universe> u, std::size_t num_junctions,
                                  std::vector<FVertex> fvertices, std::vector<KEdge> edges);

  const Universe& universe() const { return *universe_; }
  std::shared_ptr<const Universe> universe_ptr() const { return universe_; }
  std::size_t num_junctions() const { return num_junctions_; }
  static constexpr std::size_t basepoint() { return 0; }
  const std::vector<FVertex>& fvertices() const { return fvertices_; }
  const std::vector<KEdge>& edges() const { return edges_; }
  bool folded() const { return folded_; }

  // Edge index at junction j for factor i, or -1.
  int junction_edge(std::size_t j, std::size_t factor) const;
  // Edge at fvertex v with the given canonical label, or -1.
  int fvertex_edge(std::size_t v, const Element& label) const;
  const std::vector<std::size_t>& edges_at_fvertex(std::size_t v) const { return at_fvertex_[v]; }

  std::size_t num_nontrivial_fvertices() const;

  friend bool operator==(const KuroshAutomaton& a, const KuroshAutomaton& b) {
    return a.num_junctions_ == b.num_junctions_ && a.fvertices_ == b.fvertices_ && a.edges_ == b.edges_;
  }

 private:
  friend class KuroshFolder;
  void index();

  std::shared_ptr<const Universe> universe_;
  std::size_t num_junctions_ = 0;
  std::vector<FVertex> fvertices_;
  std::vector<KEdge> edges_;
  std::vector<std::vector<int>> at_junction_;           // junction x factor -> edge
  std::vector<std::vector<std::size_t>> at_fvertex_;    // sorted by label
  bool folded_ = false;
};

struct KuroshBuildOptions {
  // Re-read every generator after each fold move (slow; for tests).
  bool check_moves = false;
};

// Folding machinery over a mutable graph of groups. Moves:
//   F1  equal coset labels at one fvertex: merge their junctions;
//   F2  two same-factor edges (u,v1,c1), (u,v2,c2): merge v2 into v1 with
//       d = c1 c2^-1, group <S1, d S2 d^-1>, v2's labels c -> d c;
//   F3  parallel edges (u,v,c1), (u,v,c2): enlarge S_v by c2 c1^-1.
class KuroshFolder {
 public:
  KuroshFolder(std::shared_ptr<const Universe> u, KuroshBuildOptions opts = {});
  KuroshFolder(const KuroshAutomaton& a, KuroshBuildOptions opts = {});

  std::size_t add_junction();
  // Adds a path reading the normal form w from junction `from` to `to`.
  void add_path(std::size_t from, const NormalForm& w, std::size_t to);

  // Folds, trims (keeping the marked junctions) and canonicalises. The first
  // marked junction becomes the basepoint.
  KuroshAutomaton finish(const std::vector<std::size_t>& marked);
  const std::vector<int>& marked_result() const { return marked_result_; }

  // Words that must stay readable as basepoint loops (for check_moves).
  void expect_loop(const NormalForm& w) { expected_.push_back(w); }

 private:
  std::size_t find_j(std::size_t j);
  std::size_t find_f(std::size_t f);
  std::size_t add_fvertex(std::size_t factor, VertexGroup g);
  void add_edge(std::size_t j, std::size_t f, Element label);
  void fold();
  bool step_f1();
  bool step_f2();
  bool step_f3();
  void normalize_edges();
  void check_language(const char* move);
  bool nondeterministic_accepts(const NormalForm& w);

  std::shared_ptr<const Universe> u_;
  FactorGroups groups_;
  KuroshBuildOptions opts_;
  std::vector<std::size_t> jparent_, fparent_;
  std::vector<FVertex> fv_;
  std::vector<KEdge> edges_;
  std::vector<bool> alive_;
  std::vector<NormalForm> expected_;
  std::size_t base_ = 0;
  std::vector<int> marked_result_;
};

KuroshAutomaton ka_build(std::shared_ptr<const Universe> u, const std::vector<NormalForm>& generators,
                         KuroshBuildOptions opts = {});

// Kurosh rank (E - V + 1) + #(nontrivial vertex groups), and its reduced
// form max(0, KR - 1).
Integer ka_kurosh_rank(const KuroshAutomaton& a);
Integer ka_rr(const KuroshAutomaton& a);

bool ka_member(const KuroshAutomaton& a, const NormalForm& w);

// A generating set read off a spanning tree: one element per non-tree edge
// plus conjugated vertex-group generators.
std::vector<NormalForm> ka_generators(const KuroshAutomaton& a);

// Path labels from the basepoint to each junction along a BFS spanning tree.
std::vector<NormalForm> ka_junction_paths(const KuroshAutomaton& a);

KuroshAutomaton ka_conjugate(const KuroshAutomaton& a, const NormalForm& g);

struct KuroshComponent {
  NormalForm witness;           // s with A ∩ sBs^-1 this component's subgroup
  KuroshAutomaton intersection;
};

struct KuroshPullback {
  std::vector<KuroshComponent> components;  // sorted by witness, shortlex
  // Set when some factor pair has infinitely many double cosets with a
  // nontrivial (abelian) intersection; all such omitted entries have Kurosh
  // rank 1, hence reduced rank 0.
  bool omitted_rank_zero = false;
};

// One entry per double coset AsB with A ∩ sBs^-1 != 1.
KuroshPullback ka_pullback(const KuroshAutomaton& a, const KuroshAutomaton& b);

// A ∩ B (the component of the basepoint pair).
KuroshAutomaton ka_intersect(const KuroshAutomaton& a, const KuroshAutomaton& b);

// Some f in K1 ∩ z K2, or nullopt.
std::optional<NormalForm> ka_coset_intersect(const KuroshAutomaton& k1, const NormalForm& z,
                                             const KuroshAutomaton& k2);

}  // namespace hnlab
