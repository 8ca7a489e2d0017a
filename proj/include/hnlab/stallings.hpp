#pragma once

// Folded core graphs (Stallings automata) of finitely generated subgroups of
// a free group F_r, with their fibre products.

#include "hnlab/algebra.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hnlab {

// Letters are +-(1..r): +i is a_i, -i its inverse.
using FreeWord = std::vector<int>;

FreeWord free_reduce(const FreeWord& w);
FreeWord free_inverse(const FreeWord& w);
FreeWord free_mul(const FreeWord& a, const FreeWord& b);
FreeWord free_conjugate(const FreeWord& g, const FreeWord& h);  // g h g^-1
bool free_shortlex_less(const FreeWord& a, const FreeWord& b);

// "a".."z" are a_1..a_26, "A".."Z" their inverses. Throws on other characters.
FreeWord parse_free_word(std::string_view s);
std::string format_free_word(const FreeWord& w);

// Free universe words (one Z factor per basis letter) <-> free words.
FreeWord to_free_word(const NormalForm& w);
NormalForm from_free_word(const Universe& u, const FreeWord& w);

class StallingsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class StallingsGraph {
 public:
  StallingsGraph() = default;

  int rank() const { return rank_; }
  std::size_t num_vertices() const { return out_.size(); }
  std::size_t num_edges() const;
  static constexpr std::size_t basepoint() { return 0; }

  // Target of the edge labelled `letter` out of v, or -1.
  int target(std::size_t v, int letter) const { return out_[v][slot(letter)]; }
  std::size_t degree(std::size_t v) const;

  // End vertex of reading w from `from`, or -1 if the reading falls off.
  int read(const FreeWord& w, std::size_t from = 0) const;

  bool folded() const { return folded_; }

  // Shortlex-least path labels from the basepoint to each vertex.
  std::vector<FreeWord> geodesics() const;

  // Free basis read off a BFS spanning tree.
  std::vector<FreeWord> basis() const;

  friend bool operator==(const StallingsGraph&, const StallingsGraph&) = default;

 private:
  friend class GraphFolder;
  std::size_t slot(int letter) const {
    return letter > 0 ? static_cast<std::size_t>(letter - 1)
                      : static_cast<std::size_t>(rank_ - letter - 1);
  }

  int rank_ = 0;
  std::vector<std::vector<int>> out_;  // vertex x slot -> target
  bool folded_ = false;
};

// Union-find folding of labelled graphs with a set of marked vertices that
// survive trimming. Vertex 0 of the result is marked[0]; the other marked
// vertices are reported through marked_result().
class GraphFolder {
 public:
  explicit GraphFolder(int rank);
  explicit GraphFolder(const StallingsGraph& g);

  std::size_t add_vertex();
  void add_edge(std::size_t from, int letter, std::size_t to);
  // Adds a path reading w from `from` to `to`.
  void add_path(std::size_t from, const FreeWord& w, std::size_t to);

  StallingsGraph finish(const std::vector<std::size_t>& marked);
  const std::vector<int>& marked_result() const { return marked_result_; }

 private:
  std::size_t find(std::size_t v);
  void unite(std::size_t a, std::size_t b);
  std::size_t slot(int letter) const {
    return letter > 0 ? static_cast<std::size_t>(letter - 1)
                      : static_cast<std::size_t>(rank_ - letter - 1);
  }

  int rank_;
  std::vector<std::size_t> parent_;
  std::vector<std::vector<int>> out_;
  std::vector<std::pair<std::size_t, std::size_t>> pending_;
  std::vector<int> marked_result_;
};

StallingsGraph st_build(int rank, const std::vector<FreeWord>& generators);

// Reduced rank max(0, rank - 1).
Integer st_rank(const StallingsGraph& g);
Integer st_rr(const StallingsGraph& g);

bool st_member(const StallingsGraph& g, const FreeWord& w);

struct StallingsComponent {
  FreeWord witness;             // s with A ∩ sBs^-1 the component's subgroup
  StallingsGraph intersection;  // core graph of A ∩ sBs^-1
};

// One entry per double coset AsB with nontrivial A ∩ sBs^-1, sorted by
// witness in shortlex order.
std::vector<StallingsComponent> st_pullback(const StallingsGraph& a, const StallingsGraph& b);

// Some f in K1 ∩ z K2, the shortlex least one, or nullopt if empty.
std::optional<FreeWord> st_coset_intersect(const StallingsGraph& k1, const FreeWord& z,
                                           const StallingsGraph& k2);

// Core graph of the preimage of the stabiliser of point 0 under the right
// action a_i -> perms[i]; index = size of the orbit of 0.
StallingsGraph st_schreier_kernel(int rank, const std::vector<std::vector<int>>& perms);

// Regular permutation images for a map F_r -> Z_{m_1} x ... x Z_{m_t}.
// images[i] lists the coordinates of a_i.
std::vector<std::vector<int>> abelian_regular_perms(const std::vector<int>& moduli,
                                                    const std::vector<std::vector<int>>& images);

}  // namespace hnlab
