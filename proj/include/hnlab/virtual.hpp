#pragma once

// Finite-index layer: F = ker(pi: G -> Q), subgroup handles over G split
// into a transversal and a kernel part, virtual ranks and double cosets.

#include "hnlab/kurosh.hpp"
#include "hnlab/stallings.hpp"

#include <map>

namespace hnlab {

class Extension {
 public:
  explicit Extension(std::shared_ptr<const Universe> u);

  const Universe& universe() const { return *u_; }
  const std::shared_ptr<const Universe>& universe_ptr() const { return u_; }
  std::size_t n() const { return u_->q_order(); }
  const NormalForm& section(QElem q) const { return section_[q]; }

 private:
  std::shared_ptr<const Universe> u_;
  std::vector<NormalForm> section_;
};

struct SubgroupHandle {
  std::vector<NormalForm> generators;
  std::vector<QElem> image;                  // pi(H), sorted
  std::map<QElem, NormalForm> transversal;   // a_q in H with pi(a_q) = q
  KuroshAutomaton kernel;                    // H ∩ F
};

SubgroupHandle sub_handle(const Extension& e, const std::vector<NormalForm>& gens);

// g in H iff pi(g) in pi(H) and a_pi(g)^-1 g in H ∩ F.
bool handle_member(const Extension& e, const SubgroupHandle& h, const NormalForm& g);

SubgroupHandle handle_conjugate(const Extension& e, const SubgroupHandle& h, const NormalForm& g);

// rr(H ∩ F) / |pi(H)|.
Rational rk_virtual(const SubgroupHandle& h);

// Sum over q in Q of rk(t(q) H t(q)^-1).
Rational total_rank(const Extension& e, const SubgroupHandle& h);

// A ∩ sBs^-1.
SubgroupHandle intersect_general(const Extension& e, const SubgroupHandle& a, const NormalForm& s,
                                 const SubgroupHandle& b);

// A g B = A g' B.
bool same_double_coset(const Extension& e, const SubgroupHandle& a, const NormalForm& g, const NormalForm& g2,
                       const SubgroupHandle& b);

struct DoubleCosetEntry {
  NormalForm witness;
  SubgroupHandle intersection;
};

struct DoubleCosetList {
  std::vector<DoubleCosetEntry> entries;  // sorted by witness, shortlex
  // Some double cosets with intersection of Kurosh rank 1 in the kernel were
  // not listed; they contribute 0 to every virtual rank sum.
  bool omitted_rank_zero = false;
};

// One entry per double coset AsB with A ∩ sBs^-1 infinite.
DoubleCosetList double_cosets(const Extension& e, const SubgroupHandle& a, const SubgroupHandle& b);

// F as a free group when every factor is finite: the quotient F\T of the
// Bass-Serre tree has junctions Q, fvertices Q/pi(G_i) and edges Q x factors;
// its non-tree edges form a free basis.
class FreeKernel {
 public:
  explicit FreeKernel(const Extension& e);

  int rank() const { return rank_; }
  const Extension& extension() const { return *e_; }
  // The word for w in F's free basis; throws if w is not in F.
  FreeWord rewrite(const NormalForm& w) const;

 private:
  const Extension* e_;
  std::size_t factors_ = 0;
  std::vector<std::vector<std::size_t>> fvertex_of_;  // factor -> q -> fvertex id
  std::vector<int> generator_;                        // edge q*factors+i -> letter index or 0
  int rank_ = 0;
};

// rr(H ∩ F) through the free basis and Stallings graphs.
Integer stallings_kernel_rr(const FreeKernel& fk, const SubgroupHandle& h);

}  // namespace hnlab
