#include "hnlab/virtual.hpp"

#include <algorithm>
#include <set>

namespace hnlab {

Extension::Extension(std::shared_ptr<const Universe> u) : u_(std::move(u)) {
  for (QElem q = 0; q < u_->q_order(); ++q) section_.push_back(u_->section(q));
}

namespace {

std::vector<NormalForm> schreier_elements(const Universe& u, const std::vector<NormalForm>& gens,
                                          const std::map<QElem, NormalForm>& transversal) {
  std::vector<NormalForm> out;
  for (const auto& [q, aq] : transversal)
    for (const auto& h : gens) {
      const QElem t = u.q_mul(q, u.project(h));
      auto x = u.mul(u.mul(aq, h), u.inverse(transversal.at(t)));
      if (!x.empty()) out.push_back(std::move(x));
    }
  return out;
}

}  // namespace

SubgroupHandle sub_handle(const Extension& e, const std::vector<NormalForm>& gens) {
  const Universe& u = e.universe();
  SubgroupHandle h;
  for (const auto& g : gens)
    if (!g.empty()) h.generators.push_back(g);
  h.transversal.emplace(0, NormalForm{});
  std::vector<QElem> order{0};
  for (std::size_t pos = 0; pos < order.size(); ++pos)
    for (const auto& g : h.generators) {
      const QElem t = u.q_mul(order[pos], u.project(g));
      if (h.transversal.emplace(t, u.mul(h.transversal.at(order[pos]), g)).second) order.push_back(t);
    }
  for (const auto& [q, w] : h.transversal) h.image.push_back(q);
  h.kernel = ka_build(e.universe_ptr(), schreier_elements(u, h.generators, h.transversal));
  return h;
}

bool handle_member(const Extension& e, const SubgroupHandle& h, const NormalForm& g) {
  const Universe& u = e.universe();
  auto it = h.transversal.find(u.project(g));
  if (it == h.transversal.end()) return false;
  return ka_member(h.kernel, u.mul(u.inverse(it->second), g));
}

SubgroupHandle handle_conjugate(const Extension& e, const SubgroupHandle& h, const NormalForm& g) {
  std::vector<NormalForm> gens;
  for (const auto& x : h.generators) gens.push_back(e.universe().conjugate(g, x));
  return sub_handle(e, gens);
}

Rational rk_virtual(const SubgroupHandle& h) {
  return Rational(ka_rr(h.kernel), Integer(h.image.size()));
}

Rational total_rank(const Extension& e, const SubgroupHandle& h) {
  Rational sum = 0;
  for (QElem q = 0; q < e.n(); ++q) sum += rk_virtual(q == 0 ? h : handle_conjugate(e, h, e.section(q)));
  return sum;
}

SubgroupHandle intersect_general(const Extension& e, const SubgroupHandle& a, const NormalForm& s,
                                 const SubgroupHandle& b) {
  const Universe& u = e.universe();
  const SubgroupHandle bs = s.empty() ? b : handle_conjugate(e, b, s);
  SubgroupHandle out;
  out.kernel = ka_intersect(a.kernel, bs.kernel);
  out.generators = ka_generators(out.kernel);
  out.transversal.emplace(0, NormalForm{});
  for (QElem q : a.image) {
    if (q == 0 || !std::binary_search(bs.image.begin(), bs.image.end(), q)) continue;
    const auto z = u.mul(u.inverse(a.transversal.at(q)), bs.transversal.at(q));
    const auto f = ka_coset_intersect(a.kernel, z, bs.kernel);
    if (!f) continue;
    auto c = u.mul(a.transversal.at(q), *f);
    out.generators.push_back(c);
    out.transversal.emplace(q, std::move(c));
  }
  for (const auto& [q, w] : out.transversal) out.image.push_back(q);
  return out;
}

bool same_double_coset(const Extension& e, const SubgroupHandle& a, const NormalForm& g, const NormalForm& g2,
                       const SubgroupHandle& b) {
  if (g == g2) return true;
  const Universe& u = e.universe();
  // g2 in A g B iff A ∩ y B'' != {} with B'' = g B g^-1 and y = g2 g^-1.
  const SubgroupHandle bg = g.empty() ? b : handle_conjugate(e, b, g);
  const auto y = u.mul(g2, u.inverse(g));
  const QElem py = u.project(y);
  for (QElem r : bg.image) {
    const QElem q = u.q_mul(py, r);
    auto it = a.transversal.find(q);
    if (it == a.transversal.end()) continue;
    const auto z = u.mul(u.mul(u.inverse(it->second), y), bg.transversal.at(r));
    if (ka_coset_intersect(a.kernel, z, bg.kernel)) return true;
  }
  return false;
}

DoubleCosetList double_cosets(const Extension& e, const SubgroupHandle& a, const SubgroupHandle& b) {
  const Universe& u = e.universe();
  DoubleCosetList out;
  if (ka_kurosh_rank(a.kernel) == 0 || ka_kurosh_rank(b.kernel) == 0) return out;
  std::vector<NormalForm> candidates;
  for (QElem q = 0; q < e.n(); ++q) {
    const SubgroupHandle bq = q == 0 ? b : handle_conjugate(e, b, e.section(q));
    const auto pb = ka_pullback(a.kernel, bq.kernel);
    if (pb.omitted_rank_zero) out.omitted_rank_zero = true;
    for (const auto& c : pb.components) candidates.push_back(u.mul(c.witness, e.section(q)));
  }
  std::sort(candidates.begin(), candidates.end(), shortlex_less);
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  std::vector<NormalForm> kept;
  for (const auto& c : candidates) {
    bool fresh = true;
    for (const auto& k : kept)
      if (same_double_coset(e, a, k, c, b)) {
        fresh = false;
        break;
      }
    if (fresh) kept.push_back(c);
  }
  for (const auto& s : kept) out.entries.push_back(DoubleCosetEntry{s, intersect_general(e, a, s, b)});
  return out;
}

FreeKernel::FreeKernel(const Extension& e) : e_(&e) {
  const Universe& u = e.universe();
  if (!u.all_finite()) throw AlgebraError("the kernel is free only when every factor is finite");
  factors_ = u.num_factors();
  const std::size_t n = e.n();
  // Fvertices: cosets q pi(G_i), keyed by their least element.
  std::size_t nf = 0;
  fvertex_of_.assign(factors_, std::vector<std::size_t>(n));
  for (std::size_t i = 0; i < factors_; ++i) {
    std::map<QElem, std::size_t> ids;
    for (QElem q = 0; q < n; ++q) {
      QElem least = q;
      for (int x = 0; x < u.factor(i).order(); ++x) least = std::min(least, u.q_mul(q, u.q_from_letter(i, x)));
      auto [it, fresh] = ids.emplace(least, nf);
      if (fresh) ++nf;
      fvertex_of_[i][q] = it->second;
    }
  }
  // Spanning tree by BFS from junction 0; junction q has edges (q, i).
  const std::size_t edges = n * factors_;
  std::vector<bool> jseen(n, false), fseen(nf, false), tree(edges, false);
  std::vector<std::vector<std::size_t>> at_f(nf);
  for (QElem q = 0; q < n; ++q)
    for (std::size_t i = 0; i < factors_; ++i) at_f[fvertex_of_[i][q]].push_back(q * factors_ + i);
  std::vector<QElem> queue{0};
  jseen[0] = true;
  for (std::size_t pos = 0; pos < queue.size(); ++pos) {
    const QElem q = queue[pos];
    for (std::size_t i = 0; i < factors_; ++i) {
      const std::size_t f = fvertex_of_[i][q];
      if (fseen[f]) continue;
      fseen[f] = true;
      tree[q * factors_ + i] = true;
      for (auto ed : at_f[f]) {
        const QElem t = ed / factors_;
        if (jseen[t]) continue;
        jseen[t] = true;
        tree[ed] = true;
        queue.push_back(t);
      }
    }
  }
  generator_.assign(edges, 0);
  for (std::size_t ed = 0; ed < edges; ++ed)
    if (!tree[ed]) generator_[ed] = ++rank_;
}

FreeWord FreeKernel::rewrite(const NormalForm& w) const {
  const Universe& u = e_->universe();
  FreeWord out;
  QElem q = 0;
  for (const auto& l : w.letters()) {
    const std::size_t i = l.factor;
    if (int g = generator_[q * factors_ + i]) out.push_back(g);
    q = u.q_mul(q, u.q_from_letter(i, std::get<int>(l.elem)));
    if (int g = generator_[q * factors_ + i]) out.push_back(-g);
  }
  if (q != 0) throw AlgebraError("word is not in the kernel");
  return free_reduce(out);
}

Integer stallings_kernel_rr(const FreeKernel& fk, const SubgroupHandle& h) {
  std::vector<FreeWord> gens;
  for (const auto& x : schreier_elements(fk.extension().universe(), h.generators, h.transversal)) gens.push_back(fk.rewrite(x));
  return st_rr(st_build(fk.rank(), gens));
}

}  // namespace hnlab
