#include "hnlab/kurosh.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <numeric>
#include <set>

namespace hnlab {

namespace {

int elem_cmp(const Element& a, const Element& b) {
  if (a.index() != b.index()) return a.index() < b.index() ? -1 : 1;
  if (const int* x = std::get_if<int>(&a)) {
    const int y = std::get<int>(b);
    return *x < y ? -1 : (*x > y ? 1 : 0);
  }
  const auto& u = std::get<ZVec>(a);
  const auto& v = std::get<ZVec>(b);
  for (std::size_t c = 0; c < u.size() && c < v.size(); ++c) {
    if (u[c] < v[c]) return -1;
    if (v[c] < u[c]) return 1;
  }
  return u.size() < v.size() ? -1 : (u.size() > v.size() ? 1 : 0);
}

bool elem_less(const Element& a, const Element& b) { return elem_cmp(a, b) < 0; }

bool group_trivial(const VertexGroup& g) { return g.lattice.is_zero() && g.elements.size() <= 1; }

}  // namespace

// ---------------------------------------------------------------------------
// FactorGroups
// ---------------------------------------------------------------------------

VertexGroup FactorGroups::trivial(std::size_t i) const {
  const auto& f = u_->factor(i);
  if (f.is_finite()) return VertexGroup{Lattice(), {0}};
  return VertexGroup{Lattice(static_cast<std::size_t>(f.rank())), {}};
}

VertexGroup FactorGroups::whole(std::size_t i) const {
  const auto& f = u_->factor(i);
  if (f.is_finite()) {
    std::vector<int> all(static_cast<std::size_t>(f.order()));
    std::iota(all.begin(), all.end(), 0);
    return VertexGroup{Lattice(), all};
  }
  return VertexGroup{Lattice::full(static_cast<std::size_t>(f.rank())), {}};
}

bool FactorGroups::is_trivial(std::size_t, const VertexGroup& s) const { return group_trivial(s); }

bool FactorGroups::contains(std::size_t i, const VertexGroup& s, const Element& x) const {
  if (u_->factor(i).is_finite()) return std::binary_search(s.elements.begin(), s.elements.end(), std::get<int>(x));
  return s.lattice.contains(std::get<ZVec>(x));
}

VertexGroup FactorGroups::with(std::size_t i, const VertexGroup& s, const Element& x) const {
  const auto& f = u_->factor(i);
  if (f.is_finite()) {
    if (contains(i, s, x)) return s;
    std::vector<int> gens = s.elements;
    gens.push_back(std::get<int>(x));
    return VertexGroup{Lattice(), finite_subgroup_closure(f, gens)};
  }
  return VertexGroup{s.lattice.with(std::get<ZVec>(x)), {}};
}

VertexGroup FactorGroups::join(std::size_t i, const VertexGroup& s, const VertexGroup& t) const {
  const auto& f = u_->factor(i);
  if (f.is_finite()) {
    std::vector<int> gens = s.elements;
    gens.insert(gens.end(), t.elements.begin(), t.elements.end());
    return VertexGroup{Lattice(), finite_subgroup_closure(f, gens)};
  }
  return VertexGroup{s.lattice.join(t.lattice), {}};
}

VertexGroup FactorGroups::intersect(std::size_t i, const VertexGroup& s, const VertexGroup& t) const {
  if (u_->factor(i).is_finite()) {
    std::vector<int> out;
    std::set_intersection(s.elements.begin(), s.elements.end(), t.elements.begin(), t.elements.end(),
                          std::back_inserter(out));
    return VertexGroup{Lattice(), out};
  }
  return VertexGroup{lattice_intersect(s.lattice, t.lattice), {}};
}

VertexGroup FactorGroups::conjugate(std::size_t i, const Element& d, const VertexGroup& s) const {
  const auto& f = u_->factor(i);
  if (!f.is_finite()) return s;
  const int x = std::get<int>(d);
  const int xi = f.inv(x);
  std::vector<int> out;
  out.reserve(s.elements.size());
  for (int y : s.elements) out.push_back(f.mul(f.mul(x, y), xi));
  std::sort(out.begin(), out.end());
  return VertexGroup{Lattice(), out};
}

Element FactorGroups::coset_rep(std::size_t i, const VertexGroup& s, const Element& c) const {
  const auto& f = u_->factor(i);
  if (f.is_finite()) {
    const int x = std::get<int>(c);
    int best = f.order();
    for (int y : s.elements) best = std::min(best, f.mul(y, x));
    return best;
  }
  return s.lattice.reduce(std::get<ZVec>(c));
}

Element FactorGroups::double_coset_rep(std::size_t i, const VertexGroup& s, const Element& d,
                                       const VertexGroup& t) const {
  const auto& f = u_->factor(i);
  if (f.is_finite()) {
    const int x = std::get<int>(d);
    int best = f.order();
    for (int y : s.elements)
      for (int z : t.elements) best = std::min(best, f.mul(f.mul(y, x), z));
    return best;
  }
  return s.lattice.join(t.lattice).reduce(std::get<ZVec>(d));
}

std::optional<Element> FactorGroups::coset_meet(std::size_t i, const VertexGroup& s, const Element& a,
                                                const Element& d, const VertexGroup& t,
                                                const Element& b) const {
  const auto& f = u_->factor(i);
  if (f.is_finite()) {
    const int di = f.inv(std::get<int>(d));
    const int bi = f.inv(std::get<int>(b));
    for (int y : s.elements) {
      const int x = f.mul(y, std::get<int>(a));
      if (std::binary_search(t.elements.begin(), t.elements.end(), f.mul(f.mul(di, x), bi))) return x;
    }
    return std::nullopt;
  }
  // a + sigma = d + tau + b with sigma in S, tau in T.
  const auto& av = std::get<ZVec>(a);
  const auto& dv = std::get<ZVec>(d);
  const auto& bv = std::get<ZVec>(b);
  const std::size_t k = av.size();
  ZVec w(k);
  for (std::size_t c = 0; c < k; ++c) w[c] = dv[c] + bv[c] - av[c];
  std::vector<ZVec> rows = s.lattice.basis();
  for (const auto& r : t.lattice.basis()) {
    ZVec n(k);
    for (std::size_t c = 0; c < k; ++c) n[c] = -r[c];
    rows.push_back(n);
  }
  auto coef = solve_in_span(rows, w, k);
  if (!coef) return std::nullopt;
  ZVec x = av;
  for (std::size_t l = 0; l < s.lattice.rank(); ++l)
    for (std::size_t c = 0; c < k; ++c) x[c] += (*coef)[l] * s.lattice.basis()[l][c];
  return x;
}

std::optional<std::vector<Element>> FactorGroups::double_cosets(std::size_t i, const VertexGroup& s,
                                                                const VertexGroup& t) const {
  const auto& f = u_->factor(i);
  std::vector<Element> out;
  if (f.is_finite()) {
    std::set<int> seen;
    for (int x = 0; x < f.order(); ++x) {
      const int r = std::get<int>(double_coset_rep(i, s, x, t));
      if (seen.insert(r).second) out.push_back(r);
    }
    return out;
  }
  const Lattice m = s.lattice.join(t.lattice);
  const std::size_t k = m.dim();
  if (m.rank() < k) return std::nullopt;
  // Upper-triangular basis with pivots on the diagonal: the box of remainders
  // is a transversal.
  std::vector<Integer> pivot(k);
  for (std::size_t r = 0; r < k; ++r) pivot[r] = m.basis()[r][m.pivots()[r]];
  ZVec x(k, Integer(0));
  while (true) {
    out.push_back(x);
    std::size_t c = 0;
    while (c < k) {
      x[c] += 1;
      if (x[c] < pivot[c]) break;
      x[c] = 0;
      ++c;
    }
    if (c == k) break;
  }
  return out;
}

std::vector<Element> FactorGroups::generators(std::size_t i, const VertexGroup& s) const {
  const auto& f = u_->factor(i);
  std::vector<Element> out;
  if (f.is_finite()) {
    std::vector<int> gens, closure{0};
    for (int x : s.elements) {
      if (std::binary_search(closure.begin(), closure.end(), x)) continue;
      gens.push_back(x);
      closure = finite_subgroup_closure(f, gens);
      out.emplace_back(x);
    }
    return out;
  }
  for (const auto& r : s.lattice.basis()) out.emplace_back(r);
  return out;
}

// ---------------------------------------------------------------------------
// KuroshAutomaton
// ---------------------------------------------------------------------------

KuroshAutomaton KuroshAutomaton::assemble(std::shared_ptr<const Universe> u, std::size_t num_junctions,
                                          std::vector<FVertex> fvertices, std::vector<KEdge> edges) {
  KuroshAutomaton a;
  a.universe_ = std::move(u);
  a.num_junctions_ = num_junctions;
  a.fvertices_ = std::move(fvertices);
  a.edges_ = std::move(edges);
  a.folded_ = true;
  a.index();
  return a;
}

void KuroshAutomaton::index() {
  at_junction_.assign(num_junctions_, std::vector<int>(universe_->num_factors(), -1));
  at_fvertex_.assign(fvertices_.size(), {});
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const auto& ed = edges_[e];
    const std::size_t i = fvertices_[ed.fvertex].factor;
    if (at_junction_[ed.junction][i] >= 0) folded_ = false;
    at_junction_[ed.junction][i] = static_cast<int>(e);
    at_fvertex_[ed.fvertex].push_back(e);
  }
  for (auto& list : at_fvertex_)
    std::sort(list.begin(), list.end(),
              [&](std::size_t x, std::size_t y) { return elem_less(edges_[x].label, edges_[y].label); });
}

int KuroshAutomaton::junction_edge(std::size_t j, std::size_t factor) const { return at_junction_[j][factor]; }

int KuroshAutomaton::fvertex_edge(std::size_t v, const Element& label) const {
  const auto& list = at_fvertex_[v];
  auto it = std::lower_bound(list.begin(), list.end(), label,
                             [&](std::size_t e, const Element& l) { return elem_less(edges_[e].label, l); });
  if (it == list.end() || elem_cmp(edges_[*it].label, label) != 0) return -1;
  return static_cast<int>(*it);
}

std::size_t KuroshAutomaton::num_nontrivial_fvertices() const {
  return static_cast<std::size_t>(
      std::count_if(fvertices_.begin(), fvertices_.end(), [](const FVertex& v) { return !group_trivial(v.group); }));
}

// ---------------------------------------------------------------------------
// KuroshFolder
// ---------------------------------------------------------------------------

KuroshFolder::KuroshFolder(std::shared_ptr<const Universe> u, KuroshBuildOptions opts)
    : u_(std::move(u)), groups_(*u_), opts_(opts) {}

KuroshFolder::KuroshFolder(const KuroshAutomaton& a, KuroshBuildOptions opts)
    : u_(a.universe_ptr()), groups_(*u_), opts_(opts) {
  for (std::size_t j = 0; j < a.num_junctions(); ++j) add_junction();
  for (const auto& v : a.fvertices()) add_fvertex(v.factor, v.group);
  for (const auto& e : a.edges()) add_edge(e.junction, e.fvertex, e.label);
}

std::size_t KuroshFolder::add_junction() {
  jparent_.push_back(jparent_.size());
  return jparent_.size() - 1;
}

std::size_t KuroshFolder::add_fvertex(std::size_t factor, VertexGroup g) {
  fparent_.push_back(fparent_.size());
  fv_.push_back(FVertex{factor, std::move(g)});
  return fv_.size() - 1;
}

void KuroshFolder::add_edge(std::size_t j, std::size_t f, Element label) {
  edges_.push_back(KEdge{j, f, std::move(label)});
  alive_.push_back(true);
}

std::size_t KuroshFolder::find_j(std::size_t j) {
  while (jparent_[j] != j) j = jparent_[j] = jparent_[jparent_[j]];
  return j;
}

std::size_t KuroshFolder::find_f(std::size_t f) {
  while (fparent_[f] != f) f = fparent_[f] = fparent_[fparent_[f]];
  return f;
}

void KuroshFolder::add_path(std::size_t from, const NormalForm& w, std::size_t to) {
  for (const auto& l : w.letters()) u_->check_letter(l);
  if (w.empty()) {
    const std::size_t a = find_j(from), b = find_j(to);
    if (a != b) jparent_[std::max(a, b)] = std::min(a, b);
    return;
  }
  std::size_t cur = from;
  for (std::size_t s = 0; s < w.size(); ++s) {
    const std::size_t i = w[s].factor;
    const std::size_t f = add_fvertex(i, groups_.trivial(i));
    add_edge(cur, f, u_->identity(i));
    const std::size_t next = s + 1 == w.size() ? to : add_junction();
    add_edge(next, f, w[s].elem);
    cur = next;
  }
}

void KuroshFolder::normalize_edges() {
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    if (!alive_[e]) continue;
    auto& ed = edges_[e];
    ed.junction = find_j(ed.junction);
    ed.fvertex = find_f(ed.fvertex);
    const auto& v = fv_[ed.fvertex];
    ed.label = groups_.coset_rep(v.factor, v.group, ed.label);
  }
}

static std::vector<std::size_t> live_edges(const std::vector<bool>& alive) {
  std::vector<std::size_t> out;
  for (std::size_t e = 0; e < alive.size(); ++e)
    if (alive[e]) out.push_back(e);
  return out;
}

bool KuroshFolder::step_f1() {
  auto ids = live_edges(alive_);
  std::sort(ids.begin(), ids.end(), [&](std::size_t x, std::size_t y) {
    const auto& a = edges_[x];
    const auto& b = edges_[y];
    if (a.fvertex != b.fvertex) return a.fvertex < b.fvertex;
    const int c = elem_cmp(a.label, b.label);
    if (c != 0) return c < 0;
    return a.junction < b.junction;
  });
  bool changed = false;
  for (std::size_t p = 0; p < ids.size();) {
    std::size_t q = p + 1;
    const auto& first = edges_[ids[p]];
    while (q < ids.size() && edges_[ids[q]].fvertex == first.fvertex &&
           elem_cmp(edges_[ids[q]].label, first.label) == 0) {
      const std::size_t a = find_j(first.junction), b = find_j(edges_[ids[q]].junction);
      if (a != b) jparent_[std::max(a, b)] = std::min(a, b);
      alive_[ids[q]] = false;
      changed = true;
      ++q;
    }
    p = q;
  }
  return changed;
}

bool KuroshFolder::step_f2() {
  auto ids = live_edges(alive_);
  auto factor_of = [&](std::size_t e) { return fv_[edges_[e].fvertex].factor; };
  std::sort(ids.begin(), ids.end(), [&](std::size_t x, std::size_t y) {
    const auto& a = edges_[x];
    const auto& b = edges_[y];
    if (a.junction != b.junction) return a.junction < b.junction;
    if (factor_of(x) != factor_of(y)) return factor_of(x) < factor_of(y);
    return a.fvertex < b.fvertex;
  });
  std::set<std::size_t> touched;
  std::map<std::size_t, std::pair<std::size_t, Element>> merge;  // v2 -> (v1, d)
  for (std::size_t p = 0; p < ids.size();) {
    std::size_t q = p + 1;
    while (q < ids.size() && edges_[ids[q]].junction == edges_[ids[p]].junction &&
           factor_of(ids[q]) == factor_of(ids[p]))
      ++q;
    for (std::size_t r = p + 1; r < q; ++r) {
      const auto& e1 = edges_[ids[p]];
      const auto& e2 = edges_[ids[r]];
      if (e1.fvertex == e2.fvertex) continue;
      if (touched.count(e1.fvertex) || touched.count(e2.fvertex)) break;
      const std::size_t i = factor_of(ids[p]);
      merge.emplace(e2.fvertex, std::make_pair(e1.fvertex, u_->mul(i, e1.label, u_->inv(i, e2.label))));
      touched.insert(e1.fvertex);
      touched.insert(e2.fvertex);
      break;
    }
    p = q;
  }
  if (merge.empty()) return false;
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    if (!alive_[e]) continue;
    auto it = merge.find(edges_[e].fvertex);
    if (it == merge.end()) continue;
    const std::size_t i = fv_[edges_[e].fvertex].factor;
    edges_[e].label = u_->mul(i, it->second.second, edges_[e].label);
    edges_[e].fvertex = it->second.first;
  }
  for (const auto& [v2, m] : merge) {
    const auto& [v1, d] = m;
    const std::size_t i = fv_[v1].factor;
    fv_[v1].group = groups_.join(i, fv_[v1].group, groups_.conjugate(i, d, fv_[v2].group));
    fparent_[v2] = v1;
  }
  return true;
}

bool KuroshFolder::step_f3() {
  auto ids = live_edges(alive_);
  std::sort(ids.begin(), ids.end(), [&](std::size_t x, std::size_t y) {
    const auto& a = edges_[x];
    const auto& b = edges_[y];
    if (a.junction != b.junction) return a.junction < b.junction;
    return a.fvertex < b.fvertex;
  });
  bool changed = false;
  for (std::size_t p = 0; p < ids.size();) {
    std::size_t q = p + 1;
    while (q < ids.size() && edges_[ids[q]].junction == edges_[ids[p]].junction &&
           edges_[ids[q]].fvertex == edges_[ids[p]].fvertex)
      ++q;
    if (q - p > 1) {
      auto& v = fv_[edges_[ids[p]].fvertex];
      const Element c1i = u_->inv(v.factor, edges_[ids[p]].label);
      for (std::size_t r = p + 1; r < q; ++r) v.group = groups_.with(v.factor, v.group, u_->mul(v.factor, edges_[ids[r]].label, c1i));
      changed = true;
    }
    p = q;
  }
  return changed;
}

bool KuroshFolder::nondeterministic_accepts(const NormalForm& w) {
  std::set<std::size_t> cur{find_j(base_)};
  for (const auto& l : w.letters()) {
    std::set<std::size_t> next;
    for (std::size_t e1 = 0; e1 < edges_.size(); ++e1) {
      if (!alive_[e1] || !cur.count(find_j(edges_[e1].junction))) continue;
      const std::size_t f = find_f(edges_[e1].fvertex);
      const auto& v = fv_[f];
      if (v.factor != l.factor) continue;
      const Element target = groups_.coset_rep(v.factor, v.group, u_->mul(v.factor, edges_[e1].label, l.elem));
      for (std::size_t e2 = 0; e2 < edges_.size(); ++e2) {
        if (!alive_[e2] || find_f(edges_[e2].fvertex) != f) continue;
        if (elem_cmp(groups_.coset_rep(v.factor, v.group, edges_[e2].label), target) == 0)
          next.insert(find_j(edges_[e2].junction));
      }
    }
    cur = std::move(next);
  }
  return cur.count(find_j(base_)) > 0;
}

void KuroshFolder::check_language(const char* move) {
  if (!opts_.check_moves) return;
  for (const auto& w : expected_)
    if (!nondeterministic_accepts(w))
      throw KuroshError(std::string("fold move ") + move + " lost a generator " + to_string(*u_, w));
}

void KuroshFolder::fold() {
  check_language("start");
  while (true) {
    normalize_edges();
    if (step_f1()) {
      check_language("F1");
      continue;
    }
    if (step_f2()) {
      check_language("F2");
      continue;
    }
    if (step_f3()) {
      check_language("F3");
      continue;
    }
    break;
  }
}

KuroshAutomaton KuroshFolder::finish(const std::vector<std::size_t>& marked) {
  fold();
  const std::size_t nj = jparent_.size(), nf = fv_.size();
  std::vector<bool> jalive(nj, false), falive(nf, false), keep(nj, false);
  for (std::size_t j = 0; j < nj; ++j) jalive[j] = find_j(j) == j;
  for (std::size_t f = 0; f < nf; ++f) falive[f] = find_f(f) == f;
  for (auto m : marked) keep[find_j(m)] = true;
  std::vector<std::vector<std::size_t>> jedges(nj), fedges(nf);
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    if (!alive_[e]) continue;
    jedges[edges_[e].junction].push_back(e);
    fedges[edges_[e].fvertex].push_back(e);
  }

  // Trim: unmarked junctions of degree <= 1 and trivial fvertices of degree
  // <= 1 carry no loops.
  auto live_degree = [&](const std::vector<std::size_t>& list) {
    return static_cast<std::size_t>(std::count_if(list.begin(), list.end(), [&](std::size_t e) { return alive_[e]; }));
  };
  std::deque<std::pair<bool, std::size_t>> queue;  // (is junction, id)
  for (std::size_t j = 0; j < nj; ++j) queue.emplace_back(true, j);
  for (std::size_t f = 0; f < nf; ++f) queue.emplace_back(false, f);
  while (!queue.empty()) {
    const auto [is_j, x] = queue.front();
    queue.pop_front();
    if (is_j) {
      if (!jalive[x] || keep[x] || live_degree(jedges[x]) > 1) continue;
      jalive[x] = false;
      for (auto e : jedges[x])
        if (alive_[e]) {
          alive_[e] = false;
          queue.emplace_back(false, edges_[e].fvertex);
        }
    } else {
      if (!falive[x]) continue;
      const std::size_t d = live_degree(fedges[x]);
      if (d > 1 || (d == 1 && !group_trivial(fv_[x].group))) continue;
      falive[x] = false;
      for (auto e : fedges[x])
        if (alive_[e]) {
          alive_[e] = false;
          queue.emplace_back(true, edges_[e].junction);
        }
    }
  }

  // Canonical numbering: BFS from the basepoint; junction edges taken in
  // factor order, fvertex edges in label order after recoordinatising so the
  // discovering edge carries the identity.
  const std::size_t root = find_j(marked.at(0));
  std::vector<int> jid(nj, -1), fid(nf, -1);
  std::vector<std::size_t> jorder{root};
  std::vector<FVertex> out_fv;
  std::vector<KEdge> out_edges;
  jid[root] = 0;
  for (std::size_t pos = 0; pos < jorder.size(); ++pos) {
    const std::size_t j = jorder[pos];
    std::vector<std::size_t> es;
    for (auto e : jedges[j])
      if (alive_[e]) es.push_back(e);
    std::sort(es.begin(), es.end(),
              [&](std::size_t x, std::size_t y) { return fv_[edges_[x].fvertex].factor < fv_[edges_[y].fvertex].factor; });
    for (auto e : es) {
      const std::size_t f = edges_[e].fvertex;
      if (fid[f] >= 0) continue;
      fid[f] = static_cast<int>(out_fv.size());
      const std::size_t i = fv_[f].factor;
      const Element y = u_->inv(i, edges_[e].label);
      FVertex nv{i, groups_.conjugate(i, y, fv_[f].group)};
      std::vector<std::pair<Element, std::size_t>> labelled;
      for (auto e2 : fedges[f])
        if (alive_[e2]) labelled.emplace_back(groups_.coset_rep(i, nv.group, u_->mul(i, y, edges_[e2].label)), e2);
      std::sort(labelled.begin(), labelled.end(),
                [](const auto& a, const auto& b) { return elem_less(a.first, b.first); });
      for (auto& [label, e2] : labelled) {
        const std::size_t j2 = edges_[e2].junction;
        if (jid[j2] < 0) {
          jid[j2] = static_cast<int>(jorder.size());
          jorder.push_back(j2);
        }
        out_edges.push_back(KEdge{static_cast<std::size_t>(jid[j2]), static_cast<std::size_t>(fid[f]), label});
      }
      out_fv.push_back(std::move(nv));
    }
  }
  marked_result_.clear();
  for (auto m : marked) marked_result_.push_back(jid[find_j(m)]);
  return KuroshAutomaton::assemble(u_, jorder.size(), std::move(out_fv), std::move(out_edges));
}

// ---------------------------------------------------------------------------
// Queries
// ---------------------------------------------------------------------------

KuroshAutomaton ka_build(std::shared_ptr<const Universe> u, const std::vector<NormalForm>& generators,
                         KuroshBuildOptions opts) {
  KuroshFolder folder(std::move(u), opts);
  const std::size_t base = folder.add_junction();
  for (const auto& g : generators) {
    folder.add_path(base, g, base);
    folder.expect_loop(g);
  }
  return folder.finish({base});
}

Integer ka_kurosh_rank(const KuroshAutomaton& a) {
  if (!a.folded()) throw KuroshError("rank of an unfolded automaton");
  const Integer e = a.edges().size();
  const Integer v = a.num_junctions() + a.fvertices().size();
  return e - v + 1 + Integer(a.num_nontrivial_fvertices());
}

Integer ka_rr(const KuroshAutomaton& a) {
  const Integer kr = ka_kurosh_rank(a);
  return kr > 0 ? Integer(kr - 1) : Integer(0);
}

bool ka_member(const KuroshAutomaton& a, const NormalForm& w) {
  const Universe& u = a.universe();
  FactorGroups groups(u);
  std::size_t j = KuroshAutomaton::basepoint();
  for (const auto& l : w.letters()) {
    u.check_letter(l);
    const int e = a.junction_edge(j, l.factor);
    if (e < 0) return false;
    const auto& ed = a.edges()[static_cast<std::size_t>(e)];
    const auto& v = a.fvertices()[ed.fvertex];
    const int e2 = a.fvertex_edge(ed.fvertex, groups.coset_rep(l.factor, v.group, u.mul(l.factor, ed.label, l.elem)));
    if (e2 < 0) return false;
    j = a.edges()[static_cast<std::size_t>(e2)].junction;
  }
  return j == KuroshAutomaton::basepoint();
}

namespace {

struct Spanning {
  std::vector<NormalForm> path;   // per junction
  std::vector<NormalForm> frame;  // per fvertex: element vertex of edge c is frame * c
  std::vector<bool> tree;         // per edge
};

Spanning spanning(const KuroshAutomaton& a) {
  const Universe& u = a.universe();
  Spanning s;
  s.path.resize(a.num_junctions());
  s.frame.resize(a.fvertices().size());
  s.tree.assign(a.edges().size(), false);
  std::vector<bool> jseen(a.num_junctions(), false), fseen(a.fvertices().size(), false);
  std::deque<std::size_t> queue{KuroshAutomaton::basepoint()};
  jseen[KuroshAutomaton::basepoint()] = true;
  while (!queue.empty()) {
    const std::size_t j = queue.front();
    queue.pop_front();
    for (std::size_t i = 0; i < u.num_factors(); ++i) {
      const int e = a.junction_edge(j, i);
      if (e < 0) continue;
      const auto& ed = a.edges()[static_cast<std::size_t>(e)];
      if (fseen[ed.fvertex]) continue;
      fseen[ed.fvertex] = true;
      s.tree[static_cast<std::size_t>(e)] = true;
      s.frame[ed.fvertex] = u.mul(s.path[j], u.letter(i, u.inv(i, ed.label)));
      for (auto e2 : a.edges_at_fvertex(ed.fvertex)) {
        const auto& o = a.edges()[e2];
        if (jseen[o.junction]) continue;
        jseen[o.junction] = true;
        s.tree[e2] = true;
        s.path[o.junction] = u.mul(s.frame[ed.fvertex], u.letter(i, o.label));
        queue.push_back(o.junction);
      }
    }
  }
  return s;
}

}  // namespace

std::vector<NormalForm> ka_generators(const KuroshAutomaton& a) {
  const Universe& u = a.universe();
  FactorGroups groups(u);
  const Spanning s = spanning(a);
  std::vector<NormalForm> out;
  for (std::size_t e = 0; e < a.edges().size(); ++e) {
    if (s.tree[e]) continue;
    const auto& ed = a.edges()[e];
    const std::size_t i = a.fvertices()[ed.fvertex].factor;
    auto g = u.mul(u.mul(s.frame[ed.fvertex], u.letter(i, ed.label)), u.inverse(s.path[ed.junction]));
    if (!g.empty()) out.push_back(std::move(g));
  }
  for (std::size_t v = 0; v < a.fvertices().size(); ++v) {
    const auto& fv = a.fvertices()[v];
    for (const auto& x : groups.generators(fv.factor, fv.group))
      out.push_back(u.conjugate(s.frame[v], u.letter(fv.factor, x)));
  }
  return out;
}

std::vector<NormalForm> ka_junction_paths(const KuroshAutomaton& a) { return spanning(a).path; }

KuroshAutomaton ka_conjugate(const KuroshAutomaton& a, const NormalForm& g) {
  const Universe& u = a.universe();
  std::vector<NormalForm> gens;
  for (const auto& x : ka_generators(a)) gens.push_back(u.conjugate(g, x));
  return ka_build(a.universe_ptr(), gens);
}

// ---------------------------------------------------------------------------
// Products
// ---------------------------------------------------------------------------

namespace {

struct ProductKey {
  std::size_t va, vb;
  Element d;
  friend bool operator<(const ProductKey& x, const ProductKey& y) {
    if (x.va != y.va) return x.va < y.va;
    if (x.vb != y.vb) return x.vb < y.vb;
    return elem_less(x.d, y.d);
  }
};

// Junction (ua, ub) has index ua * nb + ub. Every pair is present, including
// isolated ones.
struct Product {
  std::size_t na = 0, nb = 0;
  std::vector<FVertex> fv;
  std::vector<KEdge> edges;
  std::map<ProductKey, std::size_t> keys;
};

Product build_product(const KuroshAutomaton& a, const KuroshAutomaton& b) {
  if (a.universe_ptr() != b.universe_ptr()) throw KuroshError("automata over different universes");
  const Universe& u = a.universe();
  FactorGroups groups(u);
  Product p;
  p.na = a.num_junctions();
  p.nb = b.num_junctions();
  for (std::size_t ua = 0; ua < p.na; ++ua)
    for (std::size_t ub = 0; ub < p.nb; ++ub)
      for (std::size_t i = 0; i < u.num_factors(); ++i) {
        const int ea = a.junction_edge(ua, i), eb = b.junction_edge(ub, i);
        if (ea < 0 || eb < 0) continue;
        const auto& xa = a.edges()[static_cast<std::size_t>(ea)];
        const auto& xb = b.edges()[static_cast<std::size_t>(eb)];
        const auto& sa = a.fvertices()[xa.fvertex].group;
        const auto& sb = b.fvertices()[xb.fvertex].group;
        const Element delta = u.mul(i, xa.label, u.inv(i, xb.label));
        ProductKey key{xa.fvertex, xb.fvertex, groups.double_coset_rep(i, sa, delta, sb)};
        auto it = p.keys.find(key);
        if (it == p.keys.end()) {
          it = p.keys.emplace(key, p.fv.size()).first;
          p.fv.push_back(FVertex{i, groups.intersect(i, sa, groups.conjugate(i, key.d, sb))});
        }
        const auto label = groups.coset_meet(i, sa, xa.label, key.d, sb, xb.label);
        if (!label) throw KuroshError("internal: empty coset meet in product");
        p.edges.push_back(KEdge{ua * p.nb + ub, it->second, groups.coset_rep(i, p.fv[it->second].group, *label)});
      }
  return p;
}

struct Components {
  std::vector<std::vector<std::size_t>> junctions, fvertices, edges;
};

Components components(const Product& p) {
  const std::size_t nj = p.na * p.nb;
  std::vector<std::size_t> parent(nj + p.fv.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& e : p.edges) {
    const std::size_t x = find(e.junction), y = find(nj + e.fvertex);
    if (x != y) parent[std::max(x, y)] = std::min(x, y);
  }
  std::map<std::size_t, std::size_t> slot;
  Components c;
  auto at = [&](std::size_t node) {
    auto [it, fresh] = slot.emplace(find(node), c.junctions.size());
    if (fresh) {
      c.junctions.emplace_back();
      c.fvertices.emplace_back();
      c.edges.emplace_back();
    }
    return it->second;
  };
  for (std::size_t j = 0; j < nj; ++j) c.junctions[at(j)].push_back(j);
  for (std::size_t f = 0; f < p.fv.size(); ++f) c.fvertices[at(nj + f)].push_back(f);
  for (std::size_t e = 0; e < p.edges.size(); ++e) c.edges[at(p.edges[e].junction)].push_back(e);
  return c;
}

// Component `k` as an automaton with junction `base` as basepoint.
KuroshAutomaton extract(const Product& p, const Components& c, std::size_t k, std::size_t base,
                        std::shared_ptr<const Universe> u) {
  std::map<std::size_t, std::size_t> jmap{{base, 0}}, fmap;
  for (auto j : c.junctions[k])
    if (j != base) jmap.emplace(j, jmap.size());
  std::vector<FVertex> fv;
  for (auto f : c.fvertices[k]) {
    fmap.emplace(f, fv.size());
    fv.push_back(p.fv[f]);
  }
  std::vector<KEdge> edges;
  for (auto e : c.edges[k]) {
    const auto& ed = p.edges[e];
    edges.push_back(KEdge{jmap.at(ed.junction), fmap.at(ed.fvertex), ed.label});
  }
  return KuroshAutomaton::assemble(std::move(u), jmap.size(), std::move(fv), std::move(edges));
}

}  // namespace

KuroshPullback ka_pullback(const KuroshAutomaton& a, const KuroshAutomaton& b) {
  const Product p = build_product(a, b);
  const Components comp = components(p);
  const Universe& u = a.universe();
  FactorGroups groups(u);
  const Spanning sa = spanning(a), sb = spanning(b);
  KuroshPullback out;
  for (std::size_t k = 0; k < comp.junctions.size(); ++k) {
    if (comp.junctions[k].empty()) continue;
    std::size_t nontrivial = 0;
    for (auto f : comp.fvertices[k]) nontrivial += group_trivial(p.fv[f].group) ? 0 : 1;
    const long kr = static_cast<long>(comp.edges[k].size()) -
                    static_cast<long>(comp.junctions[k].size() + comp.fvertices[k].size()) + 1 +
                    static_cast<long>(nontrivial);
    if (kr < 1) continue;
    std::size_t best = comp.junctions[k][0];
    NormalForm witness;
    bool first = true;
    for (auto j : comp.junctions[k]) {
      auto s = u.mul(sa.path[j / p.nb], u.inverse(sb.path[j % p.nb]));
      if (first || shortlex_less(s, witness)) {
        witness = std::move(s);
        best = j;
        first = false;
      }
    }
    const auto loops = ka_generators(extract(p, comp, k, best, a.universe_ptr()));
    std::vector<NormalForm> gens;
    for (const auto& x : loops) gens.push_back(u.conjugate(sa.path[best / p.nb], x));
    out.components.push_back(KuroshComponent{witness, ka_build(a.universe_ptr(), gens)});
  }
  // Product fvertices with no junction pairs: double cosets of vertex groups
  // not met by any edge pair.
  for (std::size_t va = 0; va < a.fvertices().size(); ++va)
    for (std::size_t vb = 0; vb < b.fvertices().size(); ++vb) {
      const auto& fa = a.fvertices()[va];
      const auto& fb = b.fvertices()[vb];
      if (fa.factor != fb.factor) continue;
      const std::size_t i = fa.factor;
      const auto classes = groups.double_cosets(i, fa.group, fb.group);
      if (!classes) {
        if (!group_trivial(groups.intersect(i, fa.group, fb.group))) out.omitted_rank_zero = true;
        continue;
      }
      for (const auto& d : *classes) {
        if (p.keys.count(ProductKey{va, vb, d})) continue;
        const auto sp = groups.intersect(i, fa.group, groups.conjugate(i, d, fb.group));
        if (group_trivial(sp)) continue;
        std::vector<NormalForm> gens;
        for (const auto& x : groups.generators(i, sp)) gens.push_back(u.conjugate(sa.frame[va], u.letter(i, x)));
        auto witness = u.mul(u.mul(sa.frame[va], u.letter(i, d)), u.inverse(sb.frame[vb]));
        out.components.push_back(KuroshComponent{witness, ka_build(a.universe_ptr(), gens)});
      }
    }
  std::sort(out.components.begin(), out.components.end(),
            [](const KuroshComponent& x, const KuroshComponent& y) { return shortlex_less(x.witness, y.witness); });
  return out;
}

KuroshAutomaton ka_intersect(const KuroshAutomaton& a, const KuroshAutomaton& b) {
  const Product p = build_product(a, b);
  const Components comp = components(p);
  for (std::size_t k = 0; k < comp.junctions.size(); ++k)
    if (!comp.junctions[k].empty() && comp.junctions[k][0] == 0)
      return ka_build(a.universe_ptr(), ka_generators(extract(p, comp, k, 0, a.universe_ptr())));
  throw KuroshError("internal: basepoint pair missing");
}

std::optional<NormalForm> ka_coset_intersect(const KuroshAutomaton& k1, const NormalForm& z,
                                             const KuroshAutomaton& k2) {
  if (k1.universe_ptr() != k2.universe_ptr()) throw KuroshError("automata over different universes");
  const Universe& u = k1.universe();
  KuroshFolder folder(k2);
  const std::size_t tip = folder.add_junction();
  folder.add_path(tip, z, KuroshAutomaton::basepoint());
  const auto stem = folder.finish({KuroshAutomaton::basepoint(), tip});
  const auto start_b = static_cast<std::size_t>(folder.marked_result()[1]);
  const Product p = build_product(k1, stem);
  const std::size_t start = start_b, goal = 0;
  if (start == goal) return NormalForm{};
  std::vector<std::vector<std::size_t>> jedges(p.na * p.nb), fedges(p.fv.size());
  for (std::size_t e = 0; e < p.edges.size(); ++e) {
    jedges[p.edges[e].junction].push_back(e);
    fedges[p.edges[e].fvertex].push_back(e);
  }
  std::vector<int> via(p.na * p.nb, -1);  // incoming (edge in, edge out) packed as out edge
  std::vector<int> prev_in(p.na * p.nb, -1);
  std::vector<bool> seen(p.na * p.nb, false);
  std::deque<std::size_t> queue{start};
  seen[start] = true;
  while (!queue.empty() && !seen[goal]) {
    const std::size_t j = queue.front();
    queue.pop_front();
    for (auto e1 : jedges[j])
      for (auto e2 : fedges[p.edges[e1].fvertex]) {
        const std::size_t t = p.edges[e2].junction;
        if (seen[t]) continue;
        seen[t] = true;
        prev_in[t] = static_cast<int>(e1);
        via[t] = static_cast<int>(e2);
        queue.push_back(t);
      }
  }
  if (!seen[goal]) return std::nullopt;
  std::vector<std::pair<std::size_t, std::size_t>> hops;
  for (std::size_t t = goal; t != start;) {
    const auto e1 = static_cast<std::size_t>(prev_in[t]);
    hops.emplace_back(e1, static_cast<std::size_t>(via[t]));
    t = p.edges[e1].junction;
  }
  std::reverse(hops.begin(), hops.end());
  NormalForm w;
  for (const auto& [e1, e2] : hops) {
    const std::size_t i = p.fv[p.edges[e1].fvertex].factor;
    w = u.mul(w, u.letter(i, u.mul(i, u.inv(i, p.edges[e1].label), p.edges[e2].label)));
  }
  return w;
}

}  // namespace hnlab
