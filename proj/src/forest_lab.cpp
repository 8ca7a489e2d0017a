#include "hnlab/forest_lab.hpp"

#include "hnlab/random.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

namespace hnlab {

// ---------------------------------------------------------------------------
// Finite groups

FiniteGroup::FiniteGroup(std::string name, std::vector<std::vector<int>> table)
    : name_(std::move(name)), table_(std::move(table)) {
  const int n = order();
  if (n == 0) throw ForestError("empty group table");
  for (const auto& row : table_) {
    if (static_cast<int>(row.size()) != n) throw ForestError("group table is not square");
    for (int x : row)
      if (x < 0 || x >= n) throw ForestError("group table entry out of range");
  }
  for (int g = 0; g < n; ++g)
    if (table_[0][g] != g || table_[g][0] != g) throw ForestError("element 0 is not the identity");
  inverse_.assign(n, -1);
  for (int g = 0; g < n; ++g)
    for (int h = 0; h < n; ++h)
      if (table_[g][h] == 0) inverse_[g] = h;
  for (int g = 0; g < n; ++g)
    if (inverse_[g] < 0 || table_[inverse_[g]][g] != 0) throw ForestError("missing inverse");
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        if (table_[table_[a][b]][c] != table_[a][table_[b][c]]) throw ForestError("table is not associative");
}

namespace {

using Tuple = std::vector<int>;

// Closure of `gens` under `mul`, with the identity listed first.
template <class Mul>
FiniteGroup closure_group(std::string name, const std::vector<Tuple>& gens, const Tuple& one, Mul mul) {
  std::map<Tuple, int> index{{one, 0}};
  std::vector<Tuple> elems{one};
  for (std::size_t pos = 0; pos < elems.size(); ++pos)
    for (const auto& g : gens) {
      auto x = mul(elems[pos], g);
      if (index.emplace(x, static_cast<int>(elems.size())).second) elems.push_back(std::move(x));
    }
  const std::size_t n = elems.size();
  std::vector<std::vector<int>> table(n, std::vector<int>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) table[i][j] = index.at(mul(elems[i], elems[j]));
  return FiniteGroup(std::move(name), std::move(table));
}

FiniteGroup cyclic(int n) {
  return closure_group("C" + std::to_string(n), {{n == 1 ? 0 : 1}}, {0},
                       [n](const Tuple& a, const Tuple& b) { return Tuple{(a[0] + b[0]) % n}; });
}

// C_m x| C_k with the generator of C_k acting by x -> r x.
FiniteGroup semidirect(std::string name, int m, int r, int k) {
  std::vector<int> pw(k, 1);
  for (int j = 1; j < k; ++j) pw[j] = pw[j - 1] * r % m;
  return closure_group(std::move(name), {{1, 0}, {0, 1}}, {0, 0}, [=](const Tuple& a, const Tuple& b) {
    return Tuple{(a[0] + pw[a[1]] * b[0]) % m, (a[1] + b[1]) % k};
  });
}

// <a, x | a^2m, x^2 = a^m, x a x^-1 = a^-1>, order 4m.
FiniteGroup dicyclic(std::string name, int m) {
  return closure_group(std::move(name), {{1, 0}, {0, 1}}, {0, 0}, [m](const Tuple& a, const Tuple& b) {
    int k = a[0] + (a[1] ? -b[0] : b[0]);
    int e = a[1] + b[1];
    if (e == 2) {
      e = 0;
      k += m;
    }
    return Tuple{((k % (2 * m)) + 2 * m) % (2 * m), e};
  });
}

FiniteGroup perm_group(std::string name, const std::vector<Tuple>& gens) {
  Tuple one(gens[0].size());
  std::iota(one.begin(), one.end(), 0);
  return closure_group(std::move(name), gens, one, [](const Tuple& p, const Tuple& q) {
    Tuple out(p.size());
    for (std::size_t x = 0; x < p.size(); ++x) out[x] = p[q[x]];
    return out;
  });
}

FiniteGroup sl23() {
  auto mul = [](const Tuple& a, const Tuple& b) {
    return Tuple{(a[0] * b[0] + a[1] * b[2]) % 3, (a[0] * b[1] + a[1] * b[3]) % 3,
                 (a[2] * b[0] + a[3] * b[2]) % 3, (a[2] * b[1] + a[3] * b[3]) % 3};
  };
  return closure_group("SL(2,3)", {{1, 1, 0, 1}, {1, 0, 1, 1}}, {1, 0, 0, 1}, mul);
}

FiniteGroup direct(const FiniteGroup& g, const FiniteGroup& h) {
  const int m = g.order(), n = h.order();
  std::vector<std::vector<int>> table(m * n, std::vector<int>(m * n));
  for (int a = 0; a < m * n; ++a)
    for (int b = 0; b < m * n; ++b) table[a][b] = g.mul(a / n, b / n) * n + h.mul(a % n, b % n);
  return FiniteGroup(g.name() + "x" + h.name(), std::move(table));
}

FiniteGroup cyclic_product(const std::vector<int>& ns) {
  FiniteGroup g = cyclic(ns[0]);
  for (std::size_t j = 1; j < ns.size(); ++j) g = direct(g, cyclic(ns[j]));
  return g;
}

}  // namespace

std::vector<FiniteGroup> small_groups(int max_order) {
  std::vector<FiniteGroup> out;
  auto want = [max_order](int n) { return n <= max_order; };
  for (int n = 1; n <= max_order; ++n) out.push_back(cyclic(n));
  const std::vector<std::vector<int>> abelian = {{2, 2},  {2, 4},  {2, 2, 2}, {3, 3},  {2, 6},
                                                 {4, 4},  {2, 8},  {2, 2, 4}, {2, 2, 2, 2},
                                                 {3, 6},  {2, 10}, {2, 12},   {2, 2, 6}};
  for (const auto& ns : abelian) {
    int n = 1;
    for (int x : ns) n *= x;
    if (want(n)) out.push_back(cyclic_product(ns));
  }
  for (int m = 3; want(2 * m); ++m) out.push_back(semidirect("D" + std::to_string(m), m, m - 1, 2));
  for (int m = 2; want(4 * m); ++m) out.push_back(dicyclic("Dic" + std::to_string(m), m));
  struct Semi {
    const char* name;
    int m, r, k;
  };
  for (const Semi& s : {Semi{"C7:C3", 7, 2, 3}, Semi{"C5:C4", 5, 2, 4}, Semi{"C3:C8", 3, 2, 8},
                        Semi{"C4:C4", 4, 3, 4}, Semi{"M16", 8, 5, 2}, Semi{"SD16", 8, 3, 2}})
    if (want(s.m * s.k)) out.push_back(semidirect(s.name, s.m, s.r, s.k));
  if (want(12)) out.push_back(perm_group("A4", {{1, 2, 0, 3}, {1, 0, 3, 2}}));
  if (want(24)) out.push_back(perm_group("S4", {{1, 2, 3, 0}, {1, 0, 2, 3}}));
  if (want(24)) out.push_back(sl23());
  const FiniteGroup d3 = semidirect("D3", 3, 2, 2), d4 = semidirect("D4", 4, 3, 2), q8 = dicyclic("Dic2", 2);
  if (want(16)) out.push_back(direct(d4, cyclic(2)));
  if (want(16)) out.push_back(direct(q8, cyclic(2)));
  if (want(18)) out.push_back(direct(d3, cyclic(3)));
  if (want(24)) {
    out.push_back(direct(d4, cyclic(3)));
    out.push_back(direct(q8, cyclic(3)));
    out.push_back(direct(d3, cyclic(4)));
    out.push_back(direct(d3, cyclic_product({2, 2})));
    out.push_back(direct(perm_group("A4", {{1, 2, 0, 3}, {1, 0, 3, 2}}), cyclic(2)));
  }
  return out;
}

ElementSet group_closure(const FiniteGroup& g, const ElementSet& gens) {
  std::vector<bool> in(g.order(), false);
  ElementSet out{0};
  in[0] = true;
  for (std::size_t pos = 0; pos < out.size(); ++pos)
    for (int s : gens) {
      const int x = g.mul(out[pos], s);
      if (!in[x]) {
        in[x] = true;
        out.push_back(x);
      }
    }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<ElementSet> subgroups(const FiniteGroup& g) {
  std::set<ElementSet> found;
  for (int x = 0; x < g.order(); ++x) found.insert(group_closure(g, {x}));
  std::vector<ElementSet> frontier(found.begin(), found.end());
  // Every subgroup is a join of cyclic ones; close under pairwise joins.
  while (!frontier.empty()) {
    std::vector<ElementSet> next;
    const std::vector<ElementSet> all(found.begin(), found.end());
    for (const auto& s : frontier)
      for (const auto& t : all) {
        ElementSet gens = s;
        gens.insert(gens.end(), t.begin(), t.end());
        auto j = group_closure(g, gens);
        if (found.insert(j).second) next.push_back(std::move(j));
      }
    frontier = std::move(next);
  }
  std::vector<ElementSet> out(found.begin(), found.end());
  std::sort(out.begin(), out.end(), [](const ElementSet& a, const ElementSet& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  return out;
}

FiniteAction regular_action(const FiniteGroup& g, ElementSet a, ElementSet b) {
  return FiniteAction{g, g.table(), std::move(a), std::move(b)};
}

// ---------------------------------------------------------------------------
// Orbit-intersection lemma

namespace {

void check_action(const FiniteAction& fa) {
  const FiniteGroup& g = fa.group;
  const int n = fa.num_points();
  if (static_cast<int>(fa.perm.size()) != g.order()) throw ForestError("need one permutation per group element");
  for (const auto& p : fa.perm) {
    if (static_cast<int>(p.size()) != n) throw ForestError("permutations of unequal degree");
    std::vector<bool> seen(n, false);
    for (int x : p) {
      if (x < 0 || x >= n || seen[x]) throw ForestError("group element does not act by a permutation");
      seen[x] = true;
    }
  }
  for (int x = 0; x < n; ++x)
    if (fa.perm[0][x] != x) throw ForestError("identity does not act trivially");
  for (int a = 0; a < g.order(); ++a)
    for (int b = 0; b < g.order(); ++b)
      for (int x = 0; x < n; ++x)
        if (fa.perm[g.mul(a, b)][x] != fa.perm[a][fa.perm[b][x]]) throw ForestError("action axiom fails");
  for (int a = 1; a < g.order(); ++a)
    for (int x = 0; x < n; ++x)
      if (fa.perm[a][x] == x) throw ForestError("action is not free");
}

void check_subgroup(const FiniteGroup& g, const ElementSet& s, const char* what) {
  ElementSet sorted = s;
  std::sort(sorted.begin(), sorted.end());
  for (int x : sorted)
    if (x < 0 || x >= g.order()) throw ForestError(std::string(what) + " has an element out of range");
  if (group_closure(g, sorted) != sorted) throw ForestError(std::string(what) + " is not a subgroup");
}

std::vector<bool> as_mask(const std::vector<int>& pts, int n, const char* what) {
  std::vector<bool> m(n, false);
  for (int x : pts) {
    if (x < 0 || x >= n) throw ForestError(std::string(what) + " has a point out of range");
    m[x] = true;
  }
  return m;
}

// Orbit id (least point) of each point of `mask` under `s`.
std::vector<int> orbit_ids(const FiniteAction& fa, const ElementSet& s, const std::vector<bool>& mask) {
  std::vector<int> id(mask.size(), -1);
  for (int x = 0; x < static_cast<int>(mask.size()); ++x) {
    if (!mask[x] || id[x] >= 0) continue;
    for (int a : s) id[fa.perm[a][x]] = x;
  }
  return id;
}

}  // namespace

OrbitLemmaReport orbit_lemma_check(const FiniteAction& fa, const std::vector<int>& y, const std::vector<int>& z) {
  check_action(fa);
  const FiniteGroup& g = fa.group;
  check_subgroup(g, fa.a, "A");
  check_subgroup(g, fa.b, "B");
  const int n = fa.num_points();
  const auto ym = as_mask(y, n, "Y"), zm = as_mask(z, n, "Z");
  for (int x = 0; x < n; ++x) {
    for (int a : fa.a)
      if (ym[x] && !ym[fa.perm[a][x]]) throw ForestError("Y is not A-invariant");
    for (int b : fa.b)
      if (zm[x] && !zm[fa.perm[b][x]]) throw ForestError("Z is not B-invariant");
  }

  OrbitLemmaReport rep;
  const auto yid = orbit_ids(fa, fa.a, ym), zid = orbit_ids(fa, fa.b, zm);
  for (int x = 0; x < n; ++x) {
    rep.y_orbits += yid[x] == x;
    rep.z_orbits += zid[x] == x;
  }

  std::vector<bool> covered(g.order(), false);
  for (int d = 0; d < g.order(); ++d) {
    if (covered[d]) continue;
    rep.reps.push_back(d);
    for (int a : fa.a)
      for (int b : fa.b) covered[g.mul(g.mul(a, d), b)] = true;
  }

  rep.well_defined = true;
  std::set<std::pair<int, int>> images;
  bool collision = false;
  for (int d : rep.reps) {
    // A^d ∩ B = {c in B : d c d^-1 in A}.
    ElementSet c;
    for (int b : fa.b)
      if (std::binary_search(fa.a.begin(), fa.a.end(), g.mul(g.mul(d, b), g.inverse(d)))) c.push_back(b);
    std::vector<bool> done(n, false);
    int term = 0;
    for (int x = 0; x < n; ++x) {
      if (done[x] || !zm[x] || !ym[fa.perm[d][x]]) continue;
      ++term;
      const std::pair<int, int> image{yid[fa.perm[d][x]], zid[x]};
      for (int s : c) {
        const int x2 = fa.perm[s][x];
        done[x2] = true;
        if (!zm[x2] || !ym[fa.perm[d][x2]] || yid[fa.perm[d][x2]] != image.first || zid[x2] != image.second)
          rep.well_defined = false;
      }
      if (!images.insert(image).second) collision = true;
    }
    rep.terms.push_back(term);
    rep.lhs += term;
  }
  rep.injective = !collision;
  rep.ok = rep.well_defined && rep.injective && rep.lhs <= rep.y_orbits * rep.z_orbits;
  return rep;
}

OrbitSweepReport orbit_sweep(int max_order, bool parallel) {
  struct Task {
    std::size_t group, a, b;
  };
  const auto groups = small_groups(max_order);
  std::vector<std::vector<ElementSet>> subs;
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    subs.push_back(subgroups(groups[i]));
    for (std::size_t a = 0; a < subs[i].size(); ++a)
      for (std::size_t b = 0; b < subs[i].size(); ++b) tasks.push_back({i, a, b});
  }
  long checks = 0, failures = 0;
  const long count = static_cast<long>(tasks.size());
#pragma omp parallel for schedule(dynamic, 16) reduction(+ : checks, failures) if (parallel)
  for (long t = 0; t < count; ++t) {
    const Task& task = tasks[t];
    const FiniteGroup& g = groups[task.group];
    const ElementSet& a = subs[task.group][task.a];
    const ElementSet& b = subs[task.group][task.b];
    const FiniteAction fa = regular_action(g, a, b);
    std::vector<int> all(g.order());
    std::iota(all.begin(), all.end(), 0);
    // A o {0, last} is A-invariant.
    std::vector<int> two;
    for (int x : {0, g.order() - 1})
      for (int s : a) two.push_back(g.mul(s, x));
    std::sort(two.begin(), two.end());
    two.erase(std::unique(two.begin(), two.end()), two.end());
    for (const auto& [y, z] : {std::pair{all, all}, std::pair{a, b}, std::pair{two, all}}) {
      ++checks;
      if (!orbit_lemma_check(fa, y, z).ok) ++failures;
    }
  }
  return OrbitSweepReport{static_cast<int>(groups.size()), count, checks, failures};
}

// ---------------------------------------------------------------------------
// Magnus order

namespace {

// Degree first, then lexicographically larger monomials first.
struct MonomialLess {
  bool operator()(const std::vector<int>& a, const std::vector<int>& b) const {
    if (a.size() != b.size()) return a.size() < b.size();
    return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
  }
};

using Series = std::map<std::vector<int>, Integer, MonomialLess>;

// Generalized binomial coefficient C(k, j).
Integer binomial(int k, int j) {
  Integer num = 1, den = 1;
  for (int t = 0; t < j; ++t) {
    num *= k - t;
    den *= t + 1;
  }
  return num / den;
}

// M(w) truncated above `degree`, with M(a_i^k) = (1 + X_i)^k.
Series magnus(const std::vector<Syllable>& w, std::size_t degree) {
  Series s;
  s[{}] = 1;
  for (const auto& [gen, exp] : w) {
    std::vector<Integer> coef;
    for (std::size_t j = 0; j <= degree; ++j) coef.push_back(binomial(exp, static_cast<int>(j)));
    Series next;
    for (const auto& [m, c] : s)
      for (std::size_t j = 0; m.size() + j <= degree; ++j) {
        if (coef[j] == 0) continue;
        auto m2 = m;
        m2.insert(m2.end(), j, gen);
        next[std::move(m2)] += c * coef[j];
      }
    std::erase_if(next, [](const auto& kv) { return kv.second == 0; });
    s = std::move(next);
  }
  return s;
}

constexpr std::strong_ordering sign_of(int c) {
  return c < 0 ? std::strong_ordering::less : c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal;
}

}  // namespace

std::strong_ordering order_compare(const FreeWord& u, const FreeWord& v) {
  const FreeWord w = free_mul(free_inverse(free_reduce(u)), free_reduce(v));
  if (w.empty()) return std::strong_ordering::equal;
  const auto syl = syllables(w);
  // The monomial spelling the syllable exponents of w has a nonzero
  // coefficient, so degree |w| always decides.
  for (std::size_t d = 1;; d = std::min(2 * d, w.size())) {
    for (const auto& [m, c] : magnus(syl, d))
      if (!m.empty()) return c > 0 ? std::strong_ordering::less : std::strong_ordering::greater;
    if (d == w.size()) throw ForestError("Magnus expansion vanished on a nontrivial word");
  }
}

std::strong_ordering edge_compare(const Edge& e, const Edge& f) {
  if (auto c = order_compare(e.g, f.g); c != 0) return c;
  return sign_of(e.i - f.i);
}

Edge act(const FreeWord& w, const Edge& e) { return Edge{free_mul(w, e.g), e.i}; }

CosetVertex coset_vertex(const FreeWord& g, int i) {
  FreeWord h = free_reduce(g);
  while (!h.empty() && std::abs(h.back()) == i) h.pop_back();
  return CosetVertex{std::move(h), i};
}

// ---------------------------------------------------------------------------
// Tree balls

TreeBall::TreeBall(int rank, int radius) : rank_(rank), radius_(radius) {
  if (rank <= 0 || radius < 0) throw ForestError("bad tree ball parameters");
  elements_.push_back({});
  for (std::size_t pos = 0; pos < elements_.size(); ++pos) {
    if (static_cast<int>(elements_[pos].size()) == radius) continue;
    for (int i = 1; i <= rank; ++i)
      for (int l : {i, -i}) {
        if (!elements_[pos].empty() && elements_[pos].back() == -l) continue;
        FreeWord x = elements_[pos];
        x.push_back(l);
        elements_.push_back(std::move(x));
      }
  }
  std::set<CosetVertex> cosets;
  for (const auto& g : elements_)
    for (int i = 1; i <= rank; ++i) {
      edges_.push_back(Edge{g, i});
      cosets.insert(coset_vertex(g, i));
    }
  cosets_.assign(cosets.begin(), cosets.end());
}

std::optional<Edge> TreeBall::act(const FreeWord& w, const Edge& e) const {
  Edge out = hnlab::act(w, e);
  if (!contains(out)) return std::nullopt;
  return out;
}

bool TreeBall::is_tree() const {
  if (edges_.size() + 1 != num_vertices()) return false;
  std::map<FreeWord, std::size_t> eid;
  std::map<CosetVertex, std::size_t> cid;
  for (const auto& g : elements_) eid.emplace(g, eid.size());
  for (const auto& c : cosets_) cid.emplace(c, elements_.size() + cid.size());
  std::vector<std::size_t> parent(num_vertices());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::size_t merges = 0;
  for (const auto& e : edges_) {
    const auto c = cid.find(coset_vertex(e.g, e.i));
    if (c == cid.end()) return false;
    const std::size_t a = find(eid.at(e.g)), b = find(c->second);
    if (a == b) return false;
    parent[a] = b;
    ++merges;
  }
  return merges + 1 == num_vertices();
}

// ---------------------------------------------------------------------------
// Lines

std::vector<Syllable> syllables(const FreeWord& w) {
  std::vector<Syllable> out;
  for (int l : free_reduce(w)) {
    const int gen = std::abs(l), s = l > 0 ? 1 : -1;
    if (!out.empty() && out.back().gen == gen)
      out.back().exp += s;
    else
      out.push_back({gen, s});
  }
  return out;
}

FreeWord from_syllables(const std::vector<Syllable>& s) {
  FreeWord w;
  for (const auto& [gen, exp] : s) w.insert(w.end(), static_cast<std::size_t>(std::abs(exp)), exp > 0 ? gen : -gen);
  return free_reduce(w);
}

FreeWord TreePath::end() const { return free_mul(start, from_syllables(steps)); }

std::vector<Edge> TreePath::edges() const {
  std::vector<Edge> out;
  FreeWord g = start;
  for (const auto& s : steps) {
    out.push_back(Edge{g, s.gen});
    g = free_mul(g, from_syllables({s}));
    out.push_back(Edge{g, s.gen});
  }
  return out;
}

std::optional<Axis> axis_of(const FreeWord& x) {
  FreeWord w = free_reduce(x), u;
  std::size_t lo = 0, hi = w.size();
  while (hi - lo >= 2 && w[lo] == -w[hi - 1]) {
    u.push_back(w[lo]);
    ++lo;
    --hi;
  }
  auto syl = syllables(FreeWord(w.begin() + static_cast<long>(lo), w.begin() + static_cast<long>(hi)));
  if (syl.size() < 2) return std::nullopt;
  // c = c' s with s on the generator of c's first syllable: conjugate by s.
  while (syl.front().gen == syl.back().gen) {
    const Syllable s = syl.back();
    syl.pop_back();
    syl.front().exp += s.exp;
    u = free_mul(u, from_syllables({{s.gen, -s.exp}}));
  }
  return Axis{u, from_syllables(syl)};
}

namespace {

FreeWord power(const FreeWord& c, int t) {
  FreeWord out;
  const FreeWord base = t >= 0 ? c : free_inverse(c);
  for (int j = 0; j < std::abs(t); ++j) out = free_mul(out, base);
  return out;
}

}  // namespace

std::optional<WitnessLine> witness_line(const FreeWord& x, const FreeWord& y, int tx, int ty) {
  const auto ax = axis_of(x), ay = axis_of(y);
  if (!ax || !ay) return std::nullopt;
  WitnessLine line;
  line.x = free_reduce(x);
  line.y = free_reduce(y);
  line.px = TreePath{free_mul(ax->u, power(ax->c, tx)), syllables(ax->c)};
  line.py = TreePath{free_mul(ay->u, power(ay->c, ty)), syllables(ay->c)};
  line.p = TreePath{line.py.start, syllables(free_mul(free_inverse(line.py.start), line.px.start))};
  if (!line_simple(line, 2)) return std::nullopt;
  return line;
}

bool line_simple(const WitnessLine& line, int periods) {
  if (line.px.steps.empty() || line.py.steps.empty()) return false;
  if (line.p.start != line.py.start || line.p.end() != line.px.start) return false;
  if (line.px.end() != free_mul(line.x, line.px.start)) return false;
  if (line.py.end() != free_mul(line.y, line.py.start)) return false;
  std::vector<Syllable> seq;
  for (int k = 0; k < periods; ++k)
    for (auto it = line.py.steps.rbegin(); it != line.py.steps.rend(); ++it) seq.push_back({it->gen, -it->exp});
  seq.insert(seq.end(), line.p.steps.begin(), line.p.steps.end());
  for (int k = 0; k < periods; ++k) seq.insert(seq.end(), line.px.steps.begin(), line.px.steps.end());
  for (std::size_t j = 0; j < seq.size(); ++j) {
    if (seq[j].exp == 0) return false;
    if (j > 0 && seq[j].gen == seq[j - 1].gen) return false;
  }
  return true;
}

namespace {

Edge max_edge(const std::vector<Edge>& es) {
  Edge best = es.front();
  for (const auto& e : es)
    if (edge_compare(e, best) > 0) best = e;
  return best;
}

std::vector<Edge> finite_part(const WitnessLine& line) {
  std::vector<Edge> out = line.p.edges();
  for (const auto* path : {&line.px, &line.py}) {
    auto es = path->edges();
    out.insert(out.end(), es.begin(), es.end());
  }
  return out;
}

}  // namespace

Edge line_max_edge(const WitnessLine& line) { return max_edge(finite_part(line)); }

ImportantResult important_test(const StallingsGraph& h, const Edge& e, const WitnessLine& line, int bound) {
  if (!st_member(h, line.x)) return {false, "x is not in H"};
  if (!st_member(h, line.y)) return {false, "y is not in H"};
  if (!line_simple(line, std::max(bound, 2))) return {false, "not a simple periodic line"};
  // By left invariance h^k o e' vs h^(k+1) o e' has one sign for all k, so
  // one comparison per end decides whether it decreases.
  for (const auto& [elem, path, name] : {std::tuple{&line.x, &line.px, "x"}, std::tuple{&line.y, &line.py, "y"}}) {
    const Edge top = max_edge(path->edges());
    if (edge_compare(act(*elem, top), top) > 0) return {false, std::string(name) + " end is increasing"};
  }
  const auto fin = finite_part(line);
  if (std::find(fin.begin(), fin.end(), e) != fin.end()) {
    for (const auto& f : fin)
      if (edge_compare(f, e) > 0) return {false, "e is not the maximal edge"};
    return {true, ""};
  }
  for (const auto& [elem, path] : {std::pair{&line.x, &line.px}, std::pair{&line.y, &line.py}}) {
    FreeWord g = *elem;
    for (int k = 1; k <= bound; ++k, g = free_mul(g, *elem))
      for (const auto& f : path->edges())
        if (act(g, f) == e) return {false, "e is not the maximal edge"};
  }
  return {false, "e is not on the line"};
}

namespace {

// Nontrivial reduced words of length <= n read as loops at the basepoint.
std::vector<FreeWord> loops(const StallingsGraph& h, int n) {
  std::vector<FreeWord> out;
  std::vector<std::pair<FreeWord, int>> stack{{{}, 0}};
  while (!stack.empty()) {
    auto [w, v] = stack.back();
    stack.pop_back();
    if (!w.empty() && v == 0) out.push_back(w);
    if (static_cast<int>(w.size()) == n) continue;
    for (int i = 1; i <= h.rank(); ++i)
      for (int l : {i, -i}) {
        if (!w.empty() && w.back() == -l) continue;
        const int t = h.target(static_cast<std::size_t>(v), l);
        if (t < 0) continue;
        FreeWord x = w;
        x.push_back(l);
        stack.push_back({std::move(x), t});
      }
  }
  return out;
}

bool edge_shortlex_less(const Edge& a, const Edge& b) {
  if (a.g != b.g) return free_shortlex_less(a.g, b.g);
  return a.i < b.i;
}

}  // namespace

ImportantSearchReport important_orbit_search(const StallingsGraph& h, int radius, int length, bool parallel) {
  // Hyperbolic H-elements, each replaced by its inverse if above 1.
  std::set<FreeWord> ends;
  for (auto x : loops(h, length)) {
    if (!axis_of(x)) continue;
    if (order_compare(x, {}) > 0) x = free_inverse(x);
    ends.insert(std::move(x));
  }
  const std::vector<FreeWord> elems(ends.begin(), ends.end());
  const long m = static_cast<long>(elems.size());
  const int reach = 4 * length + 8;

  std::vector<Edge> found;
  std::size_t lines = 0;
  bool uncertified = false;
#pragma omp parallel if (parallel)
  {
    std::vector<Edge> local;
    std::size_t local_lines = 0;
    bool local_bad = false;
#pragma omp for schedule(dynamic, 8) nowait
    for (long pair = 0; pair < m * m; ++pair) {
      const FreeWord& x = elems[pair / m];
      const FreeWord& y = elems[pair % m];
      // Commuting hyperbolic elements share their attracting end.
      if (free_mul(x, y) == free_mul(y, x)) continue;
      std::optional<WitnessLine> line;
      for (int s = 0; s <= 2 * reach && !line; ++s)
        for (int tx = std::max(0, s - reach); tx <= std::min(s, reach) && !line; ++tx) line = witness_line(x, y, tx, s - tx);
      if (!line) continue;
      ++local_lines;
      const Edge e = line_max_edge(*line);
      if (static_cast<int>(e.g.size()) > radius) continue;
      if (important_test(h, e, *line, 2).important)
        local.push_back(e);
      else
        local_bad = true;
    }
#pragma omp critical
    {
      found.insert(found.end(), local.begin(), local.end());
      lines += local_lines;
      uncertified = uncertified || local_bad;
    }
  }
  if (uncertified) throw ForestError("search produced an edge that fails important_test");
  std::sort(found.begin(), found.end(), edge_shortlex_less);
  found.erase(std::unique(found.begin(), found.end()), found.end());

  ImportantSearchReport rep;
  rep.lines = lines;
  for (const auto& e : found) {
    bool fresh = true;
    for (const auto& k : rep.representatives)
      if (k.i == e.i && st_member(h, free_mul(k.g, free_inverse(e.g)))) {
        fresh = false;
        break;
      }
    if (fresh) rep.representatives.push_back(e);
  }
  rep.count = rep.representatives.size();
  rep.rr = st_rr(h);
  if (Integer(rep.count) > rep.rr) throw ForestError("important orbit count exceeds the reduced rank");
  return rep;
}

// ---------------------------------------------------------------------------
// Induced forests

InducedForest::InducedForest(const StallingsGraph& k, int radius) : k_(k), ball_(k.rank(), radius) {
  for (std::size_t v = 0; v < k.num_vertices(); ++v)
    if (k.degree(v) != static_cast<std::size_t>(2 * k.rank())) throw ForestError("subgroup has infinite index");
  paths_ = k.geodesics();
  for (const auto& w : paths_) reps_.push_back(free_inverse(w));
}

std::pair<std::size_t, FreeWord> InducedForest::decompose(const FreeWord& g) const {
  // g^-1 = k w_v for the end v of reading g^-1, so g = w_v^-1 (w_v g).
  const int v = k_.read(free_inverse(g));
  if (v < 0) throw ForestError("reading fell off a complete graph");
  return {static_cast<std::size_t>(v), free_mul(paths_[v], g)};
}

std::optional<CopyEdge> InducedForest::act(const FreeWord& g, const CopyEdge& x) const {
  const auto [copy, f] = decompose(free_mul(g, reps_[x.copy]));
  auto e = ball_.act(f, x.e);
  if (!e) return std::nullopt;
  return CopyEdge{copy, std::move(*e)};
}

CopyVertex InducedForest::act(const FreeWord& g, const CopyVertex& x) const {
  const auto [copy, f] = decompose(free_mul(g, reps_[x.copy]));
  return CopyVertex{copy, coset_vertex(free_mul(f, x.v.h), x.v.i)};
}

InducedForestReport induced_forest_check(const StallingsGraph& k, int radius) {
  const InducedForest forest(k, radius);
  const int r = k.rank();
  InducedForestReport rep;
  rep.copies = forest.n();

  const TreeBall small(r, 2);
  const auto& words = small.elements();
  std::vector<CopyEdge> edges;
  for (std::size_t c = 0; c < forest.n(); ++c)
    for (const auto& e : forest.ball().edges()) edges.push_back({c, e});

  bool axioms = true, free_ok = true, matches = true;
  for (const auto& x : edges) {
    if (forest.act(FreeWord{}, x) != x) axioms = false;
    for (const auto& g : words) {
      const auto gx = forest.act(g, x);
      if (!g.empty() && gx && *gx == x) free_ok = false;
      if (forest.n() == 1) {
        const auto orig = forest.ball().act(g, x.e);
        if (gx.has_value() != orig.has_value() || (gx && (gx->copy != 0 || gx->e != *orig))) matches = false;
      }
      for (const auto& h : words) {
        const auto hx = forest.act(h, x);
        if (!hx) continue;
        const auto g_hx = forest.act(g, *hx);
        const auto gh_x = forest.act(free_mul(g, h), x);
        if (!g_hx || !gh_x) continue;
        ++rep.samples;
        if (*g_hx != *gh_x) axioms = false;
      }
    }
  }

  Rng rng(0x5eed);
  bool order_ok = true;
  const auto& ball_edges = forest.ball().edges();
  for (const auto& g : words)
    for (int t = 0; t < 100; ++t) {
      const std::size_t c = rng.below(forest.n());
      const CopyEdge x{c, ball_edges[rng.below(ball_edges.size())]};
      const CopyEdge y{c, ball_edges[rng.below(ball_edges.size())]};
      const auto gx = forest.act(g, x), gy = forest.act(g, y);
      if (!gx || !gy) continue;
      ++rep.samples;
      if (gx->copy != gy->copy || edge_compare(gx->e, gy->e) != edge_compare(x.e, y.e)) order_ok = false;
    }

  // St((s, t)) = s St_K(t) s^-1 with St_K(h<a_i>) = K ∩ h<a_i>h^-1.
  bool stab_ok = true;
  const auto& cosets = forest.ball().cosets();
  for (int t = 0; t < 50; ++t) {
    const CopyVertex x{rng.below(forest.n()), cosets[rng.below(cosets.size())]};
    const FreeWord& s = forest.reps()[x.copy];
    for (int j = -6; j <= 6; ++j) {
      if (j == 0) continue;
      const FreeWord inner = free_conjugate(x.v.h, from_syllables({{x.v.i, j}}));
      const FreeWord g = free_conjugate(s, inner);
      ++rep.samples;
      if ((forest.act(g, x) == x) != st_member(k, inner)) stab_ok = false;
    }
    for (int j = 0; j < 20; ++j) {
      FreeWord g;
      for (int l = 0; l < 4; ++l) {
        const int gen = static_cast<int>(rng.below(static_cast<std::uint64_t>(r))) + 1;
        g.push_back(rng.coin() ? gen : -gen);
      }
      g = free_reduce(g);
      const FreeWord inner = free_mul(free_mul(free_inverse(s), g), s);
      const auto ax = syllables(free_mul(free_mul(free_inverse(x.v.h), inner), x.v.h));
      const bool expected = g.empty() || (ax.size() == 1 && ax[0].gen == x.v.i && st_member(k, inner));
      ++rep.samples;
      if ((forest.act(g, x) == x) != expected) stab_ok = false;
    }
  }

  rep.axioms = axioms;
  rep.order_preserved = order_ok;
  rep.free_on_edges = free_ok;
  rep.stabilizers = stab_ok;
  rep.matches_original = forest.n() != 1 || matches;
  rep.ok = axioms && order_ok && free_ok && stab_ok && rep.matches_original;
  return rep;
}

}  // namespace hnlab
