#include "hnlab/stallings.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <numeric>
#include <set>

namespace hnlab {

FreeWord free_reduce(const FreeWord& w) {
  FreeWord out;
  out.reserve(w.size());
  for (int l : w) {
    if (l == 0) throw StallingsError("zero letter");
    if (!out.empty() && out.back() == -l)
      out.pop_back();
    else
      out.push_back(l);
  }
  return out;
}

FreeWord free_inverse(const FreeWord& w) {
  FreeWord out(w.rbegin(), w.rend());
  for (auto& l : out) l = -l;
  return out;
}

FreeWord free_mul(const FreeWord& a, const FreeWord& b) {
  FreeWord out = a;
  for (int l : b) {
    if (!out.empty() && out.back() == -l)
      out.pop_back();
    else
      out.push_back(l);
  }
  return out;
}

FreeWord free_conjugate(const FreeWord& g, const FreeWord& h) {
  return free_mul(free_mul(g, h), free_inverse(g));
}

namespace {
// Letter order for shortlex: a_1 < A_1 < a_2 < A_2 < ...
int letter_key(int l) { return l > 0 ? 2 * l : -2 * l + 1; }
}  // namespace

bool free_shortlex_less(const FreeWord& a, const FreeWord& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return letter_key(a[i]) < letter_key(b[i]);
  return false;
}

FreeWord parse_free_word(std::string_view s) {
  FreeWord w;
  for (char c : s) {
    if (c >= 'a' && c <= 'z')
      w.push_back(c - 'a' + 1);
    else if (c >= 'A' && c <= 'Z')
      w.push_back(-(c - 'A' + 1));
    else if (c == '1' && s.size() == 1)
      return {};
    else
      throw StallingsError(std::string("bad letter '") + c + "' in free word");
  }
  return free_reduce(w);
}

std::string format_free_word(const FreeWord& w) {
  if (w.empty()) return "1";
  std::string s;
  for (int l : w) s.push_back(l > 0 ? static_cast<char>('a' + l - 1) : static_cast<char>('A' - l - 1));
  return s;
}

FreeWord to_free_word(const NormalForm& w) {
  FreeWord out;
  for (const auto& l : w.letters()) {
    const auto* v = std::get_if<ZVec>(&l.elem);
    if (!v || v->size() != 1) throw StallingsError("word is not over a free universe");
    const int letter = static_cast<int>(l.factor) + 1;
    const long long k = static_cast<long long>((*v)[0]);
    for (long long j = 0; j < (k > 0 ? k : -k); ++j) out.push_back(k > 0 ? letter : -letter);
  }
  return out;
}

NormalForm from_free_word(const Universe& u, const FreeWord& w) {
  Word word;
  for (int l : w) {
    const std::size_t f = static_cast<std::size_t>(std::abs(l) - 1);
    word.push_back(Letter{f, ZVec{Integer(l > 0 ? 1 : -1)}});
  }
  return u.reduce(word);
}

// ---------------------------------------------------------------------------

std::size_t StallingsGraph::num_edges() const {
  std::size_t half = 0;
  for (const auto& row : out_)
    for (int t : row) half += (t >= 0);
  return half / 2;
}

std::size_t StallingsGraph::degree(std::size_t v) const {
  return static_cast<std::size_t>(std::count_if(out_[v].begin(), out_[v].end(), [](int t) { return t >= 0; }));
}

int StallingsGraph::read(const FreeWord& w, std::size_t from) const {
  int v = static_cast<int>(from);
  for (int l : w) {
    if (std::abs(l) > rank_ || l == 0) return -1;
    v = out_[v][slot(l)];
    if (v < 0) return -1;
  }
  return v;
}

std::vector<FreeWord> StallingsGraph::geodesics() const {
  std::vector<FreeWord> geo(out_.size());
  std::vector<bool> seen(out_.size(), false);
  std::deque<std::size_t> queue{0};
  seen[0] = true;
  // Slot order a_1, A_1, a_2, A_2, ... matches free_shortlex_less, so BFS
  // discovery yields the shortlex-least labels.
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    for (int i = 1; i <= rank_; ++i) {
      for (int l : {i, -i}) {
        const int t = out_[v][slot(l)];
        if (t < 0 || seen[t]) continue;
        seen[t] = true;
        geo[t] = geo[v];
        geo[t].push_back(l);
        queue.push_back(static_cast<std::size_t>(t));
      }
    }
  }
  return geo;
}

std::vector<FreeWord> StallingsGraph::basis() const {
  const auto geo = geodesics();
  std::vector<FreeWord> out;
  for (std::size_t v = 0; v < out_.size(); ++v) {
    for (int i = 1; i <= rank_; ++i) {
      const int t = out_[v][slot(i)];
      if (t < 0) continue;
      // Tree edges are the ones whose label extends a geodesic.
      FreeWord via = geo[v];
      via.push_back(i);
      if (via == geo[t]) continue;
      FreeWord rev = geo[t];
      rev.push_back(-i);
      if (rev == geo[v]) continue;
      out.push_back(free_mul(via, free_inverse(geo[t])));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

GraphFolder::GraphFolder(int rank) : rank_(rank) {
  if (rank <= 0) throw StallingsError("free rank must be positive");
}

GraphFolder::GraphFolder(const StallingsGraph& g) : rank_(g.rank()) {
  for (std::size_t v = 0; v < g.num_vertices(); ++v) add_vertex();
  for (std::size_t v = 0; v < g.num_vertices(); ++v)
    for (int i = 1; i <= rank_; ++i)
      if (int t = g.target(v, i); t >= 0) add_edge(v, i, static_cast<std::size_t>(t));
}

std::size_t GraphFolder::add_vertex() {
  parent_.push_back(parent_.size());
  out_.emplace_back(2 * static_cast<std::size_t>(rank_), -1);
  return parent_.size() - 1;
}

std::size_t GraphFolder::find(std::size_t v) {
  while (parent_[v] != v) {
    parent_[v] = parent_[parent_[v]];
    v = parent_[v];
  }
  return v;
}

void GraphFolder::add_edge(std::size_t from, int letter, std::size_t to) {
  if (letter == 0 || std::abs(letter) > rank_) throw StallingsError("invalid letter index");
  for (auto [u, l, t] : {std::tuple{from, letter, to}, std::tuple{to, -letter, from}}) {
    const std::size_t ru = find(u);
    int& cell = out_[ru][slot(l)];
    if (cell < 0)
      cell = static_cast<int>(t);
    else if (find(static_cast<std::size_t>(cell)) != find(t))
      pending_.emplace_back(static_cast<std::size_t>(cell), t);
  }
  while (!pending_.empty()) {
    auto [a, b] = pending_.back();
    pending_.pop_back();
    unite(a, b);
  }
}

void GraphFolder::add_path(std::size_t from, const FreeWord& w, std::size_t to) {
  if (w.empty()) {
    unite(from, to);
    while (!pending_.empty()) {
      auto [a, b] = pending_.back();
      pending_.pop_back();
      unite(a, b);
    }
    return;
  }
  std::size_t cur = from;
  for (std::size_t i = 0; i + 1 < w.size(); ++i) {
    const std::size_t next = add_vertex();
    add_edge(cur, w[i], next);
    cur = next;
  }
  add_edge(cur, w.back(), to);
}

void GraphFolder::unite(std::size_t a, std::size_t b) {
  std::size_t ra = find(a), rb = find(b);
  if (ra == rb) return;
  if (rb < ra) std::swap(ra, rb);
  parent_[rb] = ra;
  for (std::size_t s = 0; s < out_[rb].size(); ++s) {
    const int t = out_[rb][s];
    if (t < 0) continue;
    int& cell = out_[ra][s];
    if (cell < 0)
      cell = t;
    else if (find(static_cast<std::size_t>(cell)) != find(static_cast<std::size_t>(t)))
      pending_.emplace_back(static_cast<std::size_t>(cell), static_cast<std::size_t>(t));
  }
  out_[rb].assign(out_[rb].size(), -1);
}

StallingsGraph GraphFolder::finish(const std::vector<std::size_t>& marked) {
  const std::size_t slots = 2 * static_cast<std::size_t>(rank_);
  // Resolve to roots.
  std::vector<std::vector<int>> adj(parent_.size(), std::vector<int>(slots, -1));
  std::vector<bool> alive(parent_.size(), false);
  for (std::size_t v = 0; v < parent_.size(); ++v) {
    if (find(v) != v) continue;
    alive[v] = true;
    for (std::size_t s = 0; s < slots; ++s)
      if (out_[v][s] >= 0) adj[v][s] = static_cast<int>(find(static_cast<std::size_t>(out_[v][s])));
  }
  std::vector<bool> keep(parent_.size(), false);
  for (auto m : marked) keep[find(m)] = true;

  // Trim hanging trees.
  auto deg = [&](std::size_t v) {
    return static_cast<std::size_t>(std::count_if(adj[v].begin(), adj[v].end(), [](int t) { return t >= 0; }));
  };
  std::deque<std::size_t> queue;
  for (std::size_t v = 0; v < parent_.size(); ++v)
    if (alive[v] && !keep[v] && deg(v) <= 1) queue.push_back(v);
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    if (!alive[v]) continue;
    alive[v] = false;
    for (std::size_t s = 0; s < slots; ++s) {
      const int t = adj[v][s];
      if (t < 0) continue;
      adj[v][s] = -1;
      const std::size_t back = s < static_cast<std::size_t>(rank_) ? s + rank_ : s - rank_;
      adj[t][back] = -1;
      if (!keep[t] && alive[t] && deg(t) <= 1) queue.push_back(static_cast<std::size_t>(t));
    }
  }

  // Canonical BFS numbering from the first marked vertex.
  const std::size_t root = find(marked.at(0));
  std::vector<int> id(parent_.size(), -1);
  std::vector<std::size_t> order{root};
  id[root] = 0;
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const std::size_t v = order[pos];
    for (int i = 1; i <= rank_; ++i) {
      for (int l : {i, -i}) {
        const int t = adj[v][slot(l)];
        if (t < 0 || id[t] >= 0) continue;
        id[t] = static_cast<int>(order.size());
        order.push_back(static_cast<std::size_t>(t));
      }
    }
  }
  StallingsGraph g;
  g.rank_ = rank_;
  g.folded_ = true;
  g.out_.assign(order.size(), std::vector<int>(slots, -1));
  for (std::size_t n = 0; n < order.size(); ++n)
    for (std::size_t s = 0; s < slots; ++s)
      if (adj[order[n]][s] >= 0) g.out_[n][s] = id[adj[order[n]][s]];
  marked_result_.clear();
  for (auto m : marked) marked_result_.push_back(id[find(m)]);
  return g;
}

StallingsGraph st_build(int rank, const std::vector<FreeWord>& generators) {
  GraphFolder folder(rank);
  const std::size_t base = folder.add_vertex();
  for (const auto& g : generators) {
    for (int l : g)
      if (l == 0 || std::abs(l) > rank) throw StallingsError("invalid letter index");
    const FreeWord w = free_reduce(g);
    if (!w.empty()) folder.add_path(base, w, base);
  }
  return folder.finish({base});
}

Integer st_rank(const StallingsGraph& g) {
  if (!g.folded()) throw StallingsError("graph is not folded");
  return Integer(g.num_edges()) - Integer(g.num_vertices()) + 1;
}

Integer st_rr(const StallingsGraph& g) {
  Integer r = st_rank(g) - 1;
  return r > 0 ? r : Integer(0);
}

bool st_member(const StallingsGraph& g, const FreeWord& w) { return g.read(free_reduce(w)) == 0; }

std::vector<StallingsComponent> st_pullback(const StallingsGraph& a, const StallingsGraph& b) {
  if (a.rank() != b.rank()) throw StallingsError("rank mismatch");
  const int r = a.rank();
  const std::size_t na = a.num_vertices(), nb = b.num_vertices();
  auto pid = [nb](std::size_t u, std::size_t v) { return u * nb + v; };
  const auto geo_a = a.geodesics();
  const auto geo_b = b.geodesics();

  std::vector<int> comp(na * nb, -1);
  std::vector<StallingsComponent> out;
  for (std::size_t start = 0; start < na * nb; ++start) {
    if (comp[start] >= 0) continue;
    const int c = static_cast<int>(start);
    std::vector<std::size_t> members{start};
    comp[start] = c;
    std::size_t half_edges = 0;
    for (std::size_t pos = 0; pos < members.size(); ++pos) {
      const std::size_t u = members[pos] / nb, v = members[pos] % nb;
      for (int i = 1; i <= r; ++i) {
        for (int l : {i, -i}) {
          const int ta = a.target(u, l), tb = b.target(v, l);
          if (ta < 0 || tb < 0) continue;
          ++half_edges;
          const std::size_t t = pid(static_cast<std::size_t>(ta), static_cast<std::size_t>(tb));
          if (comp[t] < 0) {
            comp[t] = c;
            members.push_back(t);
          }
        }
      }
    }
    // A tree component carries the trivial intersection.
    if (half_edges / 2 + 1 <= members.size()) continue;

    std::size_t best = members[0];
    FreeWord best_w;
    bool have = false;
    for (auto m : members) {
      FreeWord s = free_mul(geo_a[m / nb], free_inverse(geo_b[m % nb]));
      if (!have || free_shortlex_less(s, best_w)) {
        best_w = std::move(s);
        best = m;
        have = true;
      }
    }
    // Loops at `best` form alpha^-1 A alpha ∩ beta^-1 B beta; conjugating by
    // alpha gives A ∩ sBs^-1.
    GraphFolder prod(r);
    std::map<std::size_t, std::size_t> local;
    for (auto m : members) local.emplace(m, prod.add_vertex());
    for (auto m : members) {
      const std::size_t u = m / nb, v = m % nb;
      for (int i = 1; i <= r; ++i) {
        const int ta = a.target(u, i), tb = b.target(v, i);
        if (ta < 0 || tb < 0) continue;
        prod.add_edge(local[m], i, local[pid(static_cast<std::size_t>(ta), static_cast<std::size_t>(tb))]);
      }
    }
    const StallingsGraph loops = prod.finish({local[best]});
    std::vector<FreeWord> gens;
    const FreeWord& alpha = geo_a[best / nb];
    for (const auto& w : loops.basis()) gens.push_back(free_conjugate(alpha, w));
    out.push_back({best_w, st_build(r, gens)});
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    return free_shortlex_less(x.witness, y.witness);
  });
  return out;
}

std::optional<FreeWord> st_coset_intersect(const StallingsGraph& k1, const FreeWord& z,
                                           const StallingsGraph& k2) {
  if (k1.rank() != k2.rank()) throw StallingsError("rank mismatch");
  const int r = k1.rank();
  // Words reading from the stem tip p to the basepoint of k2 form z K2.
  GraphFolder folder(k2);
  const std::size_t tip = folder.add_vertex();
  folder.add_path(tip, free_reduce(z), 0);
  const StallingsGraph coset = folder.finish({0, tip});
  const std::size_t p = static_cast<std::size_t>(folder.marked_result()[1]);

  const std::size_t n2 = coset.num_vertices();
  const std::size_t start = 0 * n2 + p, goal = 0;
  std::vector<int> prev(k1.num_vertices() * n2, -2);
  std::vector<int> via(prev.size(), 0);
  std::deque<std::size_t> queue{start};
  prev[start] = -1;
  while (!queue.empty()) {
    const std::size_t x = queue.front();
    queue.pop_front();
    if (x == goal) break;
    const std::size_t u = x / n2, v = x % n2;
    for (int i = 1; i <= r; ++i) {
      for (int l : {i, -i}) {
        const int ta = k1.target(u, l), tb = coset.target(v, l);
        if (ta < 0 || tb < 0) continue;
        const std::size_t t = static_cast<std::size_t>(ta) * n2 + static_cast<std::size_t>(tb);
        if (prev[t] != -2) continue;
        prev[t] = static_cast<int>(x);
        via[t] = l;
        queue.push_back(t);
      }
    }
  }
  if (prev[goal] == -2) return std::nullopt;
  FreeWord f;
  for (std::size_t x = goal; prev[x] != -1; x = static_cast<std::size_t>(prev[x])) f.push_back(via[x]);
  std::reverse(f.begin(), f.end());
  return f;
}

StallingsGraph st_schreier_kernel(int rank, const std::vector<std::vector<int>>& perms) {
  if (static_cast<int>(perms.size()) != rank) throw StallingsError("need one image per generator");
  const std::size_t m = perms.empty() ? 1 : perms[0].size();
  for (const auto& p : perms) {
    if (p.size() != m) throw StallingsError("permutation images of unequal degree");
    std::vector<bool> seen(m, false);
    for (int x : p) {
      if (x < 0 || static_cast<std::size_t>(x) >= m || seen[x]) throw StallingsError("image is not a permutation");
      seen[x] = true;
    }
  }
  GraphFolder folder(rank);
  for (std::size_t v = 0; v < m; ++v) folder.add_vertex();
  for (std::size_t v = 0; v < m; ++v)
    for (int i = 0; i < rank; ++i) folder.add_edge(v, i + 1, static_cast<std::size_t>(perms[i][v]));
  return folder.finish({0});
}

std::vector<std::vector<int>> abelian_regular_perms(const std::vector<int>& moduli,
                                                    const std::vector<std::vector<int>>& images) {
  std::size_t order = 1;
  for (int q : moduli) {
    if (q <= 0) throw StallingsError("modulus must be positive");
    order *= static_cast<std::size_t>(q);
  }
  auto decode = [&](std::size_t x) {
    std::vector<int> c(moduli.size());
    for (std::size_t j = 0; j < moduli.size(); ++j) {
      c[j] = static_cast<int>(x % static_cast<std::size_t>(moduli[j]));
      x /= static_cast<std::size_t>(moduli[j]);
    }
    return c;
  };
  auto encode = [&](const std::vector<int>& c) {
    std::size_t x = 0, stride = 1;
    for (std::size_t j = 0; j < moduli.size(); ++j) {
      x += static_cast<std::size_t>(((c[j] % moduli[j]) + moduli[j]) % moduli[j]) * stride;
      stride *= static_cast<std::size_t>(moduli[j]);
    }
    return x;
  };
  std::vector<std::vector<int>> perms;
  for (const auto& img : images) {
    if (img.size() != moduli.size()) throw StallingsError("image has wrong number of coordinates");
    std::vector<int> p(order);
    for (std::size_t x = 0; x < order; ++x) {
      auto c = decode(x);
      for (std::size_t j = 0; j < c.size(); ++j) c[j] += img[j];
      p[x] = static_cast<int>(encode(c));
    }
    perms.push_back(std::move(p));
  }
  return perms;
}

}  // namespace hnlab
