// Acceptance suite: one PASS/FAIL line per criterion. Exact arithmetic
// throughout; the only tolerances are the wall-clock limits below.

#include "hnlab/forest_lab.hpp"
#include "hnlab/harness.hpp"
#include "hnlab/random.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

using namespace hnlab;

namespace {

constexpr double kShncSeconds = 60;
constexpr double kBruteSeconds = 120;
constexpr double kAmsSeconds = 120;

using UPtr = std::shared_ptr<const Universe>;

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Check {
 public:
  void expect(bool c, const std::string& what) {
    if (!c && pass_) {
      pass_ = false;
      first_ = what;
    }
  }
  bool pass() const { return pass_; }
  Outcome done(const std::string& summary) const {
    return {pass_, pass_ ? summary : summary + "; first failure: " + first_};
  }

 private:
  bool pass_ = true;
  std::string first_;
};

std::string str(const Rational& q) {
  std::ostringstream s;
  s << q;
  return s.str();
}

UPtr make(std::vector<FactorSpec> f) { return std::make_shared<const Universe>(std::move(f)); }

UPtr free_universe(int r) {
  std::vector<FactorSpec> f;
  for (int i = 0; i < r; ++i) f.push_back(FactorSpec::free_abelian(1));
  return make(f);
}

FreeWord random_free_word(Rng& rng, int r, std::size_t len) {
  FreeWord x;
  while (x.size() < len) {
    int l = static_cast<int>(1 + rng.below(static_cast<std::uint64_t>(r)));
    if (rng.coin()) l = -l;
    if (!x.empty() && x.back() == -l) continue;
    x.push_back(l);
  }
  return x;
}

std::vector<FreeWord> random_free_gens(Rng& rng, int r, std::size_t max_gens, std::size_t max_len) {
  std::vector<FreeWord> g;
  for (std::size_t j = 0, n = 1 + rng.below(max_gens); j < n; ++j)
    g.push_back(random_free_word(rng, r, 1 + rng.below(max_len)));
  return g;
}

std::vector<NormalForm> random_gens(const UPtr& u, Rng& rng, std::size_t max_gens, std::size_t max_syll, long bound) {
  std::vector<NormalForm> g;
  const std::size_t syll = u->num_factors() == 1 ? 1 : max_syll;
  for (std::size_t j = 0, n = 1 + rng.below(max_gens); j < n; ++j)
    g.push_back(random_normal_form(*u, rng, 1 + rng.below(syll), bound));
  return g;
}

std::vector<NormalForm> conj_all(const Universe& u, const NormalForm& g, const std::vector<NormalForm>& xs) {
  std::vector<NormalForm> out;
  for (const auto& x : xs) out.push_back(u.conjugate(g, x));
  return out;
}

std::vector<FreeWord> conj_all(const FreeWord& g, const std::vector<FreeWord>& xs) {
  std::vector<FreeWord> out;
  for (const auto& x : xs) out.push_back(free_conjugate(g, x));
  return out;
}

// All reduced words over F_r of length <= n.
std::vector<FreeWord> all_words(int r, std::size_t n) {
  std::vector<FreeWord> out{{}};
  for (std::size_t pos = 0; pos < out.size(); ++pos) {
    if (out[pos].size() == n) continue;
    for (int i = 1; i <= r; ++i)
      for (int l : {i, -i}) {
        if (!out[pos].empty() && out[pos].back() == -l) continue;
        FreeWord x = out[pos];
        x.push_back(l);
        out.push_back(x);
      }
  }
  return out;
}

// Normal forms of Z_2 * Z_3 with at most n syllables.
std::vector<NormalForm> all_forms_z2z3(const UPtr& u, std::size_t n) {
  std::vector<std::vector<Letter>> out{{}};
  for (std::size_t pos = 0; pos < out.size(); ++pos) {
    if (out[pos].size() == n) continue;
    for (std::size_t i = 0; i < 2; ++i) {
      if (!out[pos].empty() && out[pos].back().factor == i) continue;
      for (int x = 1; x <= static_cast<int>(i) + 1; ++x) {
        auto w = out[pos];
        w.push_back(Letter{i, x});
        out.push_back(std::move(w));
      }
    }
  }
  std::vector<NormalForm> forms;
  for (const auto& w : out) forms.push_back(u->reduce(w));
  return forms;
}

// A ∩ B != 1 for folded graphs: the basepoint component of the product
// graph is not a tree.
bool meet_nontrivial(const StallingsGraph& a, const StallingsGraph& b) {
  const int r = a.rank();
  std::map<std::pair<int, int>, int> seen{{{0, 0}, 0}};
  std::vector<std::pair<int, int>> queue{{0, 0}};
  std::size_t half_edges = 0;
  for (std::size_t pos = 0; pos < queue.size(); ++pos) {
    const auto [x, y] = queue[pos];
    for (int l = -r; l <= r; ++l) {
      if (l == 0) continue;
      const int tx = a.target(static_cast<std::size_t>(x), l), ty = b.target(static_cast<std::size_t>(y), l);
      if (tx < 0 || ty < 0) continue;
      ++half_edges;
      if (seen.emplace(std::pair{tx, ty}, 0).second) queue.push_back({tx, ty});
    }
  }
  return half_edges / 2 >= queue.size();
}

// Schreier generators of H ∩ ker(phi) for phi: H -> Z_m given on the
// generators, and the index |phi(H)|.
std::pair<std::vector<NormalForm>, long> schreier_cyclic(const Universe& u, const std::vector<NormalForm>& h,
                                                         const std::vector<long>& phi, long m) {
  std::map<long, NormalForm> rep{{0, NormalForm{}}};
  std::vector<long> order{0};
  for (std::size_t pos = 0; pos < order.size(); ++pos)
    for (std::size_t j = 0; j < h.size(); ++j) {
      const long t = ((order[pos] + phi[j]) % m + m) % m;
      if (rep.emplace(t, u.mul(rep[order[pos]], h[j])).second) order.push_back(t);
    }
  std::vector<NormalForm> gens;
  for (long x : order)
    for (std::size_t j = 0; j < h.size(); ++j) {
      const long t = ((x + phi[j]) % m + m) % m;
      auto g = u.mul(u.mul(rep[x], h[j]), u.inverse(rep[t]));
      if (!g.empty()) gens.push_back(g);
    }
  return {gens, static_cast<long>(order.size())};
}

long abelian_phi(const NormalForm& w, const std::vector<std::vector<long>>& weights, long m) {
  long s = 0;
  for (const auto& l : w.letters()) {
    const auto& v = std::get<ZVec>(l.elem);
    for (std::size_t c = 0; c < v.size(); ++c) s += weights[l.factor][c] * static_cast<long>(v[c] % m);
  }
  return ((s % m) + m) % m;
}

// The two witness lists name the same double cosets A s B, one for one,
// with equal reduced ranks. Representatives may differ between models.
bool same_double_cosets(int r, const std::vector<FreeWord>& ga, const std::vector<FreeWord>& gb,
                        const std::vector<std::pair<FreeWord, Integer>>& x,
                        const std::vector<std::pair<FreeWord, Integer>>& y) {
  if (x.size() != y.size()) return false;
  const auto a = st_build(r, ga);
  std::vector<bool> used(y.size(), false);
  for (const auto& [s, rank] : x) {
    const auto conj = st_build(r, conj_all(s, gb));
    bool matched = false;
    for (std::size_t j = 0; j < y.size() && !matched; ++j)
      if (!used[j] && st_coset_intersect(a, free_mul(y[j].first, free_inverse(s)), conj)) {
        used[j] = matched = true;
        if (y[j].second != rank) return false;
      }
    if (!matched) return false;
  }
  return true;
}

std::vector<std::pair<FreeWord, Integer>> free_terms(const VerificationReport& r) {
  std::vector<std::pair<FreeWord, Integer>> out;
  for (const auto& t : r.terms) out.emplace_back(to_free_word(t.witness), numerator(t.rank));
  return out;
}

json load(const std::string& name) {
  std::ifstream in(std::string(HNLAB_TEST_DATA) + "/" + name);
  if (!in) throw std::runtime_error("missing " + name);
  return json::parse(in);
}

const char* kZ2Z3 = R"({"factors":[{"kind":"finite_cyclic","n":2},{"kind":"finite_cyclic","n":3}]})";

Instance instance(const char* universe, const json& a, const json& b) {
  return instance_from_json({{"universe", json::parse(universe)}, {"A", {{"generators", a}}}, {"B", {{"generators", b}}}});
}

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1
Outcome shnc_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  Check c;
  Rng rng(1001);
  int equal = 0, nontrivial = 0;
  for (int t = 0; t < 500; ++t) {
    const int r = t < 250 ? 2 : 3;
    const auto a = st_build(r, random_free_gens(rng, r, 4, 6));
    const auto b = st_build(r, random_free_gens(rng, r, 4, 6));
    Integer lhs = 0;
    for (const auto& comp : st_pullback(a, b)) lhs += st_rr(comp.intersection);
    const Integer rhs = st_rr(a) * st_rr(b);
    c.expect(lhs <= rhs, "pair " + std::to_string(t));
    if (lhs > 0) ++nontrivial;
    if (lhs == rhs && rhs > 0) ++equal;
  }
  const double s = elapsed(t0);
  c.expect(s < kShncSeconds, "runtime");
  char buf[160];
  std::snprintf(buf, sizeof buf, "500 pairs in F2/F3, %d with lhs > 0, %d with equality, %.2f s (limit %.0f s)", nontrivial,
                equal, s, kShncSeconds);
  return c.done(buf);
}

// 2
Outcome equality_witnesses() {
  Check c;
  const auto basis = json::parse(R"([[[0,1],[1,1],[0,1],[1,2]],[[0,1],[1,2],[0,1],[1,1]]])");
  const auto whole = json::parse(R"([[[0,1]],[[1,1]]])");
  const char* f2 = R"({"factors":[{"kind":"free_abelian","k":1},{"kind":"free_abelian","k":1}]})";
  const auto s = verify(Kind::shnc, instance(f2, {"a", "b"}, {"a", "b"}));
  const auto m = verify(Kind::main, instance(kZ2Z3, whole, whole));
  const auto v = verify(Kind::vfree, instance(kZ2Z3, basis, basis));
  c.expect(s.lhs == 1 && s.rhs == 1 && s.ok, "shnc F2");
  c.expect(m.lhs == 1 && m.rhs == 1 && m.ok, "main Z2*Z3");
  c.expect(v.lhs == 6 && v.rhs == 6 && v.ok && v.cross_check, "vfree F");
  return c.done("shnc " + str(s.lhs) + " <= " + str(s.rhs) + ", main " + str(m.lhs) + " <= " + str(m.rhs) +
                ", vfree " + str(v.lhs) + " <= " + str(v.rhs));
}

// 3
Outcome oracle_agreement() {
  Check c;
  std::size_t n = 0;
  for (int r : {2, 3}) {
    InstanceParams p;
    p.seed = 3000 + static_cast<std::uint64_t>(r);
    p.universe = free_universe(r);
    p.count = 100;
    for (const auto& inst : gen_random(p)) {
      ++n;
      for (const auto* g : {&inst.a, &inst.b}) {
        std::vector<FreeWord> fw;
        for (const auto& x : *g) fw.push_back(to_free_word(x));
        c.expect(ka_rr(ka_build(inst.universe, *g)) == st_rr(st_build(r, fw)), "ka_rr vs st_rr");
      }
      const auto s = verify(Kind::shnc, inst);
      const auto a = verify(Kind::ams, inst);
      c.expect(s.lhs == a.lhs && s.rhs == a.rhs && s.ok == a.ok, "lhs/rhs of pair " + std::to_string(n));
      std::vector<FreeWord> fa, fb;
      for (const auto& x : inst.a) fa.push_back(to_free_word(x));
      for (const auto& x : inst.b) fb.push_back(to_free_word(x));
      c.expect(same_double_cosets(r, fa, fb, free_terms(s), free_terms(a)), "double cosets of pair " + std::to_string(n));
    }
  }
  return c.done(std::to_string(n) + " free instances, ka_rr = st_rr; shnc/ams agree on lhs, rhs and the ranked double-coset list");
}

// 4
Outcome schreier_formulas() {
  Check c;
  int kernels = 0;
  for (const std::vector<int>& moduli : {std::vector<int>{2}, {3}, {2, 2}}) {
    int q = 1;
    for (int m : moduli) q *= m;
    for (int r : {2, 3}) {
      // Every assignment of generator images; keep the surjective ones.
      std::vector<std::vector<int>> imgs(static_cast<std::size_t>(r), std::vector<int>(moduli.size(), 0));
      while (true) {
        std::set<std::vector<int>> span{std::vector<int>(moduli.size(), 0)};
        for (bool grew = true; grew;) {
          grew = false;
          for (auto x : std::vector<std::vector<int>>(span.begin(), span.end()))
            for (const auto& g : imgs) {
              auto y = x;
              for (std::size_t k = 0; k < y.size(); ++k) y[k] = (y[k] + g[k]) % moduli[k];
              grew |= span.insert(y).second;
            }
        }
        if (static_cast<int>(span.size()) == q) {
          const auto k = st_schreier_kernel(r, abelian_regular_perms(moduli, imgs));
          ++kernels;
          c.expect(k.num_vertices() == static_cast<std::size_t>(q), "index");
          c.expect(st_rank(k) == q * (r - 1) + 1, "Schreier rank");
        }
        std::size_t pos = 0;
        for (; pos < imgs.size() * moduli.size(); ++pos) {
          int& x = imgs[pos / moduli.size()][pos % moduli.size()];
          if (++x < moduli[pos % moduli.size()]) break;
          x = 0;
        }
        if (pos == imgs.size() * moduli.size()) break;
      }
    }
  }

  Rng rng(4004);
  int pairs = 0;
  const std::vector<UPtr> unis = {make({FactorSpec::free_abelian(2), FactorSpec::free_abelian(2)}),
                                  make({FactorSpec::free_abelian(1), FactorSpec::free_abelian(2)})};
  while (pairs < 100) {
    const auto& u = unis[static_cast<std::size_t>(pairs) % unis.size()];
    const auto h = random_gens(u, rng, 3, 3, 2);
    const long m = 2 + static_cast<long>(rng.below(2));
    std::vector<std::vector<long>> weights;
    for (const auto& f : u->factors()) {
      std::vector<long> w;
      for (int k = 0; k < f.rank(); ++k) w.push_back(rng.range(0, m - 1));
      weights.push_back(w);
    }
    std::vector<long> phi;
    for (const auto& g : h) phi.push_back(abelian_phi(g, weights, m));
    const auto [kg, index] = schreier_cyclic(*u, h, phi, m);
    const auto ah = ka_build(u, h);
    c.expect(ka_rr(ka_build(u, kg)) == index * ka_rr(ah), "Kurosh analogue, pair " + std::to_string(pairs));
    ++pairs;
  }
  return c.done(std::to_string(kernels) + " kernels of F2/F3 onto Z2, Z3, Z2xZ2 with rank |Q|(r-1)+1; " +
                std::to_string(pairs) + " pairs with rr_K(K) = |H:K| rr_K(H)");
}

// 5
Outcome golden_file() {
  Check c;
  const auto rep = rank_report(load("z2z3_whole.json"));
  c.expect(rep == load("z2z3_whole.golden.json"), "report differs from golden file");
  c.expect(rep["kernel_free_rank"] == 2, "kernel rank");
  c.expect(rep["n"] == 6, "index");
  c.expect(rational_from_json(rep["rk"]) == Rational(1, 6), "rk");
  c.expect(rational_from_json(rep["total_rank"]) == 1, "total rank");
  return c.done("kernel rank " + rep["kernel_free_rank"].dump() + ", index " + rep["n"].dump() + ", rk " +
                str(rational_from_json(rep["rk"])) + ", total rank " + str(rational_from_json(rep["total_rank"])));
}

// 6
Outcome brute_force() {
  const auto t0 = std::chrono::steady_clock::now();
  Check c;
  Rng rng(6006);
  constexpr std::size_t kBound = 6;
  std::size_t checked = 0, listed = 0;

  const auto words = all_words(2, kBound);
  const auto f2 = free_universe(2);
  for (int t = 0; t < 30; ++t) {
    const auto ga = random_free_gens(rng, 2, 3, 4), gb = random_free_gens(rng, 2, 3, 4);
    const auto a = st_build(2, ga), b = st_build(2, gb);
    const auto comps = st_pullback(a, b);

    std::vector<NormalForm> na, nb;
    for (const auto& x : ga) na.push_back(from_free_word(*f2, x));
    for (const auto& x : gb) nb.push_back(from_free_word(*f2, x));
    const auto kp = ka_pullback(ka_build(f2, na), ka_build(f2, nb));
    std::vector<std::pair<FreeWord, Integer>> sl, kl;
    for (const auto& comp : comps) sl.emplace_back(comp.witness, st_rr(comp.intersection));
    for (const auto& comp : kp.components) kl.emplace_back(to_free_word(comp.witness), ka_rr(comp.intersection));
    c.expect(same_double_cosets(2, ga, gb, sl, kl), "stallings and kurosh double cosets");

    std::vector<StallingsGraph> conj;
    for (const auto& comp : comps) conj.push_back(st_build(2, conj_all(comp.witness, gb)));
    std::vector<bool> seen(comps.size(), false);
    for (const auto& g : words) {
      if (!meet_nontrivial(a, st_build(2, conj_all(g, gb)))) continue;
      ++checked;
      int owners = 0;
      for (std::size_t i = 0; i < comps.size(); ++i)
        if (st_coset_intersect(a, free_mul(g, free_inverse(comps[i].witness)), conj[i])) {
          ++owners;
          seen[i] = true;
        }
      c.expect(owners == 1, "free witness " + format_free_word(g));
    }
    for (std::size_t i = 0; i < comps.size(); ++i) {
      ++listed;
      if (comps[i].witness.size() <= kBound) c.expect(seen[i], "listed witness not discovered");
    }
  }

  const auto z = universe_from_json(json::parse(kZ2Z3));
  const auto forms = all_forms_z2z3(z, kBound);
  for (int t = 0; t < 30; ++t) {
    const auto ga = random_gens(z, rng, 3, 4, 1), gb = random_gens(z, rng, 3, 4, 1);
    const auto a = ka_build(z, ga);
    const auto pb = ka_pullback(a, ka_build(z, gb));
    c.expect(!pb.omitted_rank_zero, "finite factors list everything");
    std::vector<KuroshAutomaton> conj;
    for (const auto& comp : pb.components) conj.push_back(ka_build(z, conj_all(*z, comp.witness, gb)));
    std::vector<bool> seen(pb.components.size(), false);
    for (const auto& g : forms) {
      if (ka_kurosh_rank(ka_intersect(a, ka_build(z, conj_all(*z, g, gb)))) == 0) continue;
      ++checked;
      int owners = 0;
      for (std::size_t i = 0; i < pb.components.size(); ++i)
        if (ka_coset_intersect(a, z->mul(g, z->inverse(pb.components[i].witness)), conj[i])) {
          ++owners;
          seen[i] = true;
        }
      c.expect(owners == 1, "Z2*Z3 witness " + to_string(*z, g));
    }
    for (std::size_t i = 0; i < pb.components.size(); ++i) {
      ++listed;
      if (pb.components[i].witness.size() <= kBound) c.expect(seen[i], "listed Z2*Z3 witness not discovered");
    }
  }
  const double s = elapsed(t0);
  c.expect(s < kBruteSeconds, "runtime");
  char buf[192];
  std::snprintf(buf, sizeof buf,
                "60 instances, %zu nontrivial intersections found by search, %zu listed double cosets, %.2f s (limit %.0f s)",
                checked, listed, s, kBruteSeconds);
  return c.done(buf);
}

// 7
Outcome orbit_lemma() {
  Check c;
  const auto rep = orbit_sweep(24, true);
  c.expect(rep.failures == 0, std::to_string(rep.failures) + " failures");
  return c.done(std::to_string(rep.groups) + " groups, " + std::to_string(rep.pairs) + " subgroup pairs, " +
                std::to_string(rep.checks) + " checks, " + std::to_string(rep.failures) + " failures");
}

// 8
Outcome ams_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  Check c;
  std::size_t n = 0, nontrivial = 0, equal = 0;
  const char* z2 = R"({"factors":[{"kind":"free_abelian","k":2}]})";
  const char* z2z2 = R"({"factors":[{"kind":"free_abelian","k":2},{"kind":"free_abelian","k":2}]})";
  // Default sizes rarely give nontrivial intersections in [Z^2, Z^2], so
  // most instances there use short words with entries in [-1, 1].
  struct Batch {
    const char* universe;
    std::size_t count, max_len;
    long bound;
  };
  const Batch batches[] = {{z2, 50, 6, 3}, {z2z2, 50, 6, 3}, {z2z2, 50, 3, 1}, {z2z2, 50, 2, 1}};
  std::uint64_t seed = 8000;
  for (const auto& b : batches) {
    InstanceParams p;
    p.seed = seed++;
    p.universe = universe_from_json(json::parse(b.universe));
    p.count = b.count;
    p.max_len = b.max_len;
    p.bound = b.bound;
    for (const auto& r : verify_batch(Kind::ams, gen_random(p), true)) {
      ++n;
      c.expect(r.ok && r.lhs <= r.rhs, "instance " + std::to_string(n));
      if (r.lhs > 0) ++nontrivial;
      if (r.lhs == r.rhs && r.rhs > 0) ++equal;
    }
  }
  const double s = elapsed(t0);
  c.expect(s < kAmsSeconds, "runtime");
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu instances over [Z^2] and [Z^2, Z^2], %zu with lhs > 0, %zu with equality, %.2f s (limit %.0f s)",
                n, nontrivial, equal, s, kAmsSeconds);
  return c.done(buf);
}

// 9
Outcome conjugation_invariance() {
  Check c;
  Rng rng(9009);
  int n = 0;
  for (const auto& u : {make({FactorSpec::cyclic(2), FactorSpec::cyclic(3)}),
                        make({FactorSpec::cyclic(2), FactorSpec::cyclic(2), FactorSpec::free_abelian(1)})}) {
    const Extension e(u);
    for (int t = 0; t < 50; ++t, ++n) {
      const auto gens = random_gens(u, rng, 3, 4, 2);
      const auto g = random_normal_form(*u, rng, 1 + rng.below(5), 2);
      const auto h = sub_handle(e, gens);
      const Rational base = total_rank(e, h);
      c.expect(total_rank(e, sub_handle(e, conj_all(*u, g, gens))) == base, "conjugated generators");
      c.expect(total_rank(e, handle_conjugate(e, h, g)) == base, "handle_conjugate");
    }
  }
  return c.done(std::to_string(n) + " pairs (H, g) in Z2*Z3 and Z2*Z2*Z");
}

// 10
Outcome important_edges() {
  Check c;
  // Random probes, each search serial, probes in parallel.
  constexpr int kProbes = 1000;
  std::vector<std::vector<FreeWord>> probes;
  Rng rng(10010);
  for (int t = 0; t < kProbes; ++t) probes.push_back(random_free_gens(rng, 2, 3, 3));
  std::vector<int> bad(kProbes, 0);
#pragma omp parallel for schedule(dynamic)
  for (int t = 0; t < kProbes; ++t) {
    const auto h = st_build(2, probes[static_cast<std::size_t>(t)]);
    try {
      bad[static_cast<std::size_t>(t)] = Integer(important_orbit_search(h, 2, 3, false).count) <= st_rr(h) ? 0 : 1;
    } catch (const ForestError&) {
      bad[static_cast<std::size_t>(t)] = 1;
    }
  }
  int violations = 0;
  for (int b : bad) violations += b;
  c.expect(violations == 0, std::to_string(violations) + " probes above rr");

  struct Curated {
    const char* name;
    StallingsGraph h;
    int radius, length;
  };
  const std::vector<Curated> curated = {
      {"F2", st_build(2, {parse_free_word("a"), parse_free_word("b")}), 2, 3},
      {"<a^2,b^2>", st_build(2, {parse_free_word("aa"), parse_free_word("bb")}), 2, 4},
      {"<a,bab^-1>", st_build(2, {parse_free_word("a"), parse_free_word("baB")}), 2, 4},
      {"ker(F2->Z2)", st_schreier_kernel(2, abelian_regular_perms({2}, {{1}, {0}})), 3, 3}};
  std::string eq;
  for (const auto& k : curated) {
    const auto rep = important_orbit_search(k.h, k.radius, k.length, true);
    c.expect(Integer(rep.count) == st_rr(k.h), std::string("no equality for ") + k.name);
    eq += std::string(eq.empty() ? "" : ", ") + k.name + " " + std::to_string(rep.count) + "/" + str(Rational(rep.rr));
  }

  Rng orng(10011);
  for (int t = 0; t < 1000; ++t) {
    const auto x = random_free_word(orng, 2, 1 + orng.below(6));
    const auto y = random_free_word(orng, 2, 1 + orng.below(6));
    const auto g = random_free_word(orng, 2, 1 + orng.below(6));
    const auto o = order_compare(x, y);
    c.expect((o == 0) == (x == y), "totality");
    const auto back = order_compare(y, x);
    c.expect((back < 0) == (o > 0) && (back > 0) == (o < 0), "antisymmetry");
    c.expect(order_compare(free_mul(g, x), free_mul(g, y)) == o, "left invariance");
  }

  struct Quotient {
    const char* name;
    int m;
    std::vector<std::vector<int>> images;
  };
  for (const auto& [name, m, q] : std::vector<Quotient>{{"ker(F2->Z2)", 2, {{1}, {1}}}, {"ker(F2->Z3)", 3, {{1}, {2}}}}) {
    const auto rep = induced_forest_check(st_schreier_kernel(2, abelian_regular_perms({m}, q)), 4);
    c.expect(rep.ok && rep.copies == static_cast<std::size_t>(m), std::string("induced forest for ") + name);
  }
  return c.done(std::to_string(kProbes) + " probes with count <= rr; equality " + eq +
                "; order sampled on 1000 triples; induced forests ok at radius 4");
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"SHNC suite", shnc_suite},
      {"equality witnesses", equality_witnesses},
      {"oracle agreement", oracle_agreement},
      {"Schreier formulas", schreier_formulas},
      {"Z2*Z3 golden file", golden_file},
      {"brute-force double cosets", brute_force},
      {"orbit-intersection lemma", orbit_lemma},
      {"AMS suite", ams_suite},
      {"conjugation invariance", conjugation_invariance},
      {"important-edge suite", important_edges},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
