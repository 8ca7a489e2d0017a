#include <doctest.h>

#include "hnlab/forest_lab.hpp"
#include "hnlab/random.hpp"

#include <map>
#include <numeric>
#include <set>

using namespace hnlab;

namespace {

FreeWord w(const char* s) { return parse_free_word(s); }

StallingsGraph sub(std::initializer_list<const char*> xs, int r = 2) {
  std::vector<FreeWord> g;
  for (auto x : xs) g.push_back(w(x));
  return st_build(r, g);
}

const FiniteGroup& group_named(const std::vector<FiniteGroup>& gs, const std::string& name) {
  for (const auto& g : gs)
    if (g.name() == name) return g;
  FAIL("no group " << name);
  return gs.front();
}

std::vector<int> all_points(int n) {
  std::vector<int> x(n);
  std::iota(x.begin(), x.end(), 0);
  return x;
}

FreeWord random_word(Rng& rng, int r, int len) {
  FreeWord x;
  for (int j = 0; j < len; ++j) {
    const int g = static_cast<int>(rng.below(static_cast<std::uint64_t>(r))) + 1;
    x.push_back(rng.coin() ? g : -g);
  }
  return free_reduce(x);
}

FreeWord pow_word(const FreeWord& x, int k) {
  FreeWord out;
  for (int j = 0; j < std::abs(k); ++j) out = free_mul(out, k > 0 ? x : free_inverse(x));
  return out;
}

int cmp_int(std::strong_ordering o) { return o < 0 ? -1 : o > 0 ? 1 : 0; }

}  // namespace

TEST_CASE("catalog groups and their subgroups") {
  const auto gs = small_groups(24);
  std::set<std::string> names;
  for (const auto& g : gs) {
    CHECK(g.order() <= 24);
    names.insert(g.name());
  }
  CHECK(names.size() == gs.size());
  const std::map<std::string, std::pair<int, std::size_t>> known = {
      {"C6", {6, 4}},     {"D3", {6, 6}},     {"Dic2", {8, 6}},        {"D4", {8, 10}},
      {"C2xC2xC2", {8, 16}}, {"A4", {12, 10}}, {"C2xC2xC2xC2", {16, 67}}, {"S4", {24, 30}},
      {"SL(2,3)", {24, 15}}, {"C7:C3", {21, 10}}};
  for (const auto& [name, v] : known) {
    const auto& g = group_named(gs, name);
    CHECK(g.order() == v.first);
    CHECK_MESSAGE(subgroups(g).size() == v.second, name);
  }
  // Brute force over all subsets for the small groups.
  for (const auto& g : gs) {
    if (g.order() > 10) continue;
    std::set<ElementSet> brute;
    for (unsigned mask = 1; mask < (1u << g.order()); ++mask) {
      if (!(mask & 1u)) continue;
      ElementSet s;
      for (int x = 0; x < g.order(); ++x)
        if (mask >> x & 1u) s.push_back(x);
      bool closed = true;
      for (int a : s)
        for (int b : s)
          if (!(mask >> g.mul(a, b) & 1u)) closed = false;
      if (closed) brute.insert(s);
    }
    CHECK_MESSAGE(subgroups(g).size() == brute.size(), g.name());
  }
}

TEST_CASE("orbit lemma examples") {
  const auto gs = small_groups(6);
  const auto& z6 = group_named(gs, "C6");
  const auto x = all_points(6);
  SUBCASE("Z6 with A = <2>, B = <3>") {
    const auto a = group_closure(z6, {2}), b = group_closure(z6, {3});
    REQUIRE(a.size() == 3);
    REQUIRE(b.size() == 2);
    const auto rep = orbit_lemma_check(regular_action(z6, a, b), x, x);
    CHECK(rep.ok);
    CHECK(rep.reps.size() == 1);
    CHECK(rep.lhs == 6);
    CHECK(rep.y_orbits * rep.z_orbits == 6);
  }
  SUBCASE("A = B = G") {
    const auto rep = orbit_lemma_check(regular_action(z6, x, x), x, x);
    CHECK(rep.ok);
    CHECK(rep.lhs == 1);
    CHECK(rep.y_orbits * rep.z_orbits == 1);
  }
  SUBCASE("A = B = 1") {
    const auto rep = orbit_lemma_check(regular_action(z6, {0}, {0}), x, x);
    CHECK(rep.ok);
    CHECK(rep.reps.size() == 6);
    CHECK(rep.lhs == 36);
    CHECK(rep.y_orbits * rep.z_orbits == 36);
  }
  SUBCASE("errors") {
    FiniteAction trivial{group_named(gs, "C2"), {{0, 1}, {0, 1}}, {0}, {0}};
    CHECK_THROWS_AS(orbit_lemma_check(trivial, {0, 1}, {0, 1}), ForestError);
    const auto a = group_closure(z6, {2});
    CHECK_THROWS_AS(orbit_lemma_check(regular_action(z6, a, {0}), {0}, x), ForestError);
    CHECK_THROWS_AS(orbit_lemma_check(regular_action(z6, {0, 1}, {0}), x, x), ForestError);
  }
}

TEST_CASE("orbit lemma counts against orbit sizes") {
  // In a free action every (A^d ∩ B)-orbit has |A^d ∩ B| points.
  Rng rng(11);
  const auto gs = small_groups(24);
  for (int t = 0; t < 60; ++t) {
    const auto& g = gs[rng.below(gs.size())];
    const auto subs = subgroups(g);
    const auto& a = subs[rng.below(subs.size())];
    const auto& b = subs[rng.below(subs.size())];
    const auto x = all_points(g.order());
    const auto rep = orbit_lemma_check(regular_action(g, a, b), x, x);
    REQUIRE(rep.ok);
    CHECK(rep.y_orbits * static_cast<int>(a.size()) == g.order());
    CHECK(rep.z_orbits * static_cast<int>(b.size()) == g.order());
    int total = 0;
    for (int d : rep.reps) {
      int meet = 0;
      for (int s : b)
        if (std::find(a.begin(), a.end(), g.mul(g.mul(d, s), g.inverse(d))) != a.end()) ++meet;
      total += g.order() / meet;
    }
    CHECK(rep.lhs == total);
  }
}

TEST_CASE("orbit lemma sweep over regular actions") {
  const auto par = orbit_sweep(24, true);
  const auto ser = orbit_sweep(24, false);
  CHECK(par.failures == 0);
  CHECK(ser.failures == 0);
  CHECK(par.checks == ser.checks);
  CHECK(par.pairs == ser.pairs);
  CHECK(par.groups >= 40);
  MESSAGE("groups " << par.groups << ", subgroup pairs " << par.pairs);
}

TEST_CASE("order_compare conventions") {
  CHECK(order_compare({}, w("a")) < 0);
  CHECK(order_compare(w("a"), w("b")) < 0);
  CHECK(order_compare(w("A"), {}) < 0);
  CHECK(order_compare(w("ab"), w("ab")) == 0);
  CHECK(order_compare(w("aA"), {}) == 0);
  // Degree one is the exponent-sum vector; reading from the largest
  // generator down, the first nonzero entry gives the sign.
  Rng rng(5);
  for (int t = 0; t < 300; ++t) {
    const FreeWord u = random_word(rng, 3, 6), v = random_word(rng, 3, 6);
    std::vector<int> delta(4, 0);
    for (int l : u) delta[std::abs(l)] -= l > 0 ? 1 : -1;
    for (int l : v) delta[std::abs(l)] += l > 0 ? 1 : -1;
    int expect = 0;
    for (int i = 3; i >= 1 && expect == 0; --i) expect = delta[i] > 0 ? -1 : delta[i] < 0 ? 1 : 0;
    if (expect != 0) CHECK(cmp_int(order_compare(u, v)) == expect);
  }
  // [a, b] = a b A B lies in degree 2: M - 1 = X1 X2 - X2 X1 + ..., lead X2 X1.
  CHECK(order_compare({}, w("abAB")) > 0);
  CHECK(order_compare({}, w("baBA")) < 0);
}

TEST_CASE("order_compare is a left- and right-invariant total order") {
  Rng rng(7);
  for (int t = 0; t < 500; ++t) {
    const FreeWord u = random_word(rng, 2, 7), v = random_word(rng, 2, 7), x = random_word(rng, 2, 7);
    const auto uv = order_compare(u, v);
    CHECK(cmp_int(order_compare(v, u)) == -cmp_int(uv));
    CHECK((uv == 0) == (u == v));
    CHECK(order_compare(free_mul(x, u), free_mul(x, v)) == uv);
    CHECK(order_compare(free_mul(u, x), free_mul(v, x)) == uv);
    const auto vx = order_compare(v, x);
    if (uv < 0 && vx < 0) CHECK(order_compare(u, x) < 0);
    if (uv > 0 && vx > 0) CHECK(order_compare(u, x) > 0);
  }
  // Words deep in the lower central series still compare.
  const FreeWord c = w("abAB");
  const FreeWord cc = free_mul(free_mul(c, w("a")), free_mul(free_inverse(c), w("A")));
  CHECK(order_compare(cc, {}) != 0);
  CHECK(cmp_int(order_compare(cc, {})) == -cmp_int(order_compare(free_inverse(cc), {})));
}

TEST_CASE("tree balls") {
  for (int r = 1; r <= 3; ++r)
    for (int R = 0; R <= 4; ++R) {
      const TreeBall ball(r, R);
      std::size_t expect = 1, layer = 2 * r;
      for (int k = 1; k <= R; ++k, layer *= 2 * r - 1) expect += layer;
      CHECK(ball.elements().size() == expect);
      CHECK(ball.edges().size() == expect * r);
      CHECK(ball.edges().size() + 1 == ball.num_vertices());
      CHECK(ball.is_tree());
    }
  const TreeBall ball(2, 3);
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    const FreeWord g = random_word(rng, 2, 3);
    for (const auto& e : ball.edges()) {
      const auto ge = ball.act(g, e);
      if (ge && *ge == e) CHECK(g.empty());
    }
  }
}

TEST_CASE("edge order is left-invariant and monotone along powers") {
  const TreeBall ball(2, 4);
  const auto& es = ball.edges();
  Rng rng(13);
  int tested = 0;
  while (tested < 500) {
    const Edge& e = es[rng.below(es.size())];
    const Edge& f = es[rng.below(es.size())];
    const FreeWord g = random_word(rng, 2, 4);
    const auto ge = ball.act(g, e), gf = ball.act(g, f);
    if (!ge || !gf) continue;
    ++tested;
    const auto ef = edge_compare(e, f);
    CHECK(cmp_int(edge_compare(f, e)) == -cmp_int(ef));
    CHECK((ef == 0) == (e == f));
    CHECK(edge_compare(*ge, *gf) == ef);
  }
  for (int t = 0; t < 200; ++t) {
    FreeWord h;
    do h = random_word(rng, 2, 5);
    while (h.empty());
    const Edge& e = es[rng.below(es.size())];
    const int first = cmp_int(edge_compare(act(pow_word(h, -3), e), act(pow_word(h, -2), e)));
    CHECK(first != 0);
    for (int k = -3; k <= 3; ++k)
      CHECK(cmp_int(edge_compare(act(pow_word(h, k), e), act(pow_word(h, k + 1), e))) == first);
  }
}

TEST_CASE("axes and witness lines") {
  CHECK_FALSE(axis_of(w("a")));
  CHECK_FALSE(axis_of(w("baaB")));
  CHECK_FALSE(axis_of({}));
  const auto ax = axis_of(w("aba"));
  REQUIRE(ax);
  CHECK(free_conjugate(ax->u, ax->c) == w("aba"));
  const auto cs = syllables(ax->c);
  CHECK(cs.size() == 2);
  CHECK(cs.front().gen != cs.back().gen);
  Rng rng(17);
  for (int t = 0; t < 200; ++t) {
    const FreeWord x = random_word(rng, 3, 8);
    const auto a = axis_of(x);
    if (!a) continue;
    CHECK(free_conjugate(a->u, a->c) == x);
    const auto s = syllables(a->c);
    CHECK(s.size() >= 2);
    CHECK(s.front().gen != s.back().gen);
  }
  // The axes of ab and aB both leave 1 through <a_1>; starting the ends one
  // period further on gives the line through their attracting ends.
  CHECK_FALSE(witness_line(w("ab"), w("aB"), 0, 0).has_value());
  const auto line = witness_line(w("ab"), w("aB"), 1, 1);
  REQUIRE(line);
  CHECK(line_simple(*line, 5));
  CHECK(line->p.steps == std::vector<Syllable>{{2, 2}});
  CHECK_FALSE(witness_line(w("ab"), w("abab"), 0, 0).has_value());
}

TEST_CASE("important_test examples") {
  const auto f2 = sub({"a", "b"});
  // Two hyperbolic elements below 1 with different attracting ends.
  FreeWord x = w("ab"), y = w("aB");
  if (order_compare(x, {}) > 0) x = free_inverse(x);
  if (order_compare(y, {}) > 0) y = free_inverse(y);
  std::optional<WitnessLine> line;
  for (int t = 0; t < 6 && !line; ++t) line = witness_line(x, y, t, t);
  REQUIRE(line);
  const Edge top = line_max_edge(*line);
  const auto yes = important_test(f2, top, *line, 3);
  CHECK(yes.important);
  CHECK(yes.reason.empty());
  for (const auto& e : line->p.edges())
    if (e != top) CHECK_FALSE(important_test(f2, e, *line, 3).important);
  CHECK_FALSE(important_test(sub({"ab"}), top, *line, 3).important);

  SUBCASE("one increasing end") {
    auto bad = witness_line(x, free_inverse(y), 0, 0);
    for (int t = 1; t < 6 && !bad; ++t) bad = witness_line(x, free_inverse(y), t, t);
    REQUIRE(bad);
    const auto r = important_test(f2, line_max_edge(*bad), *bad, 3);
    CHECK_FALSE(r.important);
    CHECK(r.reason == "y end is increasing");
  }
  SUBCASE("axis of a cyclic subgroup") {
    const FreeWord h = w("abb");
    const auto hs = sub({"abb"});
    const auto a = axis_of(h);
    REQUIRE(a);
    WitnessLine ax;
    ax.x = h;
    ax.y = free_inverse(h);
    ax.px = TreePath{a->u, syllables(a->c)};
    ax.py = TreePath{a->u, syllables(free_inverse(a->c))};
    ax.p = TreePath{a->u, {}};
    REQUIRE(line_simple(ax, 4));
    int checked = 0;
    for (const auto* path : {&ax.px, &ax.py})
      for (const auto& e : path->edges()) {
        ++checked;
        const auto r = important_test(hs, e, ax, 3);
        CHECK_FALSE(r.important);
        CHECK(r.reason.find("increasing") != std::string::npos);
      }
    CHECK(checked > 0);
    CHECK(st_rr(hs) == 0);
  }
}

TEST_CASE("important_orbit_search examples") {
  struct Case {
    std::vector<const char*> gens;
    int radius, length;
    std::size_t count;
  };
  const std::vector<Case> cases = {{{"a", "b"}, 2, 3, 1},
                                   {{"a"}, 3, 4, 0},
                                   {{"aa", "bb"}, 2, 4, 1},
                                   {{"a", "baB"}, 2, 4, 1}};
  for (const auto& c : cases) {
    std::vector<FreeWord> gens;
    for (auto g : c.gens) gens.push_back(w(g));
    const auto h = st_build(2, gens);
    const auto rep = important_orbit_search(h, c.radius, c.length, true);
    CHECK(rep.count == c.count);
    CHECK(Integer(rep.count) == st_rr(h));
    const auto ser = important_orbit_search(h, c.radius, c.length, false);
    CHECK(ser.representatives == rep.representatives);
  }
}

TEST_CASE("important_orbit_search reaches rr on index-2 kernels") {
  for (const auto& img : std::vector<std::vector<std::vector<int>>>{{{1}, {0}}, {{1}, {1}}}) {
    const auto k = st_schreier_kernel(2, abelian_regular_perms({2}, img));
    REQUIRE(st_rr(k) == 2);
    const auto rep = important_orbit_search(k, 3, 4, true);
    CHECK(rep.count == 2);
  }
}

TEST_CASE("important_orbit_search never exceeds rr") {
  Rng rng(23);
  for (int t = 0; t < 15; ++t) {
    std::vector<FreeWord> gens;
    const int ng = 1 + static_cast<int>(rng.below(3));
    for (int j = 0; j < ng; ++j) gens.push_back(random_word(rng, 2, 1 + static_cast<int>(rng.below(3))));
    const auto h = st_build(2, gens);
    const auto rep = important_orbit_search(h, 2, 3, true);
    CHECK(Integer(rep.count) <= st_rr(h));
  }
}

TEST_CASE("induced forests") {
  SUBCASE("K = F") {
    const auto rep = induced_forest_check(sub({"a", "b"}), 3);
    CHECK(rep.copies == 1);
    CHECK(rep.matches_original);
    CHECK(rep.ok);
  }
  SUBCASE("kernel of F2 -> Z2") {
    const auto k = st_schreier_kernel(2, abelian_regular_perms({2}, {{1}, {1}}));
    const auto rep = induced_forest_check(k, 4);
    CHECK(rep.copies == 2);
    CHECK(rep.axioms);
    CHECK(rep.order_preserved);
    CHECK(rep.free_on_edges);
    CHECK(rep.stabilizers);
    CHECK(rep.ok);
  }
  SUBCASE("kernel of F2 -> Z3") {
    const auto k = st_schreier_kernel(2, abelian_regular_perms({3}, {{1}, {2}}));
    const auto rep = induced_forest_check(k, 3);
    CHECK(rep.copies == 3);
    CHECK(rep.ok);
  }
  SUBCASE("decomposition") {
    const auto k = st_schreier_kernel(2, abelian_regular_perms({2, 2}, {{1, 0}, {0, 1}}));
    const InducedForest forest(k, 2);
    CHECK(forest.n() == 4);
    CHECK(forest.reps()[0].empty());
    Rng rng(29);
    for (int t = 0; t < 100; ++t) {
      const FreeWord g = random_word(rng, 2, 6);
      const auto [c, f] = forest.decompose(g);
      CHECK(st_member(k, f));
      CHECK(free_mul(forest.reps()[c], f) == g);
    }
  }
  SUBCASE("infinite index") { CHECK_THROWS_AS(induced_forest_check(sub({"a"}), 2), ForestError); }
}
