#include "hnlab/harness.hpp"

#include "hnlab/random.hpp"

#include <chrono>
#include <exception>
#include <fstream>
#include <limits>

namespace hnlab {

namespace {

json integer_json(const Integer& x) {
  if (x >= std::numeric_limits<long long>::min() && x <= std::numeric_limits<long long>::max())
    return static_cast<long long>(x);
  return x.str();
}

Integer integer_from_json(const json& j) {
  if (j.is_number_integer()) return Integer(j.get<long long>());
  if (j.is_string()) {
    try {
      return Integer(j.get<std::string>());
    } catch (const std::exception&) {
    }
  }
  throw HarnessError("expected an integer, got " + j.dump());
}

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw HarnessError(std::string("missing field \"") + key + "\"");
  return j.at(key);
}

json load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw HarnessError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw HarnessError(path + ": " + e.what());
  }
}

std::vector<NormalForm> words_from_json(const Universe& u, const json& gens) {
  if (!gens.is_array()) throw HarnessError("generators must be an array");
  std::vector<NormalForm> out;
  for (const auto& g : gens) out.push_back(word_from_json(u, g));
  return out;
}

std::vector<FreeWord> free_words(const std::vector<NormalForm>& ws) {
  std::vector<FreeWord> out;
  for (const auto& w : ws) out.push_back(to_free_word(w));
  return out;
}

}  // namespace

std::shared_ptr<const Universe> universe_from_json(const json& j) {
  if (j.is_string()) return universe_from_json(load_file(j.get<std::string>()));
  const json& fs = field(j, "factors");
  if (!fs.is_array() || fs.empty()) throw HarnessError("factors must be a nonempty array");
  std::vector<FactorSpec> specs;
  try {
    for (const auto& f : fs) {
      const std::string kind = field(f, "kind").get<std::string>();
      if (kind == "finite_cyclic")
        specs.push_back(FactorSpec::cyclic(field(f, "n").get<int>()));
      else if (kind == "free_abelian")
        specs.push_back(FactorSpec::free_abelian(field(f, "k").get<int>()));
      else if (kind == "finite_table")
        specs.push_back(FactorSpec::table(field(f, "table").get<FiniteTable>()));
      else
        throw HarnessError("unknown factor kind \"" + kind + "\"");
    }
    return std::make_shared<const Universe>(std::move(specs));
  } catch (const AlgebraError& e) {
    throw HarnessError(e.what());
  } catch (const json::exception& e) {
    throw HarnessError(e.what());
  }
}

json universe_to_json(const Universe& u) {
  json fs = json::array();
  for (const auto& f : u.factors()) {
    switch (f.kind()) {
      case FactorSpec::Kind::finite_cyclic:
        fs.push_back({{"kind", "finite_cyclic"}, {"n", f.order()}});
        break;
      case FactorSpec::Kind::free_abelian:
        fs.push_back({{"kind", "free_abelian"}, {"k", f.rank()}});
        break;
      case FactorSpec::Kind::finite_table:
        fs.push_back({{"kind", "finite_table"}, {"table", f.mult_table()}});
        break;
    }
  }
  return {{"factors", fs}};
}

NormalForm word_from_json(const Universe& u, const json& j) {
  try {
    if (j.is_string()) {
      if (!u.is_free()) throw HarnessError("letter strings need a free universe");
      const FreeWord w = parse_free_word(j.get<std::string>());
      for (int l : w)
        if (static_cast<std::size_t>(std::abs(l)) > u.num_factors()) throw HarnessError("letter beyond the rank");
      return from_free_word(u, w);
    }
    if (!j.is_array()) throw HarnessError("a word is an array of [factor, elem]");
    Word w;
    for (const auto& l : j) {
      if (!l.is_array() || l.size() != 2) throw HarnessError("a letter is [factor, elem]");
      const long long i = l[0].get<long long>();
      if (i < 0 || static_cast<std::size_t>(i) >= u.num_factors()) throw HarnessError("factor index out of range");
      Letter letter{static_cast<std::size_t>(i), 0};
      if (u.factor(letter.factor).is_finite()) {
        letter.elem = l[1].get<int>();
      } else {
        if (!l[1].is_array()) throw HarnessError("free-abelian elements are integer arrays");
        ZVec v;
        for (const auto& c : l[1]) v.push_back(integer_from_json(c));
        letter.elem = std::move(v);
      }
      u.check_letter(letter);
      w.push_back(std::move(letter));
    }
    return u.reduce(w);
  } catch (const AlgebraError& e) {
    throw HarnessError(e.what());
  } catch (const StallingsError& e) {
    throw HarnessError(e.what());
  } catch (const json::exception& e) {
    throw HarnessError(e.what());
  }
}

json word_to_json(const NormalForm& w) {
  json out = json::array();
  for (const auto& l : w.letters()) {
    if (const int* x = std::get_if<int>(&l.elem)) {
      out.push_back({l.factor, *x});
    } else {
      json v = json::array();
      for (const auto& c : std::get<ZVec>(l.elem)) v.push_back(integer_json(c));
      out.push_back({l.factor, v});
    }
  }
  return out;
}

json rational_to_json(const Rational& q) {
  return {{"num", integer_json(numerator(q))}, {"den", integer_json(denominator(q))}};
}

Rational rational_from_json(const json& j) {
  const Integer den = integer_from_json(field(j, "den"));
  if (den == 0) throw HarnessError("zero denominator");
  return Rational(integer_from_json(field(j, "num")), den);
}

Instance instance_from_json(const json& j) {
  Instance inst;
  inst.universe = universe_from_json(field(j, "universe"));
  inst.a = words_from_json(*inst.universe, field(field(j, "A"), "generators"));
  inst.b = words_from_json(*inst.universe, field(field(j, "B"), "generators"));
  if (j.contains("seed")) inst.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("id")) inst.id = j["id"].get<std::uint64_t>();
  return inst;
}

json instance_to_json(const Instance& inst) {
  json j;
  if (inst.id) j["id"] = *inst.id;
  if (inst.seed) j["seed"] = *inst.seed;
  j["universe"] = universe_to_json(*inst.universe);
  for (const auto& [key, gens] : {std::pair{"A", &inst.a}, std::pair{"B", &inst.b}}) {
    json g = json::array();
    for (const auto& w : *gens) g.push_back(word_to_json(w));
    j[key] = {{"generators", g}};
  }
  return j;
}

Kind parse_kind(const std::string& s) {
  if (s == "shnc") return Kind::shnc;
  if (s == "ams") return Kind::ams;
  if (s == "vfree") return Kind::vfree;
  if (s == "main") return Kind::main;
  throw HarnessError("unknown kind \"" + s + "\"");
}

std::string kind_name(Kind k) {
  switch (k) {
    case Kind::shnc:
      return "shnc";
    case Kind::ams:
      return "ams";
    case Kind::vfree:
      return "vfree";
    case Kind::main:
      return "main";
  }
  return "?";
}

namespace {

void verify_shnc(const Instance& inst, VerificationReport& r) {
  const Universe& u = *inst.universe;
  if (!u.is_free()) throw HarnessError("shnc needs a free universe (every factor Z)");
  const int rank = static_cast<int>(u.num_factors());
  const auto a = st_build(rank, free_words(inst.a)), b = st_build(rank, free_words(inst.b));
  for (const auto& c : st_pullback(a, b)) r.terms.push_back({from_free_word(u, c.witness), Rational(st_rr(c.intersection))});
  r.rhs = Rational(st_rr(a) * st_rr(b));
}

void verify_ams(const Instance& inst, VerificationReport& r) {
  if (!inst.universe->all_free_abelian()) throw HarnessError("ams needs every factor free abelian");
  const auto a = ka_build(inst.universe, inst.a), b = ka_build(inst.universe, inst.b);
  const auto pb = ka_pullback(a, b);
  for (const auto& c : pb.components) r.terms.push_back({c.witness, Rational(ka_rr(c.intersection))});
  r.omitted_rank_zero = pb.omitted_rank_zero;
  r.rhs = Rational(ka_rr(a) * ka_rr(b));
}

void verify_vfree(const Instance& inst, VerificationReport& r) {
  if (!inst.universe->all_finite()) throw HarnessError("vfree needs every factor finite");
  const Extension e(inst.universe);
  const FreeKernel fk(e);
  // rk through the free basis of F, checked against the Kurosh kernel.
  auto rk = [&](const SubgroupHandle& h) {
    const Integer st = stallings_kernel_rr(fk, h);
    if (st != ka_rr(h.kernel)) r.cross_check = false;
    return Rational(st, Integer(h.image.size()));
  };
  const auto ha = sub_handle(e, inst.a), hb = sub_handle(e, inst.b);
  const auto dcs = double_cosets(e, ha, hb);
  for (const auto& d : dcs.entries) r.terms.push_back({d.witness, rk(d.intersection)});
  r.omitted_rank_zero = dcs.omitted_rank_zero;
  r.rhs = Rational(Integer(e.n())) * rk(ha) * rk(hb);
}

void verify_main(const Instance& inst, VerificationReport& r) {
  const Extension e(inst.universe);
  const auto ha = sub_handle(e, inst.a), hb = sub_handle(e, inst.b);
  const auto dcs = double_cosets(e, ha, hb);
  for (const auto& d : dcs.entries) r.terms.push_back({d.witness, total_rank(e, d.intersection)});
  r.omitted_rank_zero = dcs.omitted_rank_zero;
  r.rhs = total_rank(e, ha) * total_rank(e, hb);
}

}  // namespace

VerificationReport verify(Kind kind, const Instance& inst) {
  const auto t0 = std::chrono::steady_clock::now();
  VerificationReport r;
  r.kind = kind;
  r.seed = inst.seed;
  r.id = inst.id;
  switch (kind) {
    case Kind::shnc:
      verify_shnc(inst, r);
      break;
    case Kind::ams:
      verify_ams(inst, r);
      break;
    case Kind::vfree:
      verify_vfree(inst, r);
      break;
    case Kind::main:
      verify_main(inst, r);
      break;
  }
  for (const auto& t : r.terms) r.lhs += t.rank;
  r.ok = r.cross_check && r.lhs <= r.rhs;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::vector<VerificationReport> verify_batch(Kind kind, const std::vector<Instance>& insts, bool parallel) {
  std::vector<VerificationReport> out(insts.size());
  std::vector<std::exception_ptr> errors(insts.size());
  const long n = static_cast<long>(insts.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (long i = 0; i < n; ++i) {
    try {
      out[i] = verify(kind, insts[i]);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

json report_to_json(const VerificationReport& r, bool timing) {
  json j;
  j["kind"] = kind_name(r.kind);
  if (r.id) j["id"] = *r.id;
  if (r.seed) j["seed"] = *r.seed;
  j["lhs"] = rational_to_json(r.lhs);
  j["rhs"] = rational_to_json(r.rhs);
  json terms = json::array();
  for (const auto& t : r.terms) terms.push_back({{"witness", word_to_json(t.witness)}, {"rank", rational_to_json(t.rank)}});
  j["terms"] = terms;
  j["omitted_rank_zero"] = r.omitted_rank_zero;
  if (r.kind == Kind::vfree) j["cross_check"] = r.cross_check;
  j["ok"] = r.ok;
  if (timing) j["seconds"] = r.seconds;
  return j;
}

std::vector<Instance> gen_random(const InstanceParams& p) {
  if (!p.universe) throw HarnessError("no universe");
  if (p.count == 0) throw HarnessError("count must be positive");
  if (p.min_gens == 0 || p.min_gens > p.max_gens) throw HarnessError("empty generator-count range");
  if (p.min_len == 0 || p.min_len > p.max_len) throw HarnessError("empty length range");
  if (p.bound <= 0) throw HarnessError("entry bound must be positive");
  const Universe& u = *p.universe;
  // A single factor has normal forms of one syllable only.
  const std::size_t max_len = u.num_factors() == 1 ? 1 : p.max_len;
  const std::size_t min_len = std::min(p.min_len, max_len);
  Rng rng(p.seed);
  std::vector<Instance> out;
  for (std::size_t k = 0; k < p.count; ++k) {
    Instance inst;
    inst.universe = p.universe;
    inst.seed = p.seed;
    inst.id = k;
    for (auto* gens : {&inst.a, &inst.b}) {
      const auto ng = static_cast<std::size_t>(rng.range(static_cast<long>(p.min_gens), static_cast<long>(p.max_gens)));
      for (std::size_t g = 0; g < ng; ++g) {
        const auto len = static_cast<std::size_t>(rng.range(static_cast<long>(min_len), static_cast<long>(max_len)));
        gens->push_back(random_normal_form(u, rng, len, p.bound));
      }
    }
    out.push_back(std::move(inst));
  }
  return out;
}

json rank_report(const json& sub) {
  std::shared_ptr<const Universe> u;
  if (sub.contains("universe")) {
    u = universe_from_json(sub["universe"]);
  } else {
    const int r = field(sub, "rank").get<int>();
    if (r <= 0) throw HarnessError("rank must be positive");
    u = std::make_shared<const Universe>(std::vector<FactorSpec>(static_cast<std::size_t>(r), FactorSpec::free_abelian(1)));
  }
  const auto gens = words_from_json(*u, field(sub, "generators"));
  const auto ka = ka_build(u, gens);
  const Extension e(u);
  const auto h = sub_handle(e, gens);
  json j;
  j["universe"] = universe_to_json(*u);
  j["rr_K"] = integer_json(ka_rr(ka));
  j["rk"] = rational_to_json(rk_virtual(h));
  j["total_rank"] = rational_to_json(total_rank(e, h));
  j["n"] = e.n();
  j["image_order"] = h.image.size();
  j["core"] = {{"junctions", ka.num_junctions()},
               {"fvertices", ka.fvertices().size()},
               {"nontrivial_fvertices", ka.num_nontrivial_fvertices()},
               {"edges", ka.edges().size()},
               {"kurosh_rank", integer_json(ka_kurosh_rank(ka))}};
  j["kernel_core"] = {{"junctions", h.kernel.num_junctions()},
                      {"fvertices", h.kernel.fvertices().size()},
                      {"nontrivial_fvertices", h.kernel.num_nontrivial_fvertices()},
                      {"edges", h.kernel.edges().size()},
                      {"kurosh_rank", integer_json(ka_kurosh_rank(h.kernel))},
                      {"rr_K", integer_json(ka_rr(h.kernel))}};
  if (u->is_free()) j["st_rr"] = integer_json(st_rr(st_build(static_cast<int>(u->num_factors()), free_words(gens))));
  if (u->all_finite()) {
    const FreeKernel fk(e);
    j["kernel_free_rank"] = fk.rank();
    j["kernel_st_rr"] = integer_json(stallings_kernel_rr(fk, h));
  }
  return j;
}

// ---------------------------------------------------------------------------
// Sandbox

namespace {

FiniteGroup group_from_json(const json& j) {
  if (j.contains("name")) {
    const std::string name = j["name"].get<std::string>();
    for (auto& g : small_groups(24))
      if (g.name() == name) return g;
    throw HarnessError("no catalog group named \"" + name + "\"");
  }
  try {
    return FiniteGroup(j.value("label", "G"), field(j, "table").get<std::vector<std::vector<int>>>());
  } catch (const ForestError& e) {
    throw HarnessError(e.what());
  }
}

StallingsGraph free_subgroup_from_json(const json& spec) {
  const int r = field(spec, "rank").get<int>();
  if (r <= 0) throw HarnessError("rank must be positive");
  if (spec.contains("quotient")) {
    const auto& q = spec["quotient"];
    return st_schreier_kernel(
        r, abelian_regular_perms(field(q, "moduli").get<std::vector<int>>(),
                                 field(q, "images").get<std::vector<std::vector<int>>>()));
  }
  std::vector<FreeWord> gens;
  for (const auto& g : field(spec, "generators")) {
    const FreeWord w = parse_free_word(g.get<std::string>());
    for (int l : w)
      if (std::abs(l) > r) throw HarnessError("letter beyond the rank");
    gens.push_back(w);
  }
  return st_build(r, gens);
}

json edge_json(const Edge& e) { return {{"g", format_free_word(e.g)}, {"i", e.i}}; }

template <class F>
json guarded(F f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw HarnessError(e.what());
  } catch (const StallingsError& e) {
    throw HarnessError(e.what());
  }
}

}  // namespace

json sandbox_orbit(const json& spec) {
  return guarded([&] {
    if (spec.contains("sweep")) {
      const int max_order = field(spec["sweep"], "max_order").get<int>();
      const auto rep = orbit_sweep(max_order, spec["sweep"].value("parallel", true));
      return json{{"groups", rep.groups},   {"pairs", rep.pairs},        {"checks", rep.checks},
                  {"failures", rep.failures}, {"ok", rep.failures == 0}};
    }
    const FiniteGroup g = group_from_json(field(spec, "group"));
    auto sub = [&](const char* key) {
      ElementSet gens = spec.contains(key) ? spec[key].get<ElementSet>() : ElementSet{};
      for (int x : gens)
        if (x < 0 || x >= g.order()) throw HarnessError(std::string(key) + " has an element out of range");
      return group_closure(g, gens);
    };
    FiniteAction fa = regular_action(g, sub("A"), sub("B"));
    if (spec.contains("action")) fa.perm = spec["action"].get<std::vector<std::vector<int>>>();
    std::vector<int> all(static_cast<std::size_t>(fa.num_points()));
    for (int x = 0; x < fa.num_points(); ++x) all[x] = x;
    const auto y = spec.contains("Y") ? spec["Y"].get<std::vector<int>>() : all;
    const auto z = spec.contains("Z") ? spec["Z"].get<std::vector<int>>() : all;
    OrbitLemmaReport rep;
    try {
      rep = orbit_lemma_check(fa, y, z);
    } catch (const ForestError& e) {
      throw HarnessError(e.what());
    }
    return json{{"group", g.name()},
                {"order", g.order()},
                {"A", fa.a},
                {"B", fa.b},
                {"double_coset_reps", rep.reps},
                {"terms", rep.terms},
                {"lhs", rep.lhs},
                {"y_orbits", rep.y_orbits},
                {"z_orbits", rep.z_orbits},
                {"rhs", rep.y_orbits * rep.z_orbits},
                {"well_defined", rep.well_defined},
                {"injective", rep.injective},
                {"ok", rep.ok}};
  });
}

json sandbox_order(const json& spec) {
  return guarded([&] {
    json results = json::array();
    for (const auto& p : field(spec, "pairs")) {
      if (!p.is_array() || p.size() != 2) throw HarnessError("pairs are [u, v]");
      const auto c = order_compare(parse_free_word(p[0].get<std::string>()), parse_free_word(p[1].get<std::string>()));
      results.push_back(c < 0 ? "<" : c > 0 ? ">" : "=");
    }
    return json{{"results", results}, {"ok", true}};
  });
}

json sandbox_induced(const json& spec) {
  return guarded([&] {
    const auto k = free_subgroup_from_json(spec);
    InducedForestReport rep;
    try {
      rep = induced_forest_check(k, spec.value("radius", 4));
    } catch (const ForestError& e) {
      throw HarnessError(e.what());
    }
    return json{{"copies", rep.copies},
                {"samples", rep.samples},
                {"axioms", rep.axioms},
                {"order_preserved", rep.order_preserved},
                {"free_on_edges", rep.free_on_edges},
                {"stabilizers", rep.stabilizers},
                {"matches_original", rep.matches_original},
                {"ok", rep.ok}};
  });
}

json sandbox_important(const json& spec) {
  return guarded([&] {
    const auto h = free_subgroup_from_json(spec);
    json out;
    if (spec.contains("test")) {
      const auto& t = spec["test"];
      const auto line = witness_line(parse_free_word(field(t, "x").get<std::string>()),
                                     parse_free_word(field(t, "y").get<std::string>()), t.value("tx", 0),
                                     t.value("ty", 0));
      if (!line) throw HarnessError("x and y do not give a simple witness line at these offsets");
      const Edge e = t.contains("edge") ? Edge{parse_free_word(field(t["edge"], "g").get<std::string>()),
                                               field(t["edge"], "i").get<int>()}
                                        : line_max_edge(*line);
      const auto r = important_test(h, e, *line, t.value("bound", 2));
      out["test"] = {{"edge", edge_json(e)}, {"important", r.important}, {"reason", r.reason}};
    }
    if (spec.contains("radius") || spec.contains("length")) {
      const auto rep = important_orbit_search(h, spec.value("radius", 2), spec.value("length", 4));
      json reps = json::array();
      for (const auto& e : rep.representatives) reps.push_back(edge_json(e));
      out["search"] = {{"count", rep.count}, {"rr", integer_json(rep.rr)}, {"lines", rep.lines}, {"representatives", reps}};
    }
    out["ok"] = true;
    return out;
  });
}

}  // namespace hnlab
