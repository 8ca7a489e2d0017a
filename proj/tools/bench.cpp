// Serial vs OpenMP timings for the parallel kernels; each pair of runs must
// agree exactly.

#include "hnlab/forest_lab.hpp"
#include "hnlab/harness.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>

using namespace hnlab;

namespace {

double seconds(const std::function<void()>& f, int reps) {
  double best = 1e30;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

bool row(const char* name, const std::function<bool(bool)>& run, int reps) {
  bool serial_ok = false, parallel_ok = false;
  const double s = seconds([&] { serial_ok = run(false); }, reps);
  const double p = seconds([&] { parallel_ok = run(true); }, reps);
  const bool ok = serial_ok && parallel_ok;
  std::printf("%-28s serial %9.4f s  parallel %9.4f s  speedup %5.2f  %s\n", name, s, p, s / p,
              ok ? "match" : "MISMATCH");
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Serial and parallel timings"};
  int threads = 0, reps = 3, order = 16, count = 60;
  app.add_option("--threads", threads, "OpenMP threads (0: runtime default)");
  app.add_option("--reps", reps, "Best of this many runs")->capture_default_str();
  app.add_option("--max-order", order, "Orbit sweep group order bound")->capture_default_str();
  app.add_option("--count", count, "Instances per batch")->capture_default_str();
  CLI11_PARSE(app, argc, argv);
  if (threads > 0) omp_set_num_threads(threads);
  std::printf("threads %d\n", omp_get_max_threads());

  bool ok = true;

  const auto sweep_ref = orbit_sweep(order, false);
  ok &= row("orbit_sweep", [&](bool par) {
    const auto r = orbit_sweep(order, par);
    return r.checks == sweep_ref.checks && r.failures == sweep_ref.failures;
  }, reps);

  const auto kernel = st_schreier_kernel(2, abelian_regular_perms({2}, {{1}, {0}}));
  const auto search_ref = important_orbit_search(kernel, 3, 4, false);
  ok &= row("important_orbit_search", [&](bool par) {
    return important_orbit_search(kernel, 3, 4, par).representatives == search_ref.representatives;
  }, reps);

  for (const auto& [name, uni, kind] : std::vector<std::tuple<const char*, const char*, Kind>>{
           {"verify_batch main Z2*Z3", R"({"factors":[{"kind":"finite_cyclic","n":2},{"kind":"finite_cyclic","n":3}]})",
            Kind::main},
           {"verify_batch ams Z2*Z2", R"({"factors":[{"kind":"free_abelian","k":2},{"kind":"free_abelian","k":2}]})",
            Kind::ams}}) {
    InstanceParams p;
    p.seed = 77;
    p.universe = universe_from_json(json::parse(uni));
    p.count = static_cast<std::size_t>(count);
    const auto insts = gen_random(p);
    std::vector<std::string> ref;
    for (const auto& r : verify_batch(kind, insts, false)) ref.push_back(report_to_json(r).dump());
    ok &= row(name, [&, kind = kind](bool par) {
      const auto reps_ = verify_batch(kind, insts, par);
      for (std::size_t i = 0; i < reps_.size(); ++i)
        if (report_to_json(reps_[i]).dump() != ref[i]) return false;
      return true;
    }, reps);
  }
  return ok ? 0 : 1;
}
