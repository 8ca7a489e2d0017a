// hnlab: verify, gen, rank and sandbox commands.
//
// Exit status: 0 ok, 1 usage or input error, 2 inequality violation or
// internal failure (the instance is printed to stderr).

#include "hnlab/harness.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace hnlab;

namespace {

constexpr int kInputError = 1;
constexpr int kViolation = 2;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw HarnessError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// A JSON document, or JSON Lines as written by gen.
std::vector<json> read_docs(const std::string& path) {
  const std::string text = slurp(path);
  try {
    json j = json::parse(text);
    if (j.is_array()) return std::vector<json>(j.begin(), j.end());
    return {j};
  } catch (const json::parse_error&) {
  }
  std::vector<json> out;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw HarnessError(path + ": " + e.what());
    }
  }
  return out;
}

json read_one(const std::string& path) {
  auto docs = read_docs(path);
  if (docs.size() != 1) throw HarnessError(path + ": expected one JSON document");
  return docs.front();
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw HarnessError("cannot write " + path);
  out << j.dump(2) << "\n";
}

int run_verify(const std::string& kind_s, const std::string& in, const std::string& out, bool timing) {
  const Kind kind = parse_kind(kind_s);
  const auto docs = read_docs(in);
  std::vector<Instance> insts;
  for (const auto& d : docs) insts.push_back(instance_from_json(d));
  const auto reports = verify_batch(kind, insts, true);
  json all = json::array();
  bool ok = true;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    all.push_back(report_to_json(reports[i], timing));
    if (!reports[i].ok) {
      ok = false;
      std::cerr << "violation in instance " << i << ":\n" << docs[i].dump(2) << "\n";
    }
  }
  const json result = docs.size() == 1 ? all.front() : all;
  if (!out.empty()) write_json(out, result);
  std::cout << result.dump(2) << "\n";
  return ok ? 0 : kViolation;
}

int run_gen(InstanceParams p, const std::string& universe, const std::string& dir) {
  p.universe = universe_from_json(read_one(universe));
  const auto insts = gen_random(p);
  if (dir.empty()) {
    for (const auto& inst : insts) std::cout << instance_to_json(inst).dump() << "\n";
    return 0;
  }
  std::filesystem::create_directories(dir);
  for (const auto& inst : insts) {
    char name[32];
    std::snprintf(name, sizeof name, "instance-%04zu.json", static_cast<std::size_t>(*inst.id));
    write_json((std::filesystem::path(dir) / name).string(), instance_to_json(inst));
  }
  return 0;
}

int report(const json& j) {
  std::cout << j.dump(2) << "\n";
  return j.value("ok", true) ? 0 : kViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Strengthened Hanna Neumann inequalities over free products"};
  app.require_subcommand(1);

  std::string kind, in, out;
  bool timing = false;
  auto* verify_cmd = app.add_subcommand("verify", "Check one inequality on an instance file");
  verify_cmd->add_option("--kind", kind, "shnc, ams, vfree or main")->required()->check(CLI::IsMember({"shnc", "ams", "vfree", "main"}));
  verify_cmd->add_option("--in", in, "Instance file (JSON, JSON array or JSON Lines)")->required();
  verify_cmd->add_option("--json", out, "Also write the report here");
  verify_cmd->add_flag("--timing", timing, "Include wall-clock seconds in the report");

  InstanceParams p;
  std::string universe, dir;
  auto* gen_cmd = app.add_subcommand("gen", "Write seeded random instances");
  gen_cmd->add_option("--seed", p.seed)->required();
  gen_cmd->add_option("--universe", universe, "Universe file")->required();
  gen_cmd->add_option("--count", p.count)->required();
  gen_cmd->add_option("--max-gens", p.max_gens)->required();
  gen_cmd->add_option("--max-len", p.max_len, "Maximum syllables per generator")->required();
  gen_cmd->add_option("--min-gens", p.min_gens)->capture_default_str();
  gen_cmd->add_option("--min-len", p.min_len)->capture_default_str();
  gen_cmd->add_option("--bound", p.bound, "Free-abelian entries lie in [-bound, bound]")->capture_default_str();
  gen_cmd->add_option("--out", dir, "Directory for instance-NNNN.json files (default: JSON Lines on stdout)");

  std::string rank_in;
  auto* rank_cmd = app.add_subcommand("rank", "Rank report for a subgroup file");
  rank_cmd->add_option("--in", rank_in)->required();

  std::string mode, sandbox_in;
  auto* sandbox_cmd = app.add_subcommand("sandbox", "Forest machinery on small inputs");
  sandbox_cmd->add_option("mode", mode, "orbit, order, induced or important")
      ->required()
      ->check(CLI::IsMember({"orbit", "order", "induced", "important"}));
  sandbox_cmd->add_option("--in", sandbox_in)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kInputError;
  }

  try {
    if (*verify_cmd) return run_verify(kind, in, out, timing);
    if (*gen_cmd) return run_gen(p, universe, dir);
    if (*rank_cmd) return report(rank_report(read_one(rank_in)));
    const json spec = read_one(sandbox_in);
    if (mode == "orbit") return report(sandbox_orbit(spec));
    if (mode == "order") return report(sandbox_order(spec));
    if (mode == "induced") return report(sandbox_induced(spec));
    return report(sandbox_important(spec));
  } catch (const HarnessError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kViolation;
  }
}
