#pragma once

// Instance files, seeded generation, inequality verification and reports.

#include "hnlab/forest_lab.hpp"
#include "hnlab/kurosh.hpp"
#include "hnlab/virtual.hpp"

#include <json.hpp>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace hnlab {

using json = nlohmann::json;

// Malformed input or a kind/universe mismatch.
class HarnessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::shared_ptr<const Universe> universe_from_json(const json& j);
json universe_to_json(const Universe& u);

// Array of [factor, elem]; on a free universe a letter string such as "aB"
// is accepted too.
NormalForm word_from_json(const Universe& u, const json& j);
json word_to_json(const NormalForm& w);

// {"num": n, "den": d}, fully reduced.
json rational_to_json(const Rational& q);
Rational rational_from_json(const json& j);

struct Instance {
  std::shared_ptr<const Universe> universe;
  std::vector<NormalForm> a, b;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> id;
};

Instance instance_from_json(const json& j);
json instance_to_json(const Instance& inst);

enum class Kind { shnc, ams, vfree, main };

Kind parse_kind(const std::string& s);
std::string kind_name(Kind k);

struct Term {
  NormalForm witness;
  Rational rank;
};

struct VerificationReport {
  Kind kind = Kind::main;
  Rational lhs, rhs;
  std::vector<Term> terms;  // one per listed double coset
  bool ok = false;          // lhs <= rhs and every cross-check agrees
  // Double cosets with rank-0 intersections were skipped (see ka_pullback).
  bool omitted_rank_zero = false;
  // vfree: Stallings ranks through the free basis agree with ka_rr.
  bool cross_check = true;
  std::optional<std::uint64_t> seed, id;
  double seconds = 0;
};

// Throws HarnessError when the universe does not fit the kind.
VerificationReport verify(Kind kind, const Instance& inst);

// Independent per instance; results in input order.
std::vector<VerificationReport> verify_batch(Kind kind, const std::vector<Instance>& insts, bool parallel);

// Timing is left out unless asked for, so reports are reproducible.
json report_to_json(const VerificationReport& r, bool timing = false);

struct InstanceParams {
  std::uint64_t seed = 0;
  std::shared_ptr<const Universe> universe;
  std::size_t count = 1;
  std::size_t min_gens = 1, max_gens = 4;
  std::size_t min_len = 1, max_len = 6;  // syllables per generator
  long bound = 3;                        // free-abelian entries in [-bound, bound]
};

// Deterministic in the parameters; generators are nontrivial normal forms.
std::vector<Instance> gen_random(const InstanceParams& p);

// rr_K, rk and total rank plus kernel statistics. Accepts the free-group
// file {"rank", "generators": ["ab", ...]} or a universe subgroup file.
json rank_report(const json& subgroup);

// Sandbox drivers; every report carries "ok".
json sandbox_orbit(const json& spec);
json sandbox_order(const json& spec);
json sandbox_induced(const json& spec);
json sandbox_important(const json& spec);

}  // namespace hnlab
