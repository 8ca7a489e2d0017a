#pragma once

// Seeded generator with platform-independent bounded draws, so that a fixed
// seed produces byte-identical instances everywhere.

#include "hnlab/algebra.hpp"

#include <cstdint>
#include <random>

namespace hnlab {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  // Uniform in [lo, hi].
  long range(long lo, long hi) {
    return lo + static_cast<long>(below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  bool coin() { return below(2) == 1; }

 private:
  std::mt19937_64 engine_;
};

// A random non-identity element of factor i; free-abelian entries are drawn
// from [-bound, bound].
Element random_element(const Universe& u, std::size_t i, Rng& rng, long bound);

// `len` random letters (not necessarily reduced).
Word random_word(const Universe& u, Rng& rng, std::size_t len, long bound);

// A random normal form with exactly `syllables` syllables.
NormalForm random_normal_form(const Universe& u, Rng& rng, std::size_t syllables, long bound);

}  // namespace hnlab
