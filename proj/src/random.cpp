#include "hnlab/random.hpp"

namespace hnlab {

Element random_element(const Universe& u, std::size_t i, Rng& rng, long bound) {
  const auto& f = u.factor(i);
  if (f.is_finite()) {
    if (f.order() == 1) return 0;
    return 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(f.order() - 1)));
  }
  while (true) {
    ZVec v;
    for (int c = 0; c < f.rank(); ++c) v.emplace_back(rng.range(-bound, bound));
    Element e = v;
    if (!u.is_identity(e)) return e;
  }
}

Word random_word(const Universe& u, Rng& rng, std::size_t len, long bound) {
  Word w;
  for (std::size_t j = 0; j < len; ++j) {
    const std::size_t i = rng.below(u.num_factors());
    w.push_back(Letter{i, random_element(u, i, rng, bound)});
  }
  return w;
}

NormalForm random_normal_form(const Universe& u, Rng& rng, std::size_t syllables, long bound) {
  Word w;
  std::size_t prev = u.num_factors();
  for (std::size_t j = 0; j < syllables; ++j) {
    std::size_t i;
    do {
      i = rng.below(u.num_factors());
    } while (u.num_factors() > 1 && i == prev);
    if (u.num_factors() == 1 && j > 0) break;
    w.push_back(Letter{i, random_element(u, i, rng, bound)});
    prev = i;
  }
  return u.reduce(w);
}

}  // namespace hnlab
