// Verdict flags of the discrete oracle on random and adversarial systems.

#include <cstdio>

#include "siframe/siframe.hpp"

int main() {
  using namespace siframe;
  std::vector<DiscreteModel> models;
  for (std::uint64_t s = 1; s <= 4; ++s) models.push_back(random_model(16, 8, 1, 2, 1 + s % 3, s));
  for (auto& m : adversarial_models(16, 8, 1, 2, 1)) models.push_back(m);
  std::printf("%-16s r  frame rank band dual minnorm  B\n", "model");
  for (const auto& m : models) {
    const VerdictFlags v = verdict_equivalence(m);
    std::printf("%-16s %zu  %5d %4d %4d %4d %7d  %.3g\n", m.label.c_str(), m.r(),
                v.frame_22, v.rank_constant, v.band_ok, v.dual_exists, v.min_norm_consistent, v.B);
  }
}
