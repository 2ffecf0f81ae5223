// Dual of the hat system and reconstruction of a random member of its span.

#include <cstdio>

#include "siframe/siframe.hpp"

int main() {
  using namespace siframe;
  CorpusParams p;
  p.inv_h = 32;
  const GeneratorSystem phi = corpus_build_spec("hat", p);

  FrequencyGrid freq;
  freq.n1 = 64;
  freq.n2 = 8;
  freq.J = 16;
  const SpectralProfile S = spectral_profile(bracket(phi, phi, freq));
  std::printf("k0 = %lld, constancy = %d, C = %.6f\n", static_cast<long long>(S.k0), S.constancy, S.C_est);

  const DualSystem D = dual_generators(phi, freq);
  std::printf("dual residual %.3e, tail_mass %.3e, filter window %lld taps\n", D.residual, D.tail_mass,
              static_cast<long long>(D.filters[0].data().size()));

  const SampledField f = synthesize(phi, {random_taps(1, 50, 7)});
  for (MixedExponents e : {MixedExponents{1, 1}, MixedExponents{2, 2}, MixedExponents{kInf, kInf}}) {
    const SampledField g = reconstruct(f, phi, D.psi);
    std::printf("(p,q) = (%g,%g): relative error %.3e\n", e.p, e.q, relative_error(f, g, e));
  }
}
