#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace siframe;

namespace {

GeneratorSystem build(const std::string& spec, Index inv_h, int d = 1) {
  CorpusParams p;
  p.d = d;
  p.inv_h = inv_h;
  return corpus_build_spec(spec, p);
}

FrequencyGrid grid(Index n1, Index n2, Index J, int d = 1) {
  FrequencyGrid f;
  f.d = d;
  f.n1 = n1;
  f.n2 = n2;
  f.J = J;
  return f;
}

double hat_bracket(double xi) { return (2.0 + std::cos(xi)) / 3.0; }

}  // namespace

TEST(FourierFibers, BoxValues) {
  auto box = build("box", 16);
  EXPECT_NEAR(std::abs(fourier_transform(box[0], {0.0, 0.0}) - 1.0), 0.0, 1e-14);
  EXPECT_LT(std::abs(fourier_transform(box[0], {2 * kPi, 0.0})), 1e-10);
  // Closed form for the cellwise-constant box: exact continuum transform.
  const double w = 1.3;
  const cplx expect = (1.0 - std::exp(cplx(0, -w))) / cplx(0, w);
  EXPECT_LT(std::abs(fourier_transform(box[0], {w, 0.0}) - expect), 1e-14);
}

TEST(FourierFibers, MatchesDirectQuadrature) {
  oracle::Gen gen(31);
  for (int trial = 0; trial < 5; ++trial) {
    auto f = gen.field(1, gen.integer(1, 4), 2);
    auto freq = grid(4, 6, 2);
    auto ff = fourier_fibers(f, freq);
    double err = 0.0, scale = 1e-300;
    for (Index node = 0; node < freq.node_count(); ++node) {
      auto xi = freq.xi(node);
      Index kk = 0;
      for (Index m1 = -2; m1 <= 2; ++m1)
        for (Index m2 = -2; m2 <= 2; ++m2, ++kk) {
          const cplx ref = oracle::fourier(f, {xi[0] + 2 * kPi * m1, xi[1] + 2 * kPi * m2});
          err = std::max(err, std::abs(ff.at(node, kk) - ref));
          scale = std::max(scale, std::abs(ref));
        }
    }
    EXPECT_LT(err, 1e-10 * std::max(1.0, scale));
  }
}

TEST(FourierFibers, ShiftTheorem) {
  auto hat = build("hat", 8);
  auto freq = grid(8, 4, 2);
  auto a = fourier_fibers(hat[0], freq), b = fourier_fibers(shift(hat[0], {1, 0}), freq);
  double err = 0.0;
  for (Index node = 0; node < freq.node_count(); ++node) {
    const double xi = freq.xi(node)[0];
    for (Index k = 0; k < a.per_node; ++k)
      err = std::max(err, std::abs(b.at(node, k) - std::exp(cplx(0, -xi)) * a.at(node, k)));
  }
  EXPECT_LT(err, 1e-10);
}

TEST(Bracket, BoxIsIdentically1) {
  auto box = build("box", 64);
  auto G = bracket(box, box, grid(64, 64, 32));
  double dev = 0.0;
  for (Index k = 0; k < G.node_count(); ++k) dev = std::max(dev, std::abs(G.fiber(k)(0, 0) - 1.0));
  EXPECT_LE(dev, 1e-8);
  EXPECT_EQ(G.tail_bound, 0.0);
}

TEST(Bracket, HatMatchesClosedForm) {
  // Midpoint Gram error is (h^2/6)(1 - cos xi), so h = 1/1024 keeps it below 1e-6.
  auto hat = build("hat", 1024);
  auto freq = grid(64, 16, 64);
  auto G = bracket(hat, hat, freq);
  double dev = 0.0;
  for (Index k1 = 0; k1 < freq.n1; ++k1) {
    const Index node = freq.node_flat({k1, freq.n2 / 2});
    const double xi = FrequencyGrid::node(k1, freq.n1);
    dev = std::max(dev, std::abs(G.fiber(node)(0, 0) - hat_bracket(xi)));
  }
  EXPECT_LE(dev, 1e-6);
  // Off the xi~ = 0 line the box factor is still 1.
  for (Index node = 0; node < freq.node_count(); ++node)
    EXPECT_NEAR(std::abs(G.fiber(node)(0, 0) - hat_bracket(freq.xi(node)[0])), 0.0, 1e-6);
}

TEST(Bracket, ShiftedPairClosedForm) {
  auto pair = build("shifted_pair(hat, 1)", 16);
  auto single = build("hat", 16);
  auto freq = grid(32, 8, 8);
  auto G = bracket(pair, pair, freq);
  auto Gs = bracket(single, single, freq);
  double err = 0.0;
  for (Index node = 0; node < freq.node_count(); ++node) {
    const double xi = freq.xi(node)[0];
    const cplx a = Gs.fiber(node)(0, 0);
    auto F = G.fiber(node);
    err = std::max(err, std::abs(F(0, 0) - a) + std::abs(F(1, 1) - a) + std::abs(F(0, 1) - a * std::exp(cplx(0, xi))) +
                            std::abs(F(1, 0) - a * std::exp(cplx(0, -xi))));
  }
  EXPECT_LT(err, 1e-9);

  auto S = spectral_profile(G);
  EXPECT_EQ(S.k0, 1);
  EXPECT_TRUE(S.constancy);
  double expect_C = 1.0;
  for (Index node = 0; node < freq.node_count(); ++node) {
    const double a = Gs.fiber(node)(0, 0).real();
    EXPECT_NEAR(S.eigenvalue(node, 0), 2 * a, 1e-12);
    EXPECT_NEAR(S.eigenvalue(node, 1), 0.0, 1e-12);
    expect_C = std::max(expect_C, std::max(2 * a, 1 / (2 * a)));
  }
  EXPECT_NEAR(S.C_est, expect_C, 1e-9);
}

TEST(Bracket, DimensionChecks) {
  auto a = build("box", 4), b = build("box", 8), c = build("box", 4, 2);
  EXPECT_THROW(bracket(a, b, grid(8, 8, 4)), DimensionMismatch);
  EXPECT_THROW(bracket(a, c, grid(8, 8, 4)), DimensionMismatch);
  EXPECT_THROW(bracket(a, a, grid(8, 8, 4, 2)), DimensionMismatch);
  EXPECT_THROW(bracket(a, a, grid(1, 8, 4)), BadParams);
}

TEST(SpectralProfile, Box) {
  auto box = build("box", 8);
  auto S = spectral_profile(bracket(box, box, grid(32, 32, 4)));
  EXPECT_EQ(S.k0, 1);
  EXPECT_TRUE(S.constancy);
  EXPECT_NEAR(S.C_est, 1.0, 1e-6);
  auto c = condition_iii_check(S);
  EXPECT_TRUE(c.holds);
  EXPECT_NEAR(c.C, 1.0, 1e-6);
}

TEST(SpectralProfile, HatConditionIII) {
  auto hat = build("hat", 64);
  auto c = condition_iii_check(spectral_profile(bracket(hat, hat, grid(64, 8, 8))));
  EXPECT_TRUE(c.holds);
  EXPECT_NEAR(c.C, 3.0, 1e-3);
}

TEST(SpectralProfile, DiffFilteredBoxLosesRankOnlyAtZero) {
  auto g = build("diff_filtered_box", 2);
  auto freq = grid(32, 8, 8);
  auto G = bracket(g, g, freq);
  for (Index node = 0; node < freq.node_count(); ++node) {
    const double xi = freq.xi(node)[0];
    EXPECT_NEAR(G.fiber(node)(0, 0).real(), std::pow(2 - 2 * std::cos(xi), 2), 1e-12);
  }
  auto S = spectral_profile(G);
  EXPECT_FALSE(S.constancy);
  for (Index node = 0; node < freq.node_count(); ++node)
    EXPECT_EQ(S.k_per_fiber[static_cast<std::size_t>(node)], freq.node_multi(node)[0] == freq.n1 / 2 ? 0 : 1);
  EXPECT_FALSE(condition_iii_check(S).holds);

  // C_est blows up under refinement.
  auto S64 = spectral_profile(bracket(g, g, grid(64, 64, 8)));
  auto S512 = spectral_profile(bracket(g, g, grid(512, 512, 8)));
  EXPECT_GE(S512.C_est, 10 * S64.C_est);
}

TEST(SpectralProfile, RejectsNonHermitian) {
  auto box = build("box", 4);
  auto shifted = build("shifted_pair(box, 1)", 4);
  GeneratorSystem other({shifted[1]});
  EXPECT_THROW(spectral_profile(bracket(box, other, grid(8, 8, 4))), NonHermitianFiber);
  EXPECT_THROW(spectral_profile(bracket(box, shifted, grid(8, 8, 4))), DimensionMismatch);
}

TEST(FiberProperty, HermitianPsdOnRandomSystems) {
  oracle::Gen gen(41);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = gen.integer(1, 3);
    std::vector<SampledField> gens;
    const std::size_t r = static_cast<std::size_t>(gen.integer(1, 3));
    while (gens.size() < r) {
      auto g = gen.field(1, n);
      if (!g.is_zero()) gens.push_back(g);
    }
    GeneratorSystem phi(gens);
    auto freq = grid(16, 8, 8);
    auto G = bracket(phi, phi, freq);
    auto S = spectral_profile(G);
    for (Index node = 0; node < freq.node_count(); ++node) {
      auto F = G.fiber(node);
      EXPECT_LE((F - F.adjoint()).norm(), 1e-10 * std::max(1e-300, F.norm()));
    }
    EXPECT_GE(S.min_eigenvalue, -1e-10 * S.lambda_max);
    for (auto k : S.k_per_fiber) EXPECT_GE(k, S.k0);
  }
}

TEST(FiberProperty, ContinuityUnderRefinement) {
  auto hat = build("hat", 16);
  double prev = -1.0;
  for (Index n = 16; n <= 128; n *= 2) {
    auto freq = grid(n, 4, 8);
    auto G = bracket(hat, hat, freq);
    double jump = 0.0;
    for (Index k = 0; k < n; ++k) {
      const Index a = freq.node_flat({k, 0}), b = freq.node_flat({(k + 1) % n, 0});  // wraps: 2 pi periodic
      jump = std::max(jump, std::abs(G.fiber(a)(0, 0) - G.fiber(b)(0, 0)));
    }
    if (prev > 0) {
      EXPECT_LE(jump / prev, 0.75);
    }
    prev = jump;
  }
}

TEST(FiberProperty, ConjugateSymmetryForRealGenerators) {
  for (const char* spec : {"hat", "bspline(3)", "diff_filtered_box", "gaussian(0.6, 3)"}) {
    auto g = build(spec, 4);
    auto freq = grid(16, 8, 8);
    auto G = bracket(g, g, freq);
    for (Index node = 0; node < freq.node_count(); ++node) {
      Multi k = freq.node_multi(node), mk = k;
      for (std::size_t a = 0; a < k.size(); ++a) mk[a] = floor_mod(-k[a], freq.extent(a));
      EXPECT_LT(std::abs(G.fiber(freq.node_flat(mk))(0, 0) - std::conj(G.fiber(node)(0, 0))), 1e-10) << spec;
    }
  }
}

TEST(FiberProperty, TruncationHonesty) {
  for (const char* spec : {"gaussian(0.7, 4)", "bspline(4)", "shifted_pair(gaussian(0.5, 3), 2)"}) {
    auto g = build(spec, 4);
    for (Index J = 1; J <= 4; ++J) {
      auto a = bracket(g, g, grid(16, 8, J)), b = bracket(g, g, grid(16, 8, 2 * J));
      double diff = 0.0;
      for (std::size_t t = 0; t < a.fibers.size(); ++t) diff = std::max(diff, std::abs(a.fibers[t] - b.fibers[t]));
      EXPECT_LE(diff, a.tail_bound * (1 + 1e-12) + 1e-15) << spec << " J=" << J;
    }
  }
}

TEST(FiberProperty, ExponentialDecayTailReported) {
  double prev = kInf;
  for (int cutoff : {2, 3, 4}) {
    auto g = build("gaussian(0.5, " + std::to_string(cutoff) + ")", 4);
    auto G = bracket(g, g, grid(8, 8, 16));
    EXPECT_GT(G.tail_bound, 0.0);
    EXPECT_LT(G.tail_bound, prev);
    prev = G.tail_bound;
  }
  EXPECT_LT(prev, 1e-5);
}

TEST(FiberProperty, PreGramianRankConstancyMatchesGramian) {
  for (const char* spec : {"box", "hat", "shifted_pair(hat, 1)", "diff_filtered_box", "shifted_pair(box, 0, 1)"}) {
    auto g = build(spec, 4);
    auto freq = grid(16, 8, 4);
    auto S = spectral_profile(bracket(g, g, freq));
    auto P = pre_gramian_profile(g, freq);
    EXPECT_EQ(P.constancy, S.constancy) << spec;
    EXPECT_EQ(P.k0, S.k0) << spec;
  }
}

TEST(FiberProperty, EvaluateMatchesNodes) {
  auto g = build("shifted_pair(bspline(3), 1, 1)", 4);
  auto freq = grid(8, 8, 8);
  auto G = bracket(g, g, freq);
  for (Index node = 0; node < freq.node_count(); node += 7)
    EXPECT_LT((G.evaluate(freq.xi(node)) - Eigen::MatrixXcd(G.fiber(node))).norm(), 1e-12);
}
