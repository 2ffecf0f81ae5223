#include <gtest/gtest.h>

#include "oracles.hpp"
#include "siframe/discrete_oracle.hpp"

using namespace siframe;

namespace {

/// Singular values of a dense matrix, descending.
std::vector<double> singular_values(const Eigen::MatrixXcd& A) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A);
  const auto& s = svd.singularValues();
  return {s.data(), s.data() + s.size()};
}

}  // namespace

TEST(SynthesisMatrix, DeltaIsIdentity) {
  auto T = build_synthesis_matrix(delta_model(8, 1, 0, 1));
  EXPECT_EQ(T.rows(), 8);
  EXPECT_EQ(T.cols(), 8);
  EXPECT_LE((T - Eigen::MatrixXcd::Identity(8, 8)).norm(), 0.0);
}

TEST(SynthesisMatrix, ShapeAndEqualColumnNorms) {
  auto m = random_model(4, 2, 1, 2, 3, 7);
  auto T = build_synthesis_matrix(m);
  EXPECT_EQ(T.rows(), 8 * 4);
  EXPECT_EQ(T.cols(), 3 * 4 * 2);
  for (Index i = 0; i < 3; ++i)
    for (Index j = 1; j < 8; ++j) EXPECT_NEAR(T.col(i * 8 + j).norm(), T.col(i * 8).norm(), 1e-12);
}

TEST(SynthesisMatrix, RankIsSumOfFiberRanks) {
  for (auto& m : adversarial_models(4, 4, 1, 2, 3)) {
    auto T = build_synthesis_matrix(m);
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(T);
    lu.setThreshold(1e-9);
    auto prof = exact_fiber_profile(m);
    Index total = 0;
    for (Index k : prof.ranks) total += k;
    EXPECT_EQ(lu.rank(), total) << m.label;
  }
}

TEST(FiberProfile, Examples) {
  auto delta = exact_fiber_profile(delta_model(8, 4, 1, 2));
  for (const auto& s : delta.singular_values) EXPECT_NEAR(s[0], 1.0, 1e-12);
  EXPECT_TRUE(delta.constancy);

  auto models = adversarial_models(8, 4, 1, 2, 11);
  auto diff = exact_fiber_profile(models[0]);
  ASSERT_EQ(models[0].label, "diff-filter");
  Index zeros = 0;
  for (std::size_t k = 0; k < diff.ranks.size(); ++k)
    if (diff.ranks[k] == 0) {
      ++zeros;
      EXPECT_EQ(k, 0u);
    }
  EXPECT_EQ(zeros, 1);

  auto pair = exact_fiber_profile(models[1]);
  ASSERT_EQ(models[1].label, "shifted-pair");
  for (Index k : pair.ranks) EXPECT_EQ(k, 1);
}

TEST(FiberProfile, SquaredSingularValuesAreBracketEigenvalues) {
  auto m = random_model(4, 4, 1, 2, 3, 21);
  auto prof = exact_fiber_profile(m);
  auto fb = discrete_fibers(m);
  const auto T = build_synthesis_matrix(m);
  for (std::size_t k = 0; k < fb.fibers.size(); ++k) {
    // Bracket from lag inner products: sum_j <g_i, g_i'(. - rho j)> e^{-2 pi i kappa.j / N}.
    Multi kappa = m.shift_multi(static_cast<Index>(k));
    Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(3, 3);
    for (Index j = 0; j < m.shift_count(); ++j) {
      Multi jj = m.shift_multi(j);
      double phase = 0.0;
      for (std::size_t a = 0; a < jj.size(); ++a)
        phase += 2 * kPi * static_cast<double>(kappa[a] * jj[a]) / static_cast<double>(m.period(a));
      for (Index i = 0; i < 3; ++i)
        for (Index ip = 0; ip < 3; ++ip)
          G(ip, i) += T.col(i * m.shift_count() + j).dot(T.col(ip * m.shift_count())) * std::polar(1.0, -phase);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G);
    for (Index i = 0; i < 3; ++i)
      EXPECT_NEAR(prof.singular_values[k][static_cast<std::size_t>(i)] * prof.singular_values[k][static_cast<std::size_t>(i)],
                  es.eigenvalues()(2 - i), 1e-10);
  }
}

TEST(DiscreteProperty, ParsevalConsistency) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    auto m = random_model(4, 2, seed % 2 ? 1 : 0, 2, 1 + seed % 3, seed);
    const double tf = build_synthesis_matrix(m).squaredNorm();
    double fib = 0.0;
    for (const auto& F : discrete_fibers(m).fibers) fib += F.squaredNorm();
    EXPECT_NEAR(fib, tf, 1e-10 * tf);
  }
}

TEST(DiscreteProperty, BlockDiagonalization) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto m = random_model(4, 2, 1, 2, 1 + seed % 3, seed);
    auto direct = singular_values(build_synthesis_matrix(m));
    std::vector<double> fibers;
    for (const auto& s : exact_fiber_profile(m).singular_values) fibers.insert(fibers.end(), s.begin(), s.end());
    std::sort(fibers.rbegin(), fibers.rend());
    fibers.resize(direct.size(), 0.0);
    for (std::size_t t = 0; t < direct.size(); ++t) EXPECT_NEAR(direct[t], fibers[t], 1e-10 * direct[0]);
  }
}

TEST(Verdict, DeltaAllTrue) {
  auto v = verdict_equivalence(delta_model(8, 4, 1, 2));
  EXPECT_TRUE(v.all_true());
  EXPECT_NEAR(v.B, 1.0, 1e-12);
}

TEST(Verdict, AdversarialPattern) {
  for (int d : {0, 1}) {
    for (auto& m : adversarial_models(8, 4, d, 2, 5)) {
      auto v = verdict_equivalence(m);
      EXPECT_TRUE(v.agree()) << m.label << " d=" << d;
      const bool expect = m.label != "diff-filter" && m.label != "nyquist-null";
      EXPECT_EQ(v.frame_22, expect) << m.label << " d=" << d;
    }
  }
}

TEST(Verdict, RandomSystemsAgree) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto m = random_model(8, 4, 1, 2, 1 + seed % 3, seed);
    auto v = verdict_equivalence(m, 1e-8, seed);
    EXPECT_TRUE(v.agree()) << seed;
    EXPECT_TRUE(v.frame_22) << seed;
    EXPECT_LE(v.min_norm_worst, 1.0);
  }
}

TEST(Verdict, DualReproducesRange) {
  auto m = adversarial_models(8, 4, 1, 2, 9)[2];
  ASSERT_EQ(m.label, "near-deficient");
  auto prof = exact_fiber_profile(m);
  auto dual = discrete_dual(m, prof.k_max);
  ASSERT_TRUE(dual.has_value());
  auto T = build_synthesis_matrix(m), U = build_synthesis_matrix(*dual);
  // T U^H is the orthogonal projector onto the range of T.
  Eigen::MatrixXcd P = T * U.adjoint();
  EXPECT_LE((P * P - P).norm(), 1e-8 * P.norm());
  EXPECT_LE((P * T - T).norm(), 1e-8 * T.norm());
  EXPECT_LE((P - P.adjoint()).norm(), 1e-8 * P.norm());
}

TEST(CrossCheck, SampledHatMatchesFiberization) {
  CorpusParams p;
  p.inv_h = 8;
  auto hat = corpus_build_spec("hat", p);
  auto cc = cross_check(hat, 8, 8);
  EXPECT_EQ(cc.fibers, 64);
  EXPECT_LE(cc.max_abs_diff, 1e-12);
  auto pair = corpus_build_spec("shifted_pair(hat, 1)", p);
  EXPECT_LE(cross_check(pair, 8, 4).max_abs_diff, 1e-12);
}

TEST(CrossCheck, Errors) {
  CorpusParams p;
  p.inv_h = 4;
  auto hat = corpus_build_spec("hat", p);
  EXPECT_THROW(cross_check(hat, 7, 4), BadParams);
  EXPECT_THROW(sample_system(hat, 2, 4), BadParams);
  DiscreteModel bad = delta_model(4, 2, 1, 1);
  bad.generators[0].pop_back();
  EXPECT_THROW(bad.validate(), DimensionMismatch);
}
