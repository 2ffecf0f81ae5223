// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>

#include "oracles.hpp"
#include "siframe/siframe.hpp"

using namespace siframe;

namespace {

// Pinned tolerances and budgets.
constexpr double kBoxBracketTol = 1e-8;
constexpr double kBoxCTol = 1e-6;
constexpr double kBoxBoundTol = 1e-6;
constexpr double kBoxSeconds = 5.0;
constexpr double kHatBracketTol = 1e-6;
constexpr double kHatCTol = 1e-3;
constexpr double kRefineGrowth = 10.0;
constexpr double kReconTol = 1e-6;
constexpr double kOrderTol = 1e-8;
constexpr double kReconSeconds = 30.0;
constexpr double kSlackTol = -1e-9;
constexpr double kOracleSeconds = 60.0;
constexpr double kScalingRatio = 1e-2;
constexpr double kCrossTol = 5e-3;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Result {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& name, const std::function<Result()>& body) {
  const auto t0 = Clock::now();
  Result r;
  try {
    r = body();
  } catch (const std::exception& e) {
    r = {false, std::string("exception: ") + e.what()};
  }
  std::printf("AC%d %s  %-44s %s  [%.2fs]\n", id, r.pass ? "PASS" : "FAIL", name.c_str(), r.detail.c_str(),
              seconds_since(t0));
  std::fflush(stdout);
  if (!r.pass) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

GeneratorSystem build(const std::string& spec, Index inv_h) {
  CorpusParams p;
  p.inv_h = inv_h;
  return corpus_build_spec(spec, p);
}

FrequencyGrid grid(Index n1, Index n2, Index J) {
  FrequencyGrid f;
  f.n1 = n1;
  f.n2 = n2;
  f.J = J;
  return f;
}

Result box_generator() {
  const auto t0 = Clock::now();
  auto box = build("box", 64);
  auto freq = grid(16, 16, 32);
  auto G = bracket(box, box, freq);
  double dev = 0.0;
  for (Index k = 0; k < freq.node_count(); ++k) dev = std::max(dev, std::abs(G.fiber(k)(0, 0) - 1.0));
  const auto c = condition_iii_check(spectral_profile(G));
  const auto fb = frame_bounds_empirical(box, {2, 2}, 20, 1);
  const double t = seconds_since(t0);
  const bool pass = dev <= kBoxBracketTol && c.holds && std::abs(c.C - 1) <= kBoxCTol &&
                    std::abs(fb.A_lo - 1) <= kBoxBoundTol && std::abs(fb.B_hi - 1) <= kBoxBoundTol && t <= kBoxSeconds;
  std::ostringstream os;
  os << "fibers=" << freq.node_count() << " dev=" << fmt("%.1e", dev) << " C=" << fmt("%.9f", c.C)
     << " A_lo=" << fmt("%.9f", fb.A_lo) << " B_hi=" << fmt("%.9f", fb.B_hi) << " t=" << fmt("%.2fs", t);
  return {pass, os.str()};
}

Result hat_generator() {
  auto fine = build("hat", 1024);
  auto freq = grid(64, 16, 64);
  auto G = bracket(fine, fine, freq);
  double dev = 0.0;
  for (Index k1 = 0; k1 < freq.n1; ++k1) {
    const double xi = FrequencyGrid::node(k1, freq.n1);
    dev = std::max(dev, std::abs(G.fiber(freq.node_flat({k1, freq.n2 / 2}))(0, 0) - (2 + std::cos(xi)) / 3));
  }
  auto hat = build("hat", 64);
  const auto c = condition_iii_check(spectral_profile(bracket(hat, hat, grid(64, 8, 8))));
  const bool pass = dev <= kHatBracketTol && c.holds && std::abs(c.C - 3) <= kHatCTol;
  return {pass, "dev=" + fmt("%.2e", dev) + " C=" + fmt("%.6f", c.C)};
}

Result diff_filtered_box() {
  auto g = build("diff_filtered_box", 2);
  const auto S64 = spectral_profile(bracket(g, g, grid(64, 64, 8)));
  const auto S512 = spectral_profile(bracket(g, g, grid(512, 64, 8)));
  bool raised = false;
  try {
    dual_generators(g, grid(64, 64, 8));
  } catch (const ConditionIIIFails&) {
    raised = true;
  }
  const double growth = S512.C_est / S64.C_est;
  const bool pass = !S64.constancy && !S512.constancy && growth >= kRefineGrowth && raised;
  return {pass, "constancy=false growth=" + fmt("%.1f", growth) + "x raised=" + (raised ? "yes" : "no")};
}

Result reconstruction() {
  const auto t0 = Clock::now();
  auto hat = build("hat", 16);
  auto dual = dual_generators(hat, grid(64, 4, 8));
  const MixedExponents pairs[] = {{1, 1}, {2, 2}, {1, 2}, {kInf, kInf}};
  double worst = 0.0, gap = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const SampledField f = synthesize(hat, {random_taps(1, 50, seed)});
    const SampledField a = reconstruct(f, hat, dual.psi, std::nullopt, ReconstructOrder::dual_analysis);
    const SampledField b = reconstruct(f, hat, dual.psi, std::nullopt, ReconstructOrder::dual_synthesis);
    for (const auto& e : pairs) {
      worst = std::max({worst, relative_error(f, a, e), relative_error(f, b, e)});
      gap = std::max(gap, relative_error(a, b, e));
    }
  }
  const double t = seconds_since(t0);
  const bool pass = worst <= kReconTol && gap <= kOrderTol && t <= kReconSeconds;
  return {pass, "worst=" + fmt("%.2e", worst) + " order_gap=" + fmt("%.2e", gap) + " t=" + fmt("%.2fs", t)};
}

Result boundedness() {
  double young_lpq = kInf, young_amalgam = kInf, young_wiener = kInf, analysis = kInf, chain = kInf;
  oracle::Gen gen(2026);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = trial % 5 == 4 ? 2 : 1;
    const Index n = gen.integer(1, 3);
    auto f = gen.field(d, n);
    auto D = trial % 2 ? random_taps(d, 50, static_cast<std::uint64_t>(trial)) : gen.coeffs(d);
    auto e = gen.exponents();
    young_lpq = std::min(young_lpq, oracle::slack(lpq_norm(semi_convolve(f, D), e), lpq_seq_norm(D, e) * amalgam_norm(f, e)));
    auto D1 = gen.coeffs(d);
    auto fe = semi_convolve(f, D1);
    young_amalgam = std::min(young_amalgam, oracle::slack(amalgam_norm(fe, e), lpq_seq_norm(D1, {1, 1}) * amalgam_norm(f, e)));
    young_wiener = std::min(young_wiener, oracle::slack(wiener_norm(fe), lpq_seq_norm(D1, {1, 1}) * wiener_norm(f)));
    auto big = gen.field(d, n, 4);
    auto g = gen.field(d, n);
    if (g.is_zero()) g.values().data()[0] = 1.0;
    analysis = std::min(analysis, oracle::slack(lpq_seq_norm(analyze_one(big, g), e),
                                                lpq_norm(big, e) * amalgam_norm(g, {kInf, kInf})));
  }
  for (int trial = 0; trial < 100; ++trial) {
    const int d = trial % 4 == 3 ? 2 : 1;
    auto f = gen.field(d, gen.integer(1, 5));
    auto e = gen.exponents();
    const double l = lpq_norm(f, e), am = amalgam_norm(f, e), ainf = amalgam_norm(f, {kInf, kInf}), w = wiener_norm(f);
    chain = std::min({chain, oracle::slack(l, am), oracle::slack(am, ainf), oracle::slack(ainf, w)});
  }
  const bool pass = std::min({young_lpq, young_amalgam, young_wiener, analysis, chain}) >= kSlackTol;
  std::ostringstream os;
  os << "min slack: semiconv-Lpq=" << fmt("%.1e", young_lpq) << " semiconv-amalgam=" << fmt("%.1e", young_amalgam)
     << " semiconv-Wiener=" << fmt("%.1e", young_wiener) << " analysis=" << fmt("%.1e", analysis)
     << " embedding=" << fmt("%.1e", chain);
  return {pass, os.str()};
}

Result oracle_equivalence() {
  const auto t0 = Clock::now();
  std::vector<DiscreteModel> models;
  for (std::uint64_t s = 1; s <= 20; ++s) models.push_back(random_model(32, 16, 1, 2, 1 + s % 3, s));
  for (auto& m : adversarial_models(32, 16, 1, 2, 99)) models.push_back(m);
  int agree = 0, min_norm_ok = 0, expected = 0;
  for (std::size_t i = 0; i < models.size(); ++i) {
    const VerdictFlags v = verdict_equivalence(models[i], 1e-8, 1 + i);
    agree += v.agree();
    // The two-sided minimum-norm bound is checked wherever the system is a frame.
    min_norm_ok += !v.frame_22 || v.min_norm_consistent;
    const bool frame = models[i].label != "diff-filter" && models[i].label != "nyquist-null";
    expected += v.frame_22 == frame;
  }
  const double t = seconds_since(t0);
  const int n = static_cast<int>(models.size());
  const bool pass = agree == n && min_norm_ok == n && expected == n && t <= kOracleSeconds;
  std::ostringstream os;
  os << "agree=" << agree << "/" << n << " min-norm=" << min_norm_ok << "/" << n << " expected=" << expected << "/"
     << n << " t=" << fmt("%.1fs", t);
  return {pass, os.str()};
}

Result scaling() {
  auto g = build("diff_filtered_box", 1);
  const ScalingDiagnostic diag = scaling_limit_diagnostic(g[0], 10);
  bool rejected = false;
  try {
    scaling_limit_diagnostic(build("box", 1)[0], 10);
  } catch (const PreconditionSumNonzero&) {
    rejected = true;
  }
  const double v2 = diag.values.front(), v10 = diag.values.back();
  const bool pass = diag.n.front() == 2 && diag.n.back() == 10 && diag.eventually_decreasing(4) &&
                    v10 <= kScalingRatio * v2 && rejected;
  std::ostringstream os;
  os << "v2=" << fmt("%.3e", v2) << " v10=" << fmt("%.3e", v10) << " ratio=" << fmt("%.2e", v10 / v2)
     << " decreasing=" << (diag.eventually_decreasing(4) ? "yes" : "no") << " box_rejected=" << (rejected ? "yes" : "no");
  return {pass, os.str()};
}

Result cross() {
  // Hat along x1 and box along x2, sampled at h = 1/64 on Z_8 x Z_8 with rho = 64.
  const CrossCheck cc = cross_check(build("hat", 64), 8, 8);
  const bool pass = cc.max_abs_diff <= kCrossTol;
  return {pass, "fibers=" + std::to_string(cc.fibers) + " max|diff|=" + fmt("%.2e", cc.max_abs_diff)};
}

}  // namespace

int main() {
  criterion(1, "box generator: bracket, C, frame bounds", box_generator);
  criterion(2, "hat generator: bracket and C", hat_generator);
  criterion(3, "difference-filtered box fails", diff_filtered_box);
  criterion(4, "reconstruction identity, hat system", reconstruction);
  criterion(5, "boundedness suite and embedding chain", boundedness);
  criterion(6, "oracle verdict equivalence", oracle_equivalence);
  criterion(7, "scaling-limit diagnostic", scaling);
  criterion(8, "continuum/discrete cross-check", cross);
  std::printf("%d/8 criteria passed\n", 8 - failures);
  return failures;
}
