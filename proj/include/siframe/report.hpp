#pragma once

#include <chrono>
#include <ctime>
#include <iomanip>

#include "siframe/io.hpp"

namespace siframe {

inline constexpr int kReportSchema = 1;

/// Flat run configuration. Keys match the JSON document and the CLI flags.
struct Config {
  std::string corpus = "box";
  int d = 1;
  Index inv_h = 64;
  MixedExponents e{2.0, 2.0};
  std::vector<MixedExponents> sweep = {{1.0, 1.0}, {2.0, 2.0}, {1.0, 2.0}, {kInf, kInf}};
  Index n1 = 64;
  Index n2 = 64;
  Index J = 32;
  double rank_tol = 1e-8;
  double energy_tol = 1e-22;
  double tail_cap = 1e-6;
  int trials = 8;
  int recon_trials = 3;
  Index taps = 50;
  std::uint64_t seed = 1;
  bool oracle = false;
  Index oracle_N = 8;
  Index oracle_M = 4;
  Index oracle_rho = 4;
  int n_max = 10;
  double eps1 = 0.5;
  double eps2 = 0.5;
  Index refine_from = 64;
  Index refine_to = 512;

  void validate() const {
    e.validate();
    for (const auto& s : sweep) s.validate();
    if (d < 1 || inv_h < 1) throw BadParams("d and inv_h must be >= 1");
    if (!(rank_tol > 0.0) || !(energy_tol > 0.0) || !(tail_cap > 0.0)) throw BadParams("tolerances must be positive");
    if (trials < 1 || recon_trials < 1 || taps < 1) throw BadParams("trials, recon_trials and taps must be >= 1");
    if (oracle_N < 2 || oracle_M < 2 || oracle_rho < 1) throw BadParams("oracle group is too small");
    if (refine_from < 2 || refine_to <= refine_from) throw BadParams("refinement needs 2 <= refine_from < refine_to");
    frequency_grid().validate();
  }

  FrequencyGrid frequency_grid() const {
    FrequencyGrid f;
    f.d = d;
    f.n1 = n1;
    f.n2 = n2;
    f.J = J;
    return f;
  }

  CorpusParams corpus_params() const {
    CorpusParams p;
    p.d = d;
    p.inv_h = inv_h;
    return p;
  }
};

namespace detail {

inline json exponent_pair(const MixedExponents& e) { return json::array({io::exponent(e.p), io::exponent(e.q)}); }

inline MixedExponents exponent_pair_from(const json& j) {
  if (j.is_string()) {  // "p,q"
    const auto s = j.get<std::string>();
    const auto comma = s.find(',');
    if (comma == std::string::npos) throw BadParams("exponent pair '" + s + "' needs the form p,q");
    return {io::exponent_from(json(trim(s.substr(0, comma)))), io::exponent_from(json(trim(s.substr(comma + 1))))};
  }
  if (!j.is_array() || j.size() != 2) throw BadParams("exponent pair must be [p, q] or \"p,q\"");
  return {io::exponent_from(j[0]), io::exponent_from(j[1])};
}

}  // namespace detail

/// "N1xN2" into its two counts.
inline std::pair<Index, Index> parse_fibers(const std::string& s) {
  const auto x = s.find_first_of("xX");
  if (x == std::string::npos) throw BadParams("fibers '" + s + "' needs the form N1xN2");
  return {detail::parse_integer(s.substr(0, x)), detail::parse_integer(s.substr(x + 1))};
}

inline json config_to_json(const Config& c) {
  json sweep = json::array();
  for (const auto& e : c.sweep) sweep.push_back(detail::exponent_pair(e));
  return {{"corpus", c.corpus},
          {"d", c.d},
          {"inv_h", c.inv_h},
          {"p", io::exponent(c.e.p)},
          {"q", io::exponent(c.e.q)},
          {"sweep", sweep},
          {"fibers", std::to_string(c.n1) + "x" + std::to_string(c.n2)},
          {"J", c.J},
          {"rank_tol", c.rank_tol},
          {"energy_tol", c.energy_tol},
          {"tail_cap", c.tail_cap},
          {"trials", c.trials},
          {"recon_trials", c.recon_trials},
          {"taps", c.taps},
          {"seed", c.seed},
          {"oracle", c.oracle},
          {"oracle_N", c.oracle_N},
          {"oracle_M", c.oracle_M},
          {"oracle_rho", c.oracle_rho},
          {"n_max", c.n_max},
          {"eps1", c.eps1},
          {"eps2", c.eps2},
          {"refine_from", c.refine_from},
          {"refine_to", c.refine_to}};
}

/// Layers a flat document over `base`. Unknown keys are errors.
inline Config config_from_json(const json& j, Config c = {}) {
  if (!j.is_object()) throw BadParams("config must be a flat object");
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& k = it.key();
      const json& v = it.value();
      if (k == "corpus") c.corpus = v.get<std::string>();
      else if (k == "d") c.d = v.get<int>();
      else if (k == "inv_h") c.inv_h = v.get<Index>();
      else if (k == "p") c.e.p = io::exponent_from(v);
      else if (k == "q") c.e.q = io::exponent_from(v);
      else if (k == "sweep") {
        c.sweep.clear();
        for (const auto& e : v) c.sweep.push_back(detail::exponent_pair_from(e));
      } else if (k == "fibers") {
        std::tie(c.n1, c.n2) = parse_fibers(v.get<std::string>());
      } else if (k == "J") c.J = v.get<Index>();
      else if (k == "rank_tol") c.rank_tol = v.get<double>();
      else if (k == "energy_tol") c.energy_tol = v.get<double>();
      else if (k == "tail_cap") c.tail_cap = v.get<double>();
      else if (k == "trials") c.trials = v.get<int>();
      else if (k == "recon_trials") c.recon_trials = v.get<int>();
      else if (k == "taps") c.taps = v.get<Index>();
      else if (k == "seed") c.seed = v.get<std::uint64_t>();
      else if (k == "oracle") c.oracle = v.get<bool>();
      else if (k == "oracle_N") c.oracle_N = v.get<Index>();
      else if (k == "oracle_M") c.oracle_M = v.get<Index>();
      else if (k == "oracle_rho") c.oracle_rho = v.get<Index>();
      else if (k == "n_max") c.n_max = v.get<int>();
      else if (k == "eps1") c.eps1 = v.get<double>();
      else if (k == "eps2") c.eps2 = v.get<double>();
      else if (k == "refine_from") c.refine_from = v.get<Index>();
      else if (k == "refine_to") c.refine_to = v.get<Index>();
      else if (k == "schema") {
        if (v.get<int>() != kReportSchema) throw BadParams("unsupported config schema");
      } else
        throw BadParams("unknown config key '" + k + "'");
    }
  } catch (const json::exception& e) {
    throw BadParams(std::string("config: ") + e.what());
  }
  return c;
}

/// 64-bit FNV-1a, printed as 16 hex digits.
inline std::string fnv1a_digest(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

inline std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

/// An error raised inside a pipeline stage, tagged with that stage.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const Error& e)
      : std::runtime_error(stage + ": " + e.what()), stage_(std::move(stage)), kind_(e.kind()) {}
  const std::string& stage() const noexcept { return stage_; }
  ErrorKind kind() const noexcept { return kind_; }

 private:
  std::string stage_;
  ErrorKind kind_;
};

template <class Fn>
auto run_stage(const std::string& stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw StageError(stage, e);
  }
}

// ---------------------------------------------------------------------------
// Reports

struct ReconstructionRow {
  MixedExponents e;
  double error_dual_analysis = 0.0;  // worst over trials
  double error_dual_synthesis = 0.0;
  double order_gap = 0.0;  // worst relative gap between the two orders
};

struct FrameReport {
  std::string digest;
  Config config;
  std::string corpus_label;
  std::size_t r = 0;

  // bracket, spectral_profile, condition_iii_check
  Index k0 = 0;
  Index k_max = 0;
  bool constancy = false;
  double C = 0.0;
  double bracket_tail_bound = 0.0;

  // refinement sweep; runs only when constancy fails
  std::optional<double> C_refine_from;
  std::optional<double> C_refine_to;

  // dual_generators
  std::optional<std::string> dual_construction;
  std::optional<double> dual_residual;
  std::optional<double> tail_mass;

  std::vector<ReconstructionRow> reconstruction;

  // frame_bounds_empirical
  double A_lo = 0.0;
  double B_hi = 0.0;
  double analytic_upper = 0.0;
  std::optional<double> analytic_lower;

  std::optional<VerdictFlags> oracle;

  std::vector<std::string> warnings;

  bool frame() const { return constancy && dual_residual.has_value(); }
};

inline json report_envelope(const std::string& command, const std::string& digest, bool stable) {
  json j = {{"schema", kReportSchema}, {"command", command}, {"digest", digest}};
  if (!stable) j["timestamp"] = utc_timestamp();
  return j;
}

inline json to_json(const FrameReport& R, bool stable) {
  json j = report_envelope("analyze", R.digest, stable);
  j["config"] = config_to_json(R.config);
  j["exponents"] = detail::exponent_pair(R.config.e);
  j["grid"] = {{"d", R.config.d}, {"inv_h", R.config.inv_h}};
  j["freq"] = io::frequency_grid(R.config.frequency_grid());
  j["generators"] = {{"corpus", R.corpus_label}, {"r", R.r}};
  j["profile"] = {{"k0", R.k0},
                  {"k_max", R.k_max},
                  {"constancy", R.constancy},
                  {"C", io::number(R.C)},
                  {"bracket_tail_bound", R.bracket_tail_bound}};
  if (R.C_refine_from)
    j["refinement"] = {{"from", R.config.refine_from},
                       {"to", R.config.refine_to},
                       {"C_from", io::number(*R.C_refine_from)},
                       {"C_to", io::number(*R.C_refine_to)}};
  if (R.dual_residual)
    j["dual"] = {{"construction", *R.dual_construction},
                 {"residual", io::number(*R.dual_residual)},
                 {"tail_mass", io::number(*R.tail_mass)}};
  else
    j["dual"] = "skipped";
  json table = json::array();
  for (const auto& row : R.reconstruction)
    table.push_back({{"p", io::exponent(row.e.p)},
                     {"q", io::exponent(row.e.q)},
                     {"error_dual_analysis", io::number(row.error_dual_analysis)},
                     {"error_dual_synthesis", io::number(row.error_dual_synthesis)},
                     {"order_gap", io::number(row.order_gap)}});
  j["reconstruction"] = table;
  j["frame_bounds"] = {{"A_lo", io::number(R.A_lo)},
                       {"B_hi", io::number(R.B_hi)},
                       {"analytic_upper", io::number(R.analytic_upper)}};
  if (R.analytic_lower) j["frame_bounds"]["analytic_lower"] = io::number(*R.analytic_lower);
  if (R.oracle) j["oracle"] = io::verdict(*R.oracle);
  j["warnings"] = R.warnings;
  j["frame"] = R.frame();
  return j;
}

inline GeneratorSystem build_generators(const Config& c) {
  return run_stage("corpus", [&] { return corpus_build_spec(c.corpus, c.corpus_params()); });
}

/// Worst errors of reconstructing seeded random members of the span.
inline ReconstructionRow reconstruction_row(const GeneratorSystem& phi, const GeneratorSystem& psi,
                                            const MixedExponents& e, int trials, Index taps, std::uint64_t seed) {
  ReconstructionRow row;
  row.e = e;
  std::mt19937_64 rng(seed);
  for (int t = 0; t < trials; ++t) {
    std::vector<CoefficientArray> D;
    for (std::size_t i = 0; i < phi.r(); ++i) D.push_back(random_taps(phi.d(), taps, rng()));
    const SampledField f = synthesize(phi, D);
    const SampledField ga = reconstruct(f, phi, psi, std::nullopt, ReconstructOrder::dual_analysis);
    const SampledField gs = reconstruct(f, phi, psi, std::nullopt, ReconstructOrder::dual_synthesis);
    row.error_dual_analysis = std::max(row.error_dual_analysis, relative_error(f, ga, e));
    row.error_dual_synthesis = std::max(row.error_dual_synthesis, relative_error(f, gs, e));
    row.order_gap = std::max(row.order_gap, relative_error(ga, gs, e));
  }
  return row;
}

inline VerdictFlags oracle_flags(const Config& c) {
  return run_stage("oracle", [&] {
    CorpusParams p = c.corpus_params();
    p.inv_h = c.oracle_rho;
    const GeneratorSystem coarse = corpus_build_spec(c.corpus, p);
    return verdict_equivalence(sample_system(coarse, c.oracle_N, c.oracle_M), c.rank_tol, c.seed);
  });
}

inline FrameReport run_analyze(const Config& c) {
  c.validate();
  FrameReport R;
  R.config = c;
  R.digest = fnv1a_digest(config_to_json(c).dump());
  const GeneratorSystem phi = build_generators(c);
  R.corpus_label = c.corpus;
  R.r = phi.r();
  const FrequencyGrid freq = c.frequency_grid();

  const GramianField G = run_stage("bracket", [&] { return bracket(phi, phi, freq); });
  const SpectralProfile S = run_stage("spectral_profile", [&] { return spectral_profile(G, c.rank_tol); });
  const ConditionIII cond = condition_iii_check(S);
  R.k0 = S.k0;
  R.k_max = S.k_max;
  R.constancy = cond.holds;
  R.C = cond.C;
  R.bracket_tail_bound = G.tail_bound;

  std::optional<DualSystem> dual;
  if (cond.holds) {
    DualOptions opt;
    opt.rank_tol = c.rank_tol;
    opt.energy_tol = c.energy_tol;
    opt.tail_cap = c.tail_cap;
    dual = run_stage("dual_generators", [&] { return dual_generators(phi, freq, opt); });
    R.dual_construction = to_string(dual->construction);
    R.dual_residual = dual->residual;
    R.tail_mass = dual->tail_mass;
    for (const auto& e : c.sweep)
      R.reconstruction.push_back(run_stage("reconstruct", [&] {
        return reconstruction_row(phi, dual->psi, e, c.recon_trials, c.taps, c.seed);
      }));
  } else {
    R.warnings.push_back("fiber rank is not constant (k0 = " + std::to_string(S.k0) +
                         ", k_max = " + std::to_string(S.k_max) + "); dual skipped");
    auto refined = [&](Index n) {
      FrequencyGrid f = freq;
      f.n1 = n;
      return run_stage("refinement", [&] { return spectral_profile(bracket(phi, phi, f), c.rank_tol).C_est; });
    };
    R.C_refine_from = refined(c.refine_from);
    R.C_refine_to = refined(c.refine_to);
    const double growth = *R.C_refine_to / *R.C_refine_from;
    std::ostringstream os;
    os << "refinement sweep shows C_est growth " << (growth >= 10.0 ? ">= 10x" : "< 10x") << " from "
       << c.refine_from << " to " << c.refine_to << " fibers (factor " << std::setprecision(4) << growth << ")";
    R.warnings.push_back(os.str());
  }

  const FrameBounds fb = run_stage("frame_bounds", [&] {
    return frame_bounds_empirical(phi, dual ? &dual->psi : nullptr, c.e, c.trials, c.seed, {c.taps, false});
  });
  R.A_lo = fb.A_lo;
  R.B_hi = fb.B_hi;
  R.analytic_upper = fb.analytic_upper;
  if (dual) R.analytic_lower = fb.analytic_lower;

  if (c.oracle) {
    R.oracle = oracle_flags(c);
    if (!R.oracle->agree()) R.warnings.push_back("oracle verdict flags disagree");
    if (R.oracle->frame_22 != R.frame()) R.warnings.push_back("oracle frame verdict differs from the continuum verdict");
  }
  if (R.tail_mass && *R.tail_mass > 0.1 * c.tail_cap) R.warnings.push_back("dual tail_mass is within 10x of tail_cap");
  return R;
}

/// Result of a subcommand: the report plus the frame verdict behind the exit code.
struct Outcome {
  json report;
  bool verdict = false;
};

inline Outcome run_dual(const Config& c, bool stable) {
  c.validate();
  const GeneratorSystem phi = build_generators(c);
  const FrequencyGrid freq = c.frequency_grid();
  const SpectralProfile S =
      run_stage("spectral_profile", [&] { return spectral_profile(bracket(phi, phi, freq), c.rank_tol); });
  Outcome out;
  out.report = report_envelope("dual", fnv1a_digest(config_to_json(c).dump()), stable);
  out.report["config"] = config_to_json(c);
  out.report["profile"] = io::profile(S);
  if (!condition_iii_check(S).holds) {
    out.report["dual"] = "skipped";
    out.report["warnings"] = {"fiber rank is not constant; no dual system exists"};
    return out;
  }
  DualOptions opt;
  opt.rank_tol = c.rank_tol;
  opt.energy_tol = c.energy_tol;
  opt.tail_cap = c.tail_cap;
  opt.materialize = false;
  const DualSystem D = run_stage("dual_generators", [&] { return dual_generators(phi, freq, opt); });
  out.report["dual"] = io::dual(D);
  out.report["warnings"] = json::array();
  out.verdict = true;
  return out;
}

inline Outcome run_reconstruct(const Config& c, bool stable) {
  c.validate();
  const GeneratorSystem phi = build_generators(c);
  DualOptions opt;
  opt.rank_tol = c.rank_tol;
  opt.energy_tol = c.energy_tol;
  opt.tail_cap = c.tail_cap;
  Outcome out;
  out.report = report_envelope("reconstruct", fnv1a_digest(config_to_json(c).dump()), stable);
  out.report["config"] = config_to_json(c);
  const DualSystem D = run_stage("dual_generators", [&] { return dual_generators(phi, c.frequency_grid(), opt); });
  json table = json::array();
  double worst = 0.0;
  for (const auto& e : c.sweep) {
    const ReconstructionRow row =
        run_stage("reconstruct", [&] { return reconstruction_row(phi, D.psi, e, c.recon_trials, c.taps, c.seed); });
    worst = std::max({worst, row.error_dual_analysis, row.error_dual_synthesis});
    table.push_back({{"p", io::exponent(e.p)},
                     {"q", io::exponent(e.q)},
                     {"error_dual_analysis", io::number(row.error_dual_analysis)},
                     {"error_dual_synthesis", io::number(row.error_dual_synthesis)},
                     {"order_gap", io::number(row.order_gap)}});
  }
  out.report["reconstruction"] = table;
  out.report["worst_error"] = io::number(worst);
  out.verdict = true;
  return out;
}

inline Outcome run_scaling(const Config& c, bool stable) {
  c.validate();
  const GeneratorSystem phi = build_generators(c);
  ScalingOptions opt;
  opt.eps1 = c.eps1;
  opt.eps2 = c.eps2;
  opt.e = c.e;
  const ScalingDiagnostic diag =
      run_stage("scaling_limit_diagnostic", [&] { return scaling_limit_diagnostic(phi[0], c.n_max, opt); });
  Outcome out;
  out.report = report_envelope("diagnose-scaling", fnv1a_digest(config_to_json(c).dump()), stable);
  out.report["config"] = config_to_json(c);
  out.report["n"] = diag.n;
  out.report["values"] = diag.values;
  out.report["s11_constant"] = io::number(diag.s11_constant);
  out.report["coarsened"] = diag.coarsened;
  out.verdict = diag.eventually_decreasing(4);
  out.report["decreasing_from_4"] = out.verdict;
  return out;
}

inline Outcome run_oracle(const Scenario& sc, const std::string& digest, bool stable) {
  Outcome out;
  out.report = report_envelope("oracle", digest, stable);
  out.report["scenario"] = sc.name;
  out.report["rank_tol"] = sc.rank_tol;
  json models = json::array();
  bool agreement = true, all_frame = true, expectations = true;
  Index agree_count = 0;
  for (std::size_t i = 0; i < sc.models.size(); ++i) {
    const auto& sm = sc.models[i];
    const VerdictFlags v = run_stage("verdict_equivalence", [&] {
      return verdict_equivalence(sm.model, sc.rank_tol, sc.seed + i, sc.probes);
    });
    json mj = {{"label", sm.model.label},
               {"N", sm.model.N},
               {"M", sm.model.M},
               {"d", sm.model.d},
               {"rho", sm.model.rho},
               {"r", sm.model.r()},
               {"flags", io::verdict(v)}};
    if (sm.expect_frame) {
      mj["expect_frame"] = *sm.expect_frame;
      expectations = expectations && v.frame_22 == *sm.expect_frame;
    }
    models.push_back(mj);
    agreement = agreement && v.agree();
    agree_count += v.agree() ? 1 : 0;
    all_frame = all_frame && v.frame_22;
  }
  out.report["models"] = models;
  out.report["agreement"] = agreement;
  out.report["agree_count"] = agree_count;
  out.report["total"] = sc.models.size();
  out.report["expectations_met"] = expectations;
  out.verdict = agreement && all_frame;
  return out;
}

inline Outcome run_oracle(const std::string& path, bool stable) {
  const json doc = [&] {
    try {
      return io::read_file(path);
    } catch (const BadParams& e) {
      throw BadScenario(e.what());
    }
  }();
  return run_oracle(parse_scenario(doc), fnv1a_digest(doc.dump()), stable);
}

}  // namespace siframe
