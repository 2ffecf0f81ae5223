// siframe command-line front end.
//
// Exit codes: 0 = ran and the frame verdict is true, 2 = ran and the verdict
// is false, 1 = error.

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "siframe/siframe.hpp"

#ifndef SIFRAME_SCENARIO_DIR
#define SIFRAME_SCENARIO_DIR "scenarios"
#endif

namespace {

using namespace siframe;

/// Flags shared by the pipeline subcommands; unset flags leave the config alone.
struct Overrides {
  std::string config_path;
  std::optional<std::string> corpus, p, q, fibers;
  std::optional<int> d, trials;
  std::optional<Index> inv_h, J, n_max;
  std::optional<double> rank_tol;
  std::optional<std::uint64_t> seed;
  bool oracle = false;

  void attach(CLI::App* app, bool scaling = false) {
    app->add_option("--config", config_path, "flat JSON config document")->check(CLI::ExistingFile);
    app->add_option("--corpus", corpus, "generator spec, e.g. hat or shifted_pair(box, 1)");
    app->add_option("--d", d, "number of x2 axes");
    app->add_option("--inv-h", inv_h, "samples per unit length");
    app->add_option("--p", p, "outer exponent (number or inf)");
    app->add_option("--q", q, "inner exponent (number or inf)");
    app->add_option("--fibers", fibers, "fiber counts N1xN2");
    app->add_option("--J", J, "lag radius of the bracket");
    app->add_option("--rank-tol", rank_tol, "relative eigenvalue threshold");
    app->add_option("--trials", trials, "frame-bound trials");
    app->add_option("--seed", seed, "RNG seed");
    if (scaling) app->add_option("--n-max", n_max, "last dyadic level");
    if (!scaling) app->add_flag("--oracle", oracle, "add discrete oracle flags");
  }

  Config resolve() const {
    Config c;
    if (!config_path.empty()) c = config_from_json(io::read_file(config_path));
    if (corpus) c.corpus = *corpus;
    if (d) c.d = *d;
    if (inv_h) c.inv_h = *inv_h;
    if (p) c.e.p = io::exponent_from(json(*p));
    if (q) c.e.q = io::exponent_from(json(*q));
    if (fibers) std::tie(c.n1, c.n2) = parse_fibers(*fibers);
    if (J) c.J = *J;
    if (rank_tol) c.rank_tol = *rank_tol;
    if (trials) c.trials = *trials;
    if (seed) c.seed = *seed;
    if (n_max) c.n_max = static_cast<int>(*n_max);
    if (oracle) c.oracle = true;
    return c;
  }
};

struct Output {
  std::string path;
  std::string format = "json";
  bool stable = false;

  void attach(CLI::App* app) {
    app->add_option("--out", path, "output file (default stdout)");
    app->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    app->add_flag("--stable", stable, "omit the timestamp for byte-identical reports");
  }

  void emit(const json& j) const {
    io::write_text(path, format == "csv" ? io::to_csv(j) : j.dump(2) + "\n");
  }
};

std::string resolve_scenario(const std::string& name) {
  if (std::filesystem::exists(name)) return name;
  const std::filesystem::path bundled = std::filesystem::path(SIFRAME_SCENARIO_DIR) / (name + ".json");
  if (std::filesystem::exists(bundled)) return bundled.string();
  throw BadScenario("no scenario file or bundled scenario named '" + name + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shift-invariant (p,q)-frame toolkit"};
  app.require_subcommand(1);

  Overrides analyze_ov, dual_ov, recon_ov, scaling_ov;
  Output analyze_out, dual_out, recon_out, scaling_out, oracle_out, corpus_out;

  auto* analyze = app.add_subcommand("analyze", "bracket, profile, dual, reconstruction and frame bounds");
  analyze_ov.attach(analyze);
  analyze_out.attach(analyze);

  auto* dual = app.add_subcommand("dual", "dual filters of a constant-rank system");
  dual_ov.attach(dual);
  dual_out.attach(dual);

  auto* recon = app.add_subcommand("reconstruct", "reconstruction error table over the exponent sweep");
  recon_ov.attach(recon);
  recon_out.attach(recon);

  std::string scenario;
  std::optional<double> oracle_tol;
  auto* oracle = app.add_subcommand("oracle", "verdict flags on a discrete scenario");
  oracle->add_option("scenario", scenario, "scenario file or bundled name (delta, diff-filter, random-20)")->required();
  oracle->add_option("--rank-tol", oracle_tol, "override the scenario rank tolerance");
  oracle_out.attach(oracle);

  auto* scaling = app.add_subcommand("diagnose-scaling", "dyadic scaling-limit diagnostic of the first generator");
  scaling_ov.attach(scaling, true);
  scaling_out.attach(scaling);

  auto* corpus = app.add_subcommand("corpus", "generator corpus");
  corpus->require_subcommand(1);
  auto* corpus_list_cmd = corpus->add_subcommand("list", "list corpus entries");
  corpus_out.attach(corpus_list_cmd);
  std::string emit_spec;
  int emit_d = 1;
  Index emit_inv_h = 32;
  std::string emit_path;
  auto* corpus_emit = corpus->add_subcommand("emit", "write sampled generators as JSON");
  corpus_emit->add_option("spec", emit_spec, "generator spec")->required();
  corpus_emit->add_option("--d", emit_d, "number of x2 axes");
  corpus_emit->add_option("--inv-h", emit_inv_h, "samples per unit length");
  corpus_emit->add_option("--out", emit_path, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*analyze) {
      const FrameReport R = run_analyze(analyze_ov.resolve());
      analyze_out.emit(to_json(R, analyze_out.stable));
      return R.frame() ? 0 : 2;
    }
    if (*dual) {
      const Outcome o = run_dual(dual_ov.resolve(), dual_out.stable);
      dual_out.emit(o.report);
      return o.verdict ? 0 : 2;
    }
    if (*recon) {
      const Outcome o = run_reconstruct(recon_ov.resolve(), recon_out.stable);
      recon_out.emit(o.report);
      return o.verdict ? 0 : 2;
    }
    if (*oracle) {
      const std::string path = resolve_scenario(scenario);
      const json doc = io::read_file(path);
      Scenario sc = parse_scenario(doc);
      if (oracle_tol) sc.rank_tol = *oracle_tol;
      const Outcome o = run_oracle(sc, fnv1a_digest(doc.dump()), oracle_out.stable);
      oracle_out.emit(o.report);
      return o.verdict ? 0 : 2;
    }
    if (*scaling) {
      const Outcome o = run_scaling(scaling_ov.resolve(), scaling_out.stable);
      scaling_out.emit(o.report);
      return o.verdict ? 0 : 2;
    }
    if (*corpus_list_cmd) {
      json list = json::array();
      for (const auto& e : corpus_list())
        list.push_back({{"name", e.name},
                        {"signature", e.signature},
                        {"description", e.description},
                        {"frame", e.frame},
                        {"k0", e.k0},
                        {"closed_form_bracket", e.closed_form_bracket}});
      corpus_out.emit({{"schema", kReportSchema}, {"entries", list}});
      return 0;
    }
    if (*corpus_emit) {
      CorpusParams p;
      p.d = emit_d;
      p.inv_h = emit_inv_h;
      json j = io::system(corpus_build_spec(emit_spec, p));
      j["schema"] = kReportSchema;
      j["spec"] = emit_spec;
      io::write_text(emit_path, j.dump() + "\n");
      return 0;
    }
  } catch (const StageError& e) {
    std::cerr << "error [" << e.stage() << "] " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
