#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "siframe/corpus.hpp"
#include "siframe/discrete_oracle.hpp"
#include "siframe/duality.hpp"

namespace siframe {

using json = nlohmann::json;

namespace io {

/// Exponents serialize as numbers, with infinity as the string "inf".
inline json exponent(double e) { return std::isinf(e) ? json("inf") : json(e); }

inline double exponent_from(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "infinity") return kInf;
    return detail::parse_number(s);
  }
  if (!j.is_number()) throw BadParams("exponent must be a number or \"inf\"");
  return j.get<double>();
}

/// Non-finite values become null; callers keep report fields finite.
inline json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json complex_values(const std::vector<cplx>& v) {
  json out = json::array();
  for (const auto& z : v) out.push_back(json::array({z.real(), z.imag()}));
  return out;
}

inline std::vector<cplx> complex_values_from(const json& j) {
  if (!j.is_array()) throw BadParams("values must be an array");
  std::vector<cplx> out;
  out.reserve(j.size());
  for (const auto& z : j) {
    if (z.is_number()) {
      out.emplace_back(z.get<double>(), 0.0);
    } else if (z.is_array() && z.size() == 2) {
      out.emplace_back(z[0].get<double>(), z[1].get<double>());
    } else {
      throw BadParams("complex value must be a number or [re, im]");
    }
  }
  return out;
}

inline json box(const IndexBox& b) { return {{"lo", b.lo}, {"hi", b.hi}}; }
inline IndexBox box_from(const json& j) { return IndexBox(j.at("lo").get<Multi>(), j.at("hi").get<Multi>()); }

inline json field(const SampledField& f) {
  json dec = {{"kind", f.decay().kind == DecayKind::compact ? "compact" : "exponential"},
              {"rate", f.decay().rate},
              {"tail_mass", f.decay().tail_mass}};
  return {{"d", f.d()},
          {"inv_h", f.inv_h()},
          {"unit_box", box(f.unit_box())},
          {"decay", dec},
          {"values", complex_values(f.values().data())}};
}

inline SampledField field_from(const json& j) {
  Decay dec;
  if (j.contains("decay")) {
    const auto& dj = j.at("decay");
    dec.kind = dj.value("kind", "compact") == "compact" ? DecayKind::compact : DecayKind::exponential;
    dec.rate = dj.value("rate", 0.0);
    dec.tail_mass = dj.value("tail_mass", 0.0);
  }
  SampledField f(j.at("d").get<int>(), j.at("inv_h").get<Index>(), box_from(j.at("unit_box")), dec);
  auto v = complex_values_from(j.at("values"));
  if (static_cast<Index>(v.size()) != f.values().size())
    throw DimensionMismatch("field has " + std::to_string(v.size()) + " values, box holds " +
                            std::to_string(f.values().size()));
  f.values().data() = std::move(v);
  f.check_finite();
  return f;
}

inline json coefficients(const CoefficientArray& c) {
  return {{"d", c.d()}, {"window", box(c.window())}, {"values", complex_values(c.data().data())}};
}

inline CoefficientArray coefficients_from(const json& j) {
  CoefficientArray c(j.at("d").get<int>(), box_from(j.at("window")));
  auto v = complex_values_from(j.at("values"));
  if (static_cast<Index>(v.size()) != c.data().size()) throw DimensionMismatch("coefficient count differs from window");
  c.data().data() = std::move(v);
  return c;
}

inline json system(const GeneratorSystem& g) {
  json gens = json::array();
  for (const auto& f : g.generators()) gens.push_back(field(f));
  return {{"labels", g.labels()}, {"generators", gens}};
}

inline GeneratorSystem system_from(const json& j) {
  std::vector<SampledField> gens;
  for (const auto& f : j.at("generators")) gens.push_back(field_from(f));
  return GeneratorSystem(std::move(gens), j.value("labels", std::vector<std::string>{}));
}

inline json frequency_grid(const FrequencyGrid& f) {
  return {{"d", f.d}, {"n1", f.n1}, {"n2", f.n2}, {"J", f.J}};
}

/// Per-node bracket matrices as nested [re, im] rows.
inline json gramian(const GramianField& G) {
  json nodes = json::array();
  for (Index k = 0; k < G.node_count(); ++k) {
    auto F = G.fiber(k);
    json rows = json::array();
    for (Index i = 0; i < F.rows(); ++i) {
      std::vector<cplx> row(static_cast<std::size_t>(F.cols()));
      for (Index c = 0; c < F.cols(); ++c) row[static_cast<std::size_t>(c)] = F(i, c);
      rows.push_back(complex_values(row));
    }
    nodes.push_back({{"xi", G.freq.xi(k)}, {"matrix", rows}});
  }
  return {{"freq", frequency_grid(G.freq)}, {"tail_bound", G.tail_bound}, {"nodes", nodes}};
}

inline json profile(const SpectralProfile& S, bool with_eigenvalues = false) {
  json j = {{"freq", frequency_grid(S.freq)},
            {"r", S.r},
            {"rank_tol", S.rank_tol},
            {"k0", S.k0},
            {"k_max", S.k_max},
            {"constancy", S.constancy},
            {"C", number(S.C_est)},
            {"lambda_max", S.lambda_max},
            {"min_eigenvalue", S.min_eigenvalue}};
  if (with_eigenvalues) {
    j["eigenvalues"] = S.eigenvalues;
    j["k_per_fiber"] = S.k_per_fiber;
  }
  return j;
}

inline json dual(const DualSystem& D, bool with_filters = true) {
  json j = {{"r", D.r()},
            {"construction", to_string(D.construction)},
            {"k0", D.k0},
            {"rank_tol", D.rank_tol},
            {"residual", number(D.residual)},
            {"tail_mass", number(D.tail_mass)},
            {"discarded_energy", D.discarded_energy},
            {"alias_energy", D.alias_energy},
            {"freq", frequency_grid(D.freq)}};
  if (with_filters) {
    json f = json::array();
    for (const auto& a : D.filters) f.push_back(coefficients(a));
    j["filters"] = f;
  }
  if (D.materialized()) j["psi"] = system(D.psi);
  return j;
}

inline json verdict(const VerdictFlags& v) {
  return {{"frame_22", v.frame_22},
          {"rank_constant", v.rank_constant},
          {"band_ok", v.band_ok},
          {"dual_exists", v.dual_exists},
          {"min_norm_consistent", v.min_norm_consistent},
          {"agree", v.agree()},
          {"K", v.K},
          {"lambda_1", v.lambda_1},
          {"lambda_K", v.lambda_K},
          {"B", number(v.B)},
          {"condition", number(v.condition)},
          {"dual_residual", number(v.dual_residual)},
          {"min_norm_worst", number(v.min_norm_worst)}};
}

inline json read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw BadParams("'" + path + "': " + e.what());
  }
}

inline void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
}

/// Flattens a document to "path,value" rows; arrays index with '/'.
inline std::string to_csv(const json& j) {
  std::ostringstream os;
  os << "key,value\n";
  const json flat = j.flatten();
  for (auto it = flat.begin(); it != flat.end(); ++it) {
    std::string key = it.key();
    if (!key.empty() && key[0] == '/') key.erase(0, 1);
    std::string val = it.value().is_string() ? it.value().get<std::string>() : it.value().dump();
    if (val.find_first_of(",\"\n") != std::string::npos) {
      std::string q = "\"";
      for (char c : val) q += c == '"' ? std::string("\"\"") : std::string(1, c);
      val = q + "\"";
    }
    os << key << ',' << val << '\n';
  }
  return os.str();
}

}  // namespace io

// ---------------------------------------------------------------------------
// Oracle scenarios

/// One discrete system with an optional expected frame verdict.
struct ScenarioModel {
  DiscreteModel model;
  std::optional<bool> expect_frame;
};

struct Scenario {
  std::string name;
  double rank_tol = 1e-8;
  std::uint64_t seed = 1;
  int probes = 8;
  std::vector<ScenarioModel> models;
};

/// Scenario document:
///   {"schema": 1, "name": ..., "rank_tol": 1e-8, "seed": 1, "probes": 8,
///    "models": [{"kind": "delta" | "random" | "adversarial" | "explicit", ...}]}
/// Every model carries N, M, d, rho. random takes r (int or list cycled over
/// count), seed, count; adversarial takes seed and an optional name;
/// explicit takes generators as arrays of [re, im] samples. expect_frame is
/// optional on any entry.
inline Scenario parse_scenario(const json& j) {
  try {
    if (!j.is_object()) throw BadScenario("scenario must be an object");
    if (j.value("schema", 1) != 1) throw BadScenario("unsupported schema " + j.at("schema").dump());
    Scenario sc;
    sc.name = j.value("name", "scenario");
    sc.rank_tol = j.value("rank_tol", 1e-8);
    sc.seed = j.value("seed", std::uint64_t{1});
    sc.probes = j.value("probes", 8);
    if (!(sc.rank_tol > 0.0) || sc.probes < 1) throw BadScenario("rank_tol and probes must be positive");
    if (!j.contains("models") || !j.at("models").is_array() || j.at("models").empty())
      throw BadScenario("scenario needs a non-empty models array");
    for (const auto& mj : j.at("models")) {
      const std::string kind = mj.at("kind").get<std::string>();
      const Index N = mj.at("N").get<Index>(), M = mj.value("M", Index{1}), rho = mj.value("rho", Index{1});
      const int d = mj.value("d", 1);
      std::optional<bool> expect;
      if (mj.contains("expect_frame")) expect = mj.at("expect_frame").get<bool>();
      auto push = [&](DiscreteModel m) {
        m.validate();
        sc.models.push_back({std::move(m), expect});
      };
      if (kind == "delta") {
        push(delta_model(N, M, d, rho));
      } else if (kind == "random") {
        std::vector<std::size_t> rs;
        if (mj.at("r").is_array())
          rs = mj.at("r").get<std::vector<std::size_t>>();
        else
          rs = {mj.at("r").get<std::size_t>()};
        if (rs.empty()) throw BadScenario("random model needs r");
        const auto seed0 = mj.value("seed", std::uint64_t{1});
        const int count = mj.value("count", 1);
        for (int c = 0; c < count; ++c) {
          push(random_model(N, M, d, rho, rs[static_cast<std::size_t>(c) % rs.size()],
                            seed0 + static_cast<std::uint64_t>(c)));
        }
      } else if (kind == "adversarial") {
        const std::string which = mj.value("name", "");
        bool found = false;
        for (auto& m : adversarial_models(N, M, d, rho, mj.value("seed", std::uint64_t{1})))
          if (which.empty() || m.label == which) {
            found = true;
            push(std::move(m));
          }
        if (!found) throw BadScenario("unknown adversarial model '" + which + "'");
      } else if (kind == "explicit") {
        DiscreteModel m;
        m.N = N;
        m.M = M;
        m.d = d;
        m.rho = rho;
        m.label = mj.value("label", "explicit");
        for (const auto& g : mj.at("generators")) m.generators.push_back(io::complex_values_from(g));
        push(std::move(m));
      } else {
        throw BadScenario("unknown model kind '" + kind + "'");
      }
    }
    return sc;
  } catch (const json::exception& e) {
    throw BadScenario(e.what());
  } catch (const BadScenario&) {
    throw;
  } catch (const Error& e) {
    throw BadScenario(e.what());
  }
}

inline Scenario load_scenario(const std::string& path) {
  try {
    return parse_scenario(io::read_file(path));
  } catch (const BadParams& e) {
    throw BadScenario(e.what());
  }
}

}  // namespace siframe
