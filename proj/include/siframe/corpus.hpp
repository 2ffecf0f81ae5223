#pragma once

#include <cctype>
#include <map>
#include <sstream>

#include "siframe/lattice_ops.hpp"

namespace siframe {

struct CorpusParams {
  int d = 1;
  Index inv_h = 32;
  Index order = 2;   // bspline order along x1
  Index order2 = 1;  // bspline order along each x2 axis
  double sigma = 0.5;
  Index cutoff = 4;
  std::string base = "box";
  Multi shift;  // shifted_pair lattice shift; empty means e1
};

struct CorpusEntry {
  std::string name;
  std::string signature;
  std::string description;
  bool frame = true;
  Index k0 = 1;
  std::string closed_form_bracket;  // along xi~ = 0, empty if unknown
};

inline const std::vector<CorpusEntry>& corpus_list() {
  static const std::vector<CorpusEntry> entries = {
      {"box", "box", "indicator of the unit cube", true, 1, "1"},
      {"bspline", "bspline(n)", "cardinal B-spline B_n(x1) times B_order2 on each x2 axis", true, 1,
       "(2+cos xi)/3 for n=2, order2=1"},
      {"gaussian", "gaussian(sigma, cutoff)", "isotropic Gaussian truncated to [-cutoff, cutoff]^{1+d}", true, 1, ""},
      {"shifted_pair", "shifted_pair(base, k1[, k2...])", "base and its lattice translate by k", true, 1,
       "[[a, a e^{i xi.k}], [a e^{-i xi.k}, a]]"},
      {"diff_filtered_box", "diff_filtered_box", "(2b(x1) - b(x1-1) - b(x1+1)) times box", false, 0,
       "(2-2cos xi)^2"},
  };
  return entries;
}

namespace detail {

/// Cardinal B-spline of order n (support [0, n]).
inline double cardinal_bspline(Index n, double x) {
  if (x <= 0.0 || x >= static_cast<double>(n)) return 0.0;
  if (n == 1) return 1.0;
  double s = 0.0, binom = 1.0, fact = 1.0;
  for (Index k = 1; k < n; ++k) fact *= static_cast<double>(k);
  for (Index k = 0; k <= n; ++k) {
    const double t = x - static_cast<double>(k);
    if (t > 0.0) s += ((k % 2) ? -binom : binom) * std::pow(t, static_cast<double>(n - 1));
    binom = binom * static_cast<double>(n - k) / static_cast<double>(k + 1);
  }
  return s / fact;
}

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

/// Split "a, f(b, c), d" at top-level commas.
inline std::vector<std::string> split_args(const std::string& s) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty()) out.push_back(trim(cur));
  return out;
}

inline double parse_number(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw BadParams("expected a number, got '" + s + "'");
  }
  if (used != s.size()) throw BadParams("expected a number, got '" + s + "'");
  return v;
}

inline Index parse_integer(const std::string& s) {
  const double v = parse_number(s);
  if (v != std::floor(v)) throw BadParams("expected an integer, got '" + s + "'");
  return static_cast<Index>(v);
}

}  // namespace detail

/// Parse "name" or "name(args)" into a corpus name plus parameters layered
/// over `defaults`.
inline std::pair<std::string, CorpusParams> parse_corpus_spec(const std::string& spec,
                                                              const CorpusParams& defaults = {}) {
  const std::string s = detail::trim(spec);
  CorpusParams p = defaults;
  const auto open = s.find('(');
  std::string name = detail::trim(s.substr(0, open));
  std::vector<std::string> args;
  if (open != std::string::npos) {
    if (s.back() != ')') throw BadParams("unbalanced parentheses in '" + spec + "'");
    args = detail::split_args(s.substr(open + 1, s.size() - open - 2));
  }
  if (name == "hat") {
    name = "bspline";
    p.order = 2;
    if (!args.empty()) throw BadParams("hat takes no arguments");
  } else if (name == "bspline") {
    if (args.size() > 2) throw BadParams("bspline(n[, order2])");
    if (!args.empty()) p.order = detail::parse_integer(args[0]);
    if (args.size() == 2) p.order2 = detail::parse_integer(args[1]);
  } else if (name == "gaussian") {
    if (args.size() > 2) throw BadParams("gaussian(sigma[, cutoff])");
    if (!args.empty()) p.sigma = detail::parse_number(args[0]);
    if (args.size() == 2) p.cutoff = detail::parse_integer(args[1]);
  } else if (name == "shifted_pair") {
    if (args.empty()) throw BadParams("shifted_pair(base, k1[, k2...])");
    p.base = args[0];
    p.shift.clear();
    for (std::size_t i = 1; i < args.size(); ++i) p.shift.push_back(detail::parse_integer(args[i]));
  } else if (name == "box" || name == "diff_filtered_box") {
    if (!args.empty()) throw BadParams(name + " takes no arguments");
  } else {
    throw UnknownCorpusEntry("'" + name + "'");
  }
  return {name, p};
}

inline GeneratorSystem corpus_build(const std::string& name, const CorpusParams& p) {
  if (p.d < 1) throw BadParams("d must be >= 1");
  if (p.inv_h < 1) throw BadParams("1/h must be a positive integer");
  const int d = p.d;
  const std::size_t D = static_cast<std::size_t>(d + 1);
  if (name == "box") {
    SampledField f(d, p.inv_h, IndexBox(Multi(D, 0), Multi(D, 1)));
    for (auto& v : f.values().data()) v = 1.0;
    return GeneratorSystem({f}, {"box"});
  }
  if (name == "bspline") {
    if (p.order < 1 || p.order2 < 1) throw BadParams("bspline orders must be >= 1");
    Multi hi(D, p.order2);
    hi[0] = p.order;
    const Index n1 = p.order, n2 = p.order2;
    auto f = SampledField::from_function(d, p.inv_h, IndexBox(Multi(D, 0), hi), [&](const double* x) {
      double v = detail::cardinal_bspline(n1, x[0]);
      for (int a = 1; a <= d; ++a) v *= detail::cardinal_bspline(n2, x[a]);
      return cplx(v);
    });
    return GeneratorSystem({f}, {"bspline" + std::to_string(p.order)});
  }
  if (name == "gaussian") {
    if (!(p.sigma > 0.0) || p.cutoff < 1) throw BadParams("gaussian needs sigma > 0 and cutoff >= 1");
    const double a = 1.0 / (2.0 * p.sigma * p.sigma);
    auto f = SampledField::from_function(d, p.inv_h, IndexBox(Multi(D, -p.cutoff), Multi(D, p.cutoff)),
                                         [&](const double* x) {
                                           double r2 = 0.0;
                                           for (std::size_t k = 0; k < D; ++k) r2 += x[k] * x[k];
                                           return cplx(std::exp(-a * r2));
                                         });
    // Wiener bound of the discarded part: per-axis tail t times per-axis cell sum s.
    double t = 0.0, s = 1.0;
    for (Index k = p.cutoff; k < p.cutoff + 200; ++k) t += 2.0 * std::exp(-a * static_cast<double>(k * k));
    for (Index k = 1; k < 200; ++k) s += 2.0 * std::exp(-a * static_cast<double>((k - 1) * (k - 1)));
    f.set_decay(Decay::exponential(a, static_cast<double>(D) * t * std::pow(s, d)));
    return GeneratorSystem({f}, {"gaussian"});
  }
  if (name == "shifted_pair") {
    auto [bname, bp] = parse_corpus_spec(p.base, p);
    if (bname == "shifted_pair") throw BadParams("shifted_pair base cannot be a pair");
    GeneratorSystem base = corpus_build(bname, bp);
    Multi k = p.shift;
    if (k.empty()) k = Multi{1};
    k.resize(D, 0);
    return GeneratorSystem({base[0], shift(base[0], k)}, {base.labels()[0], base.labels()[0] + "_shifted"});
  }
  if (name == "diff_filtered_box") {
    Multi lo(D, 0), hi(D, 1);
    lo[0] = -1;
    hi[0] = 2;
    SampledField f(d, p.inv_h, IndexBox(lo, hi));
    for (Index t = 0; t < f.values().size(); ++t) {
      const Index cell = floor_div(f.values().multi(t)[0], p.inv_h);
      f.values().data()[static_cast<std::size_t>(t)] = cell == 0 ? 2.0 : -1.0;
    }
    return GeneratorSystem({f}, {"diff_filtered_box"});
  }
  throw UnknownCorpusEntry("'" + name + "'");
}

}  // namespace siframe

namespace siframe {

/// Build from the call syntax, e.g. "bspline(3)" or "shifted_pair(hat, 1)".
inline GeneratorSystem corpus_build_spec(const std::string& spec, const CorpusParams& defaults = {}) {
  auto [name, p] = parse_corpus_spec(spec, defaults);
  return corpus_build(name, p);
}

}  // namespace siframe
