// Reference implementations used only by the tests. They favour direct,
// definition-level loops over speed and share no code paths with the library
// beyond the data containers.
#pragma once

#include <map>
#include <random>

#include "siframe/siframe.hpp"

namespace oracle {

using siframe::cplx;
using siframe::Index;
using siframe::Multi;

inline double hat(double x) { return (x > 0.0 && x < 2.0) ? 1.0 - std::abs(x - 1.0) : 0.0; }
inline double box(double x) { return (x >= 0.0 && x < 1.0) ? 1.0 : 0.0; }

/// Seeded generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }
  Index integer(Index a, Index b) { return std::uniform_int_distribution<Index>(a, b)(rng_); }
  cplx normal() {
    std::normal_distribution<double> nd(0.0, 1.0);
    const double re = nd(rng_);
    return {re, nd(rng_)};
  }
  bool coin(double p = 0.5) { return uniform(0.0, 1.0) < p; }

  double exponent() {
    static const double choices[] = {1.0, 1.5, 2.0, 3.0, siframe::kInf};
    return choices[integer(0, 4)];
  }
  siframe::MixedExponents exponents() { return {exponent(), exponent()}; }

  /// Random compactly supported field: box of up to `max_cells` per axis,
  /// complex normal samples, some entries zeroed.
  siframe::SampledField field(int d, Index inv_h, Index max_cells = 3) {
    const std::size_t D = static_cast<std::size_t>(d + 1);
    Multi lo(D), hi(D);
    for (std::size_t a = 0; a < D; ++a) {
      lo[a] = integer(-2, 2);
      hi[a] = lo[a] + integer(1, max_cells);
    }
    siframe::SampledField f(d, inv_h, siframe::IndexBox(lo, hi));
    for (auto& v : f.values().data()) v = coin(0.15) ? cplx(0.0) : normal();
    return f;
  }

  siframe::CoefficientArray coeffs(int d, Index max_side = 4, double density = 0.7) {
    const std::size_t D = static_cast<std::size_t>(d + 1);
    Multi lo(D), hi(D);
    for (std::size_t a = 0; a < D; ++a) {
      lo[a] = integer(-3, 3);
      hi[a] = lo[a] + integer(1, max_side);
    }
    siframe::CoefficientArray c(d, siframe::IndexBox(lo, hi));
    for (auto& v : c.data().data()) v = coin(density) ? normal() : cplx(0.0);
    return c;
  }

  std::mt19937_64& rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

/// Sparse point view of a field: global sample multi-index -> value.
inline std::map<Multi, cplx> points(const siframe::SampledField& f) {
  std::map<Multi, cplx> m;
  const auto& a = f.values();
  for (Index t = 0; t < a.size(); ++t) m[a.multi(t)] = a.data()[static_cast<std::size_t>(t)];
  return m;
}

inline double mixed(const std::map<Index, double>& outer_values, double p, double weight) {
  if (std::isinf(p)) {
    double m = 0.0;
    for (const auto& [k, v] : outer_values) m = std::max(m, v);
    return m;
  }
  double s = 0.0;
  for (const auto& [k, v] : outer_values) s += std::pow(v, p);
  return std::pow(weight * s, 1.0 / p);
}

inline double lp(const std::vector<double>& v, double p, double weight) {
  if (std::isinf(p)) {
    double m = 0.0;
    for (double x : v) m = std::max(m, x);
    return m;
  }
  double s = 0.0;
  for (double x : v) s += std::pow(x, p);
  return std::pow(weight * s, 1.0 / p);
}

inline double lpq_norm(const siframe::SampledField& f, double p, double q) {
  const double h = f.h();
  std::map<Index, std::vector<double>> rows;
  for (const auto& [m, v] : points(f)) rows[m[0]].push_back(std::abs(v));
  std::map<Index, double> inner;
  for (const auto& [k, vals] : rows) inner[k] = lp(vals, q, std::pow(h, f.d()));
  return mixed(inner, p, h);
}

inline double lpq_seq_norm(const siframe::CoefficientArray& c, double p, double q) {
  std::map<Index, std::vector<double>> rows;
  const auto& a = c.data();
  for (Index t = 0; t < a.size(); ++t) rows[a.multi(t)[0]].push_back(std::abs(a.data()[static_cast<std::size_t>(t)]));
  std::map<Index, double> inner;
  for (const auto& [k, vals] : rows) inner[k] = lp(vals, q, 1.0);
  return mixed(inner, p, 1.0);
}

/// Amalgam norm by the definition: for each x1 node in the unit interval,
/// sum over j1 of the L^q norm (over the unit cube) of sum_j2 |f|.
inline double amalgam_norm(const siframe::SampledField& f, double p, double q) {
  const Index n = f.inv_h();
  const double h = f.h();
  // (u1, j1) -> (u2 multi) -> sum over j2
  std::map<std::pair<Index, Index>, std::map<Multi, double>> acc;
  for (const auto& [m, v] : points(f)) {
    const Index u1 = siframe::floor_mod(m[0], n), j1 = siframe::floor_div(m[0], n);
    Multi u2(m.begin() + 1, m.end());
    for (auto& x : u2) x = siframe::floor_mod(x, n);
    acc[{u1, j1}][u2] += std::abs(v);
  }
  std::map<Index, double> per_u1;
  for (Index u = 0; u < n; ++u) per_u1[u] = 0.0;
  const Index cells = siframe::ipow(n, f.d());
  for (const auto& [key, mp] : acc) {
    std::vector<double> vals;
    for (const auto& [u2, s] : mp) vals.push_back(s);
    vals.resize(static_cast<std::size_t>(cells), 0.0);
    per_u1[key.first] += lp(vals, q, std::pow(h, f.d()));
  }
  return mixed(per_u1, p, h);
}

inline double wiener_norm(const siframe::SampledField& f) {
  const Index n = f.inv_h();
  // x1 node -> j2 cell -> sup
  std::map<Index, std::map<Multi, double>> sup;
  for (const auto& [m, v] : points(f)) {
    Multi cell(m.begin() + 1, m.end());
    for (auto& x : cell) x = siframe::floor_div(x, n);
    auto& s = sup[m[0]][cell];
    s = std::max(s, std::abs(v));
  }
  std::map<Index, double> per_j1;
  for (const auto& [s0, cells] : sup) {
    double row = 0.0;
    for (const auto& [c, v] : cells) row += v;
    auto& best = per_j1[siframe::floor_div(s0, n)];
    best = std::max(best, row);
  }
  double total = 0.0;
  for (const auto& [j, v] : per_j1) total += v;
  return total;
}

/// Direct quadrature of the transform of the cellwise-constant field.
inline cplx fourier(const siframe::SampledField& f, const std::vector<double>& omega) {
  const double h = f.h();
  cplx acc(0.0);
  for (const auto& [m, v] : points(f)) {
    double phase = 0.0;
    for (std::size_t a = 0; a < m.size(); ++a) phase += omega[a] * (static_cast<double>(m[a]) + 0.5) * h;
    acc += v * std::exp(cplx(0.0, -phase));
  }
  double factor = 1.0;
  for (double w : omega) {
    const double t = 0.5 * w * h;
    factor *= h * (t == 0.0 ? 1.0 : std::sin(t) / t);
  }
  return acc * factor;
}

/// Direct semi-convolution via point maps.
inline std::map<Multi, cplx> semi_convolve(const siframe::SampledField& f, const siframe::CoefficientArray& D) {
  std::map<Multi, cplx> out;
  const auto fp = points(f);
  const auto& a = D.data();
  for (Index t = 0; t < a.size(); ++t) {
    const cplx c = a.data()[static_cast<std::size_t>(t)];
    if (c == cplx(0.0)) continue;
    Multi j = a.multi(t);
    for (const auto& [m, v] : fp) {
      Multi x = m;
      for (std::size_t k = 0; k < x.size(); ++k) x[k] += j[k] * f.inv_h();
      out[x] += c * v;
    }
  }
  return out;
}

/// <f, g(. - j)> by direct point lookup.
inline cplx shifted_inner(const siframe::SampledField& f, const siframe::SampledField& g, const Multi& j) {
  const auto gp = points(g);
  cplx acc(0.0);
  for (const auto& [m, v] : points(f)) {
    Multi x = m;
    for (std::size_t k = 0; k < x.size(); ++k) x[k] -= j[k] * f.inv_h();
    auto it = gp.find(x);
    if (it != gp.end()) acc += v * std::conj(it->second);
  }
  return acc * f.grid().cell_measure();
}

inline double max_abs_diff(const siframe::SampledField& a, const siframe::SampledField& b) {
  auto pa = points(a), pb = points(b);
  double m = 0.0;
  for (const auto& [k, v] : pa) {
    auto it = pb.find(k);
    m = std::max(m, std::abs(v - (it == pb.end() ? cplx(0.0) : it->second)));
  }
  for (const auto& [k, v] : pb)
    if (!pa.count(k)) m = std::max(m, std::abs(v));
  return m;
}

/// Relative slack (rhs - lhs) / max(rhs, tiny); negative means violation.
inline double slack(double lhs, double rhs) { return (rhs - lhs) / std::max(std::abs(rhs), 1e-300); }

}  // namespace oracle
