#pragma once

#include "siframe/sampled_field.hpp"

namespace siframe {

namespace detail {

inline double pow_e(double v, double e) {
  if (e == 1.0) return v;
  if (e == 2.0) return v * v;
  return std::pow(v, e);
}

/// Accumulates either sum |v|^e or max |v| (e = inf).
struct PowerSum {
  double e;
  double acc = 0.0;
  explicit PowerSum(double e_) : e(e_) {}
  void add(double v) {
    if (std::isinf(e)) acc = std::max(acc, v);
    else acc += pow_e(v, e);
  }
  /// (weight * sum)^{1/e}, or the max when e is infinite.
  double result(double weight = 1.0) const {
    if (std::isinf(e)) return acc;
    if (e == 1.0) return weight * acc;
    if (e == 2.0) return std::sqrt(weight * acc);
    return std::pow(weight * acc, 1.0 / e);
  }
};

}  // namespace detail

/// l^{p,q} norm: outer p over j1, inner q over j2.
inline double lpq_seq_norm(const CoefficientArray& c, const MixedExponents& e) {
  const BoxArray& a = c.data();
  if (a.box().empty()) return 0.0;
  detail::PowerSum outer(e.p);
  const IndexBox& b = a.box();
  for (Index j1 = b.lo[0]; j1 < b.hi[0]; ++j1) {
    IndexBox slice = b;
    slice.lo[0] = j1;
    slice.hi[0] = j1 + 1;
    detail::PowerSum inner(e.q);
    for_each_row(slice, [&](const Multi& m, Index len) {
      const cplx* p = a.data().data() + a.offset(m);
      for (Index i = 0; i < len; ++i) inner.add(std::abs(p[i]));
    });
    outer.add(inner.result());
  }
  return outer.result();
}

/// L^{p,q} norm of the cellwise-constant field.
inline double lpq_norm(const SampledField& f, const MixedExponents& e) {
  const BoxArray& a = f.values();
  const IndexBox& b = a.box();
  if (b.empty()) return 0.0;
  const double h = f.h();
  const double inner_w = std::pow(h, f.d());
  detail::PowerSum outer(e.p);
  for (Index s0 = b.lo[0]; s0 < b.hi[0]; ++s0) {
    IndexBox slice = b;
    slice.lo[0] = s0;
    slice.hi[0] = s0 + 1;
    detail::PowerSum inner(e.q);
    for_each_row(slice, [&](const Multi& m, Index len) {
      const cplx* p = a.data().data() + a.offset(m);
      for (Index i = 0; i < len; ++i) inner.add(std::abs(p[i]));
    });
    outer.add(inner.result(inner_w));
  }
  return outer.result(h);
}

namespace detail {

/// Adds, for every x1 sample row of `a`, the inner q-norm of |a| periodized
/// over x2 into row_sum[row mod n].
inline void amalgam_rows(const BoxArray& a, Index n, int d, double q, std::vector<double>& row_sum) {
  const IndexBox& b = a.box();
  if (b.empty()) return;
  const double inner_w = std::pow(1.0 / static_cast<double>(n), d);
  std::vector<double> per(static_cast<std::size_t>(ipow(n, d)));
  for (Index s0 = b.lo[0]; s0 < b.hi[0]; ++s0) {
    IndexBox slice = b;
    slice.lo[0] = s0;
    slice.hi[0] = s0 + 1;
    std::fill(per.begin(), per.end(), 0.0);
    for_each_row(slice, [&](const Multi& m, Index len) {
      const cplx* p = a.data().data() + a.offset(m);
      Index base = 0;
      for (int k = 1; k < d; ++k) base = base * n + floor_mod(m[k], n);
      base *= n;
      Index u = floor_mod(m[d], n);
      for (Index i = 0; i < len; ++i) {
        per[static_cast<std::size_t>(base + u)] += std::abs(p[i]);
        if (++u == n) u = 0;
      }
    });
    PowerSum inner(q);
    for (double v : per) inner.add(v);
    row_sum[static_cast<std::size_t>(floor_mod(s0, n))] += inner.result(inner_w);
  }
}

inline double amalgam_outer(const std::vector<double>& row_sum, double p, double h) {
  PowerSum outer(p);
  for (double v : row_sum) outer.add(v);
  return outer.result(h);
}

}  // namespace detail

/// Amalgam norm: mixed (p,q) norm over the unit cell of the periodization of |f|.
inline double amalgam_norm(const SampledField& f, const MixedExponents& e) {
  if (f.values().box().empty()) return 0.0;
  std::vector<double> row_sum(static_cast<std::size_t>(f.inv_h()), 0.0);
  detail::amalgam_rows(f.values(), f.inv_h(), f.d(), e.q, row_sum);
  return detail::amalgam_outer(row_sum, e.p, f.h());
}

/// Wiener amalgam norm W(L^{1,1}) with suprema over grid nodes.
inline double wiener_norm(const SampledField& f) {
  const BoxArray& a = f.values();
  const IndexBox& b = a.box();
  if (b.empty()) return 0.0;
  const Index n = f.inv_h();
  const int d = f.d();
  const IndexBox& ub = f.unit_box();
  Index inner_cells = 1;
  for (int k = 1; k <= d; ++k) inner_cells *= ub.extent(static_cast<std::size_t>(k));
  std::vector<double> sup(static_cast<std::size_t>(inner_cells));
  double total = 0.0;
  for (Index j1 = ub.lo[0]; j1 < ub.hi[0]; ++j1) {
    double best = 0.0;
    for (Index s0 = j1 * n; s0 < (j1 + 1) * n; ++s0) {
      IndexBox slice = b;
      slice.lo[0] = s0;
      slice.hi[0] = s0 + 1;
      std::fill(sup.begin(), sup.end(), 0.0);
      for_each_row(slice, [&](const Multi& m, Index len) {
        const cplx* p = a.data().data() + a.offset(m);
        Index base = 0;
        for (int k = 1; k < d; ++k)
          base = base * ub.extent(static_cast<std::size_t>(k)) + (floor_div(m[k], n) - ub.lo[k]);
        base *= ub.extent(static_cast<std::size_t>(d));
        for (Index i = 0; i < len; ++i) {
          auto& s = sup[static_cast<std::size_t>(base + floor_div(m[d] + i, n) - ub.lo[d])];
          s = std::max(s, std::abs(p[i]));
        }
      });
      double row = 0.0;
      for (double v : sup) row += v;
      best = std::max(best, row);
    }
    total += best;
  }
  return total;
}

}  // namespace siframe
