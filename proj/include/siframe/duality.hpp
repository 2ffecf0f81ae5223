#pragma once

#include <map>
#include <random>

#include <Eigen/Eigenvalues>

#include "siframe/fiberization.hpp"

namespace siframe {

enum class DualConstruction { full_rank_inverse, constant_rank_pseudoinverse };

inline std::string to_string(DualConstruction c) {
  return c == DualConstruction::full_rank_inverse ? "full_rank_inverse" : "constant_rank_pseudoinverse";
}

struct DualOptions {
  double rank_tol = 1e-8;
  double energy_tol = 1e-22;  // filter energy allowed outside the window, relative
  double tail_cap = 1e-6;
  bool materialize = true;  // build the sampled psi_i; otherwise keep only the filters
};

/// Dual generators psi_i = sum_i' phi_i' *' a_ii', where a is the inverse DFT
/// of the fiberwise pseudo-inverse of the bracket, cut to a lattice window.
struct DualSystem {
  GeneratorSystem phi;
  GeneratorSystem psi;                    // empty unless materialized
  std::vector<CoefficientArray> filters;  // a_ii', index i + r * i'
  FrequencyGrid freq;
  DualConstruction construction = DualConstruction::full_rank_inverse;
  Index k0 = 0;
  double rank_tol = 1e-8;
  double residual = 0.0;
  double tail_mass = 0.0;
  double discarded_energy = 0.0;
  double alias_energy = 0.0;

  std::size_t r() const { return phi.r(); }
  bool materialized() const { return psi.r() > 0; }

  /// Filter symbol A(xi) = sum_j a(j) e^{-i xi.j}.
  Eigen::MatrixXcd symbol(const std::vector<double>& xi) const {
    const Index rr = static_cast<Index>(r());
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(rr, rr);
    for (std::size_t p = 0; p < filters.size(); ++p) {
      const BoxArray& a = filters[p].data();
      cplx s = 0.0;
      for (Index t = 0; t < a.size(); ++t) {
        const cplx v = a.data()[static_cast<std::size_t>(t)];
        if (v == cplx(0.0)) continue;
        Multi j = a.multi(t);
        double phase = 0.0;
        for (std::size_t ax = 0; ax < j.size(); ++ax) phase += xi[ax] * static_cast<double>(j[ax]);
        s += v * std::polar(1.0, -phase);
      }
      A(static_cast<Index>(p) % rr, static_cast<Index>(p) / rr) = s;
    }
    return A;
  }

  /// psi-hat(omega) = A(omega) phi-hat(omega).
  Eigen::VectorXcd fourier(const std::vector<double>& omega) const {
    Eigen::VectorXcd ph(static_cast<Index>(r()));
    for (std::size_t i = 0; i < r(); ++i) ph(static_cast<Index>(i)) = fourier_transform(phi[i], omega);
    return symbol(omega) * ph;
  }
};

namespace detail {

/// sum_j a(j) e^{-i xi_k.j} at every node; needs |j_a| within the node grid.
inline std::vector<cplx> symbol_at_nodes(const CoefficientArray& a, const FrequencyGrid& freq) {
  std::vector<cplx> fold(static_cast<std::size_t>(freq.node_count()), cplx(0.0));
  const std::size_t D = freq.dims();
  for (Index t = 0; t < a.data().size(); ++t) {
    const cplx v = a.data().data()[static_cast<std::size_t>(t)];
    if (v == cplx(0.0)) continue;
    Multi j = a.data().multi(t);
    Index parity = 0, idx = 0;
    for (std::size_t ax = 0; ax < D; ++ax) {
      parity += j[ax];
      idx = idx * freq.extent(ax) + floor_mod(j[ax], freq.extent(ax));
    }
    fold[static_cast<std::size_t>(idx)] += floor_mod(parity, 2) ? -v : v;
  }
  fft_inplace(fold, freq.shape(), FftDirection::forward);
  return fold;
}

/// sqrt(tr((G A^H - I) G (G A^H - I)^H)): distance of [phi-hat, psi-hat] times
/// the phi-hat fiber from the phi-hat fiber.
inline double fiber_residual(const Eigen::MatrixXcd& G, const Eigen::MatrixXcd& A) {
  const Eigen::MatrixXcd E = G * A.adjoint() - Eigen::MatrixXcd::Identity(G.rows(), G.cols());
  return std::sqrt(std::max(0.0, (E * G * E.adjoint()).trace().real()));
}

}  // namespace detail

inline DualSystem dual_generators(const GeneratorSystem& phi, const FrequencyGrid& freq, const DualOptions& opt = {}) {
  GramianField G = bracket(phi, phi, freq);
  SpectralProfile S = spectral_profile(G, opt.rank_tol);
  if (!S.constancy)
    throw ConditionIIIFails("fiber rank varies between " + std::to_string(S.k0) + " and " + std::to_string(S.k_max));
  const std::size_t r = phi.r();
  const Index rr = static_cast<Index>(r);
  const Index nodes = freq.node_count();
  const Index k0 = S.k0;

  std::vector<cplx> inv(static_cast<std::size_t>(nodes) * r * r);
  parallel_for(nodes, [&](Index k) {
    Eigen::MatrixXcd F = G.fiber(k);
    F = (0.5 * (F + F.adjoint())).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(F);
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(rr, rr);
    for (Index m = rr - k0; m < rr; ++m)
      A += es.eigenvectors().col(m) * es.eigenvectors().col(m).adjoint() / es.eigenvalues()(m);
    std::copy(A.data(), A.data() + rr * rr, inv.begin() + k * rr * rr);
  });

  const std::size_t D = freq.dims();
  Multi lo(D), hi(D);
  for (std::size_t a = 0; a < D; ++a) {
    lo[a] = -freq.extent(a) / 2;
    hi[a] = lo[a] + freq.extent(a);
  }
  const IndexBox full(lo, hi);
  std::vector<CoefficientArray> raw;
  std::vector<std::vector<double>> marg(D);
  for (std::size_t a = 0; a < D; ++a) marg[a].assign(static_cast<std::size_t>(freq.extent(a)), 0.0);
  double energy = 0.0, outer_half = 0.0;
  for (std::size_t p = 0; p < r * r; ++p) {
    std::vector<cplx> buf(static_cast<std::size_t>(nodes));
    for (Index k = 0; k < nodes; ++k) buf[static_cast<std::size_t>(k)] = inv[static_cast<std::size_t>(k) * r * r + p];
    fft_inplace(buf, freq.shape(), FftDirection::backward);
    CoefficientArray a(phi.d(), full);
    for (Index t = 0; t < a.data().size(); ++t) {
      Multi j = a.data().multi(t);
      Index parity = 0, idx = 0;
      bool outer = false;
      for (std::size_t ax = 0; ax < D; ++ax) {
        parity += j[ax];
        idx = idx * freq.extent(ax) + floor_mod(j[ax], freq.extent(ax));
        if (4 * std::abs(j[ax]) >= freq.extent(ax)) outer = true;
      }
      cplx v = buf[static_cast<std::size_t>(idx)] / static_cast<double>(nodes);
      if (floor_mod(parity, 2)) v = -v;
      a.data().data()[static_cast<std::size_t>(t)] = v;
      const double e = std::norm(v);
      energy += e;
      if (outer) outer_half += e;
      for (std::size_t ax = 0; ax < D; ++ax) marg[ax][static_cast<std::size_t>(j[ax] - lo[ax])] += e;
    }
    raw.push_back(std::move(a));
  }

  // Per-axis marginal cut from both ends; the union of the cuts stays within budget.
  const double budget = opt.energy_tol * energy / (2.0 * static_cast<double>(D));
  IndexBox win = full;
  for (std::size_t a = 0; a < D; ++a) {
    double cut = 0.0;
    while (win.hi[a] - win.lo[a] > 1 && cut + marg[a][static_cast<std::size_t>(win.lo[a] - lo[a])] <= budget)
      cut += marg[a][static_cast<std::size_t>(win.lo[a]++ - lo[a])];
    cut = 0.0;
    while (win.hi[a] - win.lo[a] > 1 && cut + marg[a][static_cast<std::size_t>(win.hi[a] - 1 - lo[a])] <= budget)
      cut += marg[a][static_cast<std::size_t>(--win.hi[a] - lo[a])];
  }

  DualSystem out;
  out.phi = phi;
  out.freq = freq;
  out.k0 = k0;
  out.rank_tol = opt.rank_tol;
  out.construction = k0 == rr ? DualConstruction::full_rank_inverse : DualConstruction::constant_rank_pseudoinverse;
  double kept = 0.0;
  for (auto& a : raw) {
    out.filters.emplace_back(phi.d(), a.data().reboxed(win));
    for (const auto& v : out.filters.back().data().data()) kept += std::norm(v);
  }
  out.discarded_energy = std::max(0.0, energy - kept) / energy;
  out.alias_energy = outer_half / energy;
  out.tail_mass = out.discarded_energy + out.alias_energy;
  if (out.tail_mass > opt.tail_cap)
    throw TailMassExceeded("dual filter tail mass " + std::to_string(out.tail_mass) + " exceeds cap " +
                           std::to_string(opt.tail_cap) + "; refine the frequency grid");

  // Residual at the nodes and at fixed off-grid probes.
  std::vector<std::vector<cplx>> sym;
  for (const auto& a : out.filters) sym.push_back(detail::symbol_at_nodes(a, freq));
  std::vector<double> res(static_cast<std::size_t>(nodes)), trace(static_cast<std::size_t>(nodes));
  parallel_for(nodes, [&](Index k) {
    Eigen::MatrixXcd A(rr, rr);
    for (std::size_t p = 0; p < r * r; ++p)
      A(static_cast<Index>(p) % rr, static_cast<Index>(p) / rr) = sym[p][static_cast<std::size_t>(k)];
    const Eigen::MatrixXcd F = G.fiber(k);
    res[static_cast<std::size_t>(k)] = detail::fiber_residual(F, A);
    trace[static_cast<std::size_t>(k)] = F.trace().real();
  });
  double worst = *std::max_element(res.begin(), res.end());
  const double scale = std::sqrt(std::max(1e-300, *std::max_element(trace.begin(), trace.end())));
  std::mt19937_64 rng(0x5eedu);
  std::uniform_real_distribution<double> ud(-kPi, kPi);
  for (int probe = 0; probe < 16; ++probe) {
    std::vector<double> xi(D);
    for (auto& x : xi) x = ud(rng);
    worst = std::max(worst, detail::fiber_residual(G.evaluate(xi), out.symbol(xi)));
  }
  out.residual = worst / scale;

  if (opt.materialize) {
    std::vector<SampledField> gens;
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < r; ++i) {
      SampledField acc = semi_convolve(phi[0], out.filters[i]);
      for (std::size_t ip = 1; ip < r; ++ip) acc = accumulate(acc, semi_convolve(phi[ip], out.filters[i + r * ip]));
      gens.push_back(std::move(acc));
      labels.push_back("dual_" + phi.labels()[i]);
    }
    out.psi = GeneratorSystem(std::move(gens), std::move(labels));
  }
  return out;
}

enum class ReconstructOrder { dual_analysis, dual_synthesis };

/// dual_analysis: sum <f, psi_i(.-j)> phi_i(.-j); dual_synthesis swaps the roles.
inline SampledField reconstruct(const SampledField& f, const GeneratorSystem& phi, const GeneratorSystem& psi,
                                const std::optional<IndexBox>& window = std::nullopt,
                                ReconstructOrder order = ReconstructOrder::dual_analysis) {
  if (phi.r() != psi.r()) throw ArityMismatch("phi and psi differ in r");
  if (order == ReconstructOrder::dual_analysis) return synthesize(phi, analyze(f, psi, window));
  return synthesize(psi, analyze(f, phi, window));
}

inline double relative_error(const SampledField& f, const SampledField& g, const MixedExponents& e) {
  const double nf = lpq_norm(f, e);
  const double diff = lpq_norm(accumulate(f, g, 1.0, -1.0), e);
  return nf > 0.0 ? diff / nf : diff;
}

/// sum_i ||analyze(f, phi)_i||_{l^{p,q}} / ||f||_{L^{p,q}}.
inline double frame_ratio(const SampledField& f, const GeneratorSystem& phi, const MixedExponents& e) {
  double s = 0.0;
  for (const auto& c : analyze(f, phi)) s += lpq_seq_norm(c, e);
  return s / lpq_norm(f, e);
}

/// Gaussian bump D(j) = exp(-|j|^2 / (2 w^2)) on |j|_inf <= ceil(6 w).
inline CoefficientArray low_frequency_bump(int d, double w) {
  const std::size_t D = static_cast<std::size_t>(d + 1);
  const Index R = static_cast<Index>(std::ceil(6.0 * w));
  CoefficientArray c(d, IndexBox::cube(D, R));
  for (Index t = 0; t < c.data().size(); ++t) {
    Multi j = c.data().multi(t);
    double r2 = 0.0;
    for (Index v : j) r2 += static_cast<double>(v * v);
    c.data().data()[static_cast<std::size_t>(t)] = std::exp(-r2 / (2.0 * w * w));
  }
  return c;
}

struct FrameBoundsOptions {
  Index taps = 50;
  bool low_frequency_sweep = false;  // trial t uses bumps of width 1.5^t instead of random taps
};

struct FrameBounds {
  double A_lo = 0.0;
  double B_hi = 0.0;
  std::vector<double> samples;
  double analytic_upper = 0.0;  // sum_i amalgam(phi_i, inf, inf)
  double analytic_lower = 0.0;  // 1 / max_i amalgam(psi_i, inf, inf) when a dual is known
};

inline FrameBounds frame_bounds_empirical(const GeneratorSystem& phi, const GeneratorSystem* psi,
                                          const MixedExponents& e, int trials, std::uint64_t seed,
                                          const FrameBoundsOptions& opt = {}) {
  if (trials < 1) throw BadParams("trials must be >= 1");
  FrameBounds out;
  for (const auto& g : phi.generators()) out.analytic_upper += amalgam_norm(g, {kInf, kInf});
  if (psi && psi->r() > 0) {
    double m = 0.0;
    for (const auto& g : psi->generators()) m = std::max(m, amalgam_norm(g, {kInf, kInf}));
    out.analytic_lower = 1.0 / m;
  }
  std::mt19937_64 rng(seed);
  for (int t = 0; t < trials; ++t) {
    std::vector<CoefficientArray> D;
    for (std::size_t i = 0; i < phi.r(); ++i)
      D.push_back(opt.low_frequency_sweep ? low_frequency_bump(phi.d(), std::pow(1.5, t))
                                          : random_taps(phi.d(), opt.taps, rng()));
    SampledField f = synthesize(phi, D);
    if (f.is_zero()) continue;
    out.samples.push_back(frame_ratio(f, phi, e));
  }
  if (out.samples.empty()) throw BadParams("every trial synthesized the zero field");
  out.A_lo = *std::min_element(out.samples.begin(), out.samples.end());
  out.B_hi = *std::max_element(out.samples.begin(), out.samples.end());
  return out;
}

inline FrameBounds frame_bounds_empirical(const GeneratorSystem& phi, const MixedExponents& e, int trials,
                                          std::uint64_t seed, const FrameBoundsOptions& opt = {}) {
  return frame_bounds_empirical(phi, nullptr, e, trials, seed, opt);
}

/// sum_i ||analyze(f, psi)_i||_{l^{p,q}}: an upper bound on the coefficient
/// infimum over all expansions of f in the translates of phi.
inline double coefficient_cost_upper(const SampledField& f, const GeneratorSystem& psi, const MixedExponents& e) {
  if (f.is_zero()) return 0.0;
  double s = 0.0;
  for (const auto& c : analyze(f, psi)) s += lpq_seq_norm(c, e);
  return s;
}

// ---------------------------------------------------------------------------
// Scaling-limit diagnostic

/// Modulation h(x, y) with x on R and y on R^d.
using ModulationFn = std::function<double(double x, const double* y, int d)>;

inline double gaussian_modulation(double x, const double* y, int d) {
  double r2 = x * x;
  for (int a = 0; a < d; ++a) r2 += y[a] * y[a];
  return std::exp(-r2);
}

struct ScalingOptions {
  ModulationFn h_fn = gaussian_modulation;
  double radius = 6.1;  // lattice window |j|_inf <= radius * 2^n; exp(-6.1^2) < 1e-16
  double eps1 = 0.5;
  double eps2 = 0.5;
  MixedExponents e{2.0, 2.0};
  int n_min = 2;
};

struct ScalingDiagnostic {
  std::vector<int> n;
  std::vector<double> values;  // v_n
  double eps1 = 0.5;
  double eps2 = 0.5;
  double s11_constant = 0.0;  // largest mixed-increment ratio seen on probe pairs
  bool coarsened = false;     // phi was constant on unit cells and evaluated at h = 1

  bool eventually_decreasing(int from) const {
    for (std::size_t k = 1; k < values.size(); ++k)
      if (n[k] > from && !(values[k] < values[k - 1])) return false;
    return true;
  }
};

/// Largest |h(x1,y1) - h(x2,y1) - h(x1,y2) + h(x2,y2)| divided by
/// |x1-x2||y1-y2|(1+min|x|)^{-1-eps1}(1+min|y|)^{-d-eps2} over seeded pairs.
inline double s11_constant(const ModulationFn& h, int d, double eps1, double eps2, int probes = 4000,
                           std::uint64_t seed = 17) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> wide(-8.0, 8.0), near(-0.1, 0.1);
  std::vector<double> y1(static_cast<std::size_t>(d)), y2(static_cast<std::size_t>(d));
  double worst = 0.0;
  for (int t = 0; t < probes; ++t) {
    const bool local = t % 2 == 1;
    const double x1 = wide(rng), x2 = x1 + (local ? near(rng) : wide(rng));
    double dy = 0.0, ny1 = 0.0, ny2 = 0.0;
    for (int a = 0; a < d; ++a) {
      y1[static_cast<std::size_t>(a)] = wide(rng);
      y2[static_cast<std::size_t>(a)] = y1[static_cast<std::size_t>(a)] + (local ? near(rng) : wide(rng));
      dy += std::pow(y1[static_cast<std::size_t>(a)] - y2[static_cast<std::size_t>(a)], 2);
      ny1 += y1[static_cast<std::size_t>(a)] * y1[static_cast<std::size_t>(a)];
      ny2 += y2[static_cast<std::size_t>(a)] * y2[static_cast<std::size_t>(a)];
    }
    const double rhs = std::abs(x1 - x2) * std::sqrt(dy) *
                       std::pow(1.0 + std::min(std::abs(x1), std::abs(x2)), -1.0 - eps1) *
                       std::pow(1.0 + std::sqrt(std::min(ny1, ny2)), -d - eps2);
    if (!(rhs > 0.0)) continue;
    const double lhs = std::abs(h(x1, y1.data(), d) - h(x2, y1.data(), d) - h(x1, y2.data(), d) + h(x2, y2.data(), d));
    worst = std::max(worst, lhs / rhs);
  }
  return worst;
}

namespace detail {

/// Checks that sum_j phi(. - j) vanishes on the unit cell.
inline void check_translate_sum(const SampledField& phi) {
  const Index n = phi.inv_h();
  const std::size_t D = phi.grid().dims();
  std::vector<cplx> per(static_cast<std::size_t>(ipow(n, static_cast<int>(D))), cplx(0.0));
  const BoxArray& a = phi.values();
  for (Index t = 0; t < a.size(); ++t) {
    Multi m = a.multi(t);
    Index idx = 0;
    for (std::size_t ax = 0; ax < D; ++ax) idx = idx * n + floor_mod(m[ax], n);
    per[static_cast<std::size_t>(idx)] += a.data()[static_cast<std::size_t>(t)];
  }
  double worst = 0.0;
  for (const auto& v : per) worst = std::max(worst, std::abs(v));
  if (worst > 1e-8 * std::max(1.0, a.max_abs()))
    throw PreconditionSumNonzero("translate sum reaches " + std::to_string(worst) + " on the unit cell");
}

/// The same function sampled at h = 1 when phi is constant on every unit cell.
inline std::optional<SampledField> coarsen(const SampledField& phi) {
  const Index n = phi.inv_h();
  if (n == 1) return std::nullopt;
  const BoxArray& a = phi.values();
  SampledField c(phi.d(), 1, phi.unit_box(), phi.decay());
  for (Index t = 0; t < a.size(); ++t) {
    Multi m = a.multi(t);
    for (auto& x : m) x = floor_div(x, n);
    const cplx v = a.data()[static_cast<std::size_t>(t)];
    Multi corner = m;
    for (auto& x : corner) x *= n;
    if (a(corner) != v) return std::nullopt;
    c.values()(m) = v;
  }
  return c;
}

}  // namespace detail

/// v_n = 2^{-n(d+1)} amalgam(sum_j h(2^{-n} j) phi(. - j)) for n = n_min..n_max.
/// The sum is streamed one x1 lattice row at a time.
inline ScalingDiagnostic scaling_limit_diagnostic(const SampledField& phi_in, int n_max, const ScalingOptions& opt = {}) {
  if (n_max < opt.n_min + 2) throw BadParams("need at least three scales");
  if (!(opt.eps1 > 0 && opt.eps1 < 1 && opt.eps2 > 0 && opt.eps2 < 1)) throw BadParams("eps1, eps2 must lie in (0,1)");
  opt.e.validate();
  detail::check_translate_sum(phi_in);

  ScalingDiagnostic out;
  out.eps1 = opt.eps1;
  out.eps2 = opt.eps2;
  out.s11_constant = s11_constant(opt.h_fn, phi_in.d(), opt.eps1, opt.eps2);
  auto coarse = detail::coarsen(phi_in);
  out.coarsened = coarse.has_value();
  const SampledField& phi = coarse ? *coarse : phi_in;

  const int d = phi.d();
  const std::size_t D = static_cast<std::size_t>(d + 1);
  const Index n = phi.inv_h();
  const IndexBox& U = phi.unit_box();
  const BoxArray& pv = phi.values();

  for (int s = opt.n_min; s <= n_max; ++s) {
    const double scale = std::ldexp(1.0, -s);
    const Index L = static_cast<Index>(std::ceil(opt.radius * std::ldexp(1.0, s)));
    const Index side = 2 * L + 1;
    const Index cube = ipow(side, d);

    // Slab: n sample rows in x1 by the full x2 extent of the modulated sum.
    Multi slo(D, 0), shi(D, n);
    for (std::size_t a = 1; a < D; ++a) {
      slo[a] = (-L + U.lo[a]) * n;
      shi[a] = (L + U.hi[a]) * n;
    }
    BoxArray slab{IndexBox(slo, shi)};
    const auto& st = slab.strides();

    // Lattice offsets of phi(. - (j1, j2)) in the slab, one per j2.
    std::vector<Index> j2off(static_cast<std::size_t>(cube));
    for (Index c = 0; c < cube; ++c) {
      Index rem = c, off = 0;
      for (std::size_t a = D; a-- > 1;) {
        off += (rem % side) * n * st[a];
        rem /= side;
      }
      j2off[static_cast<std::size_t>(c)] = off;
    }
    // Contiguous runs of each x1 cell row of phi, placed for j2 = (-L, ..., -L).
    struct Run {
      Index src, dst, len;
    };
    std::vector<std::vector<Run>> runs(static_cast<std::size_t>(U.extent(0)));
    for_each_row(pv.box(), [&](const Multi& m, Index len) {
      const Index c1 = floor_div(m[0], n);
      Index dst = (m[0] - c1 * n) * st[0];
      for (std::size_t a = 1; a < D; ++a) dst += (m[a] - U.lo[a] * n) * st[a];
      runs[static_cast<std::size_t>(c1 - U.lo[0])].push_back({static_cast<Index>(pv.offset(m)), dst, len});
    });

    std::map<Index, std::vector<double>> hrows;
    auto hrow = [&](Index j1) -> const std::vector<double>& {
      auto it = hrows.find(j1);
      if (it != hrows.end()) return it->second;
      std::vector<double> row(static_cast<std::size_t>(cube));
      std::vector<double> y(static_cast<std::size_t>(d));
      for (Index c = 0; c < cube; ++c) {
        Index rem = c;
        for (int a = d; a-- > 0;) {
          y[static_cast<std::size_t>(a)] = scale * static_cast<double>(rem % side - L);
          rem /= side;
        }
        row[static_cast<std::size_t>(c)] = opt.h_fn(scale * static_cast<double>(j1), y.data(), d);
      }
      return hrows.emplace(j1, std::move(row)).first->second;
    };

    std::vector<double> row_sum(static_cast<std::size_t>(n), 0.0);
    const cplx* src = pv.data().data();
    for (Index m1 = -L + U.lo[0]; m1 < L + U.hi[0]; ++m1) {
      while (!hrows.empty() && hrows.begin()->first < m1 - U.hi[0] + 1) hrows.erase(hrows.begin());
      std::fill(slab.data().begin(), slab.data().end(), cplx(0.0));
      cplx* dst = slab.data().data();
      for (Index c1 = U.lo[0]; c1 < U.hi[0]; ++c1) {
        const Index j1 = m1 - c1;
        if (j1 < -L || j1 > L) continue;
        const auto& row = hrow(j1);
        for (Index c = 0; c < cube; ++c) {
          const double w = row[static_cast<std::size_t>(c)];
          if (w == 0.0) continue;
          const Index off = j2off[static_cast<std::size_t>(c)];
          for (const Run& run : runs[static_cast<std::size_t>(c1 - U.lo[0])]) {
            cplx* o = dst + run.dst + off;
            const cplx* p = src + run.src;
            for (Index i = 0; i < run.len; ++i) o[i] += w * p[i];
          }
        }
      }
      detail::amalgam_rows(slab, n, d, opt.e.q, row_sum);
    }
    out.n.push_back(s);
    out.values.push_back(std::ldexp(1.0, -s * static_cast<int>(D)) * detail::amalgam_outer(row_sum, opt.e.p, phi.h()));
  }
  return out;
}

}  // namespace siframe
