#pragma once

#include <memory>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "siframe/fiberization.hpp"

namespace siframe {

/// Signals on Z_{rho N} x (Z_{rho M})^d, shifted by rho j for j in Z_N x (Z_M)^d.
/// d = 0 drops the second factor.
struct DiscreteModel {
  Index N = 8;
  Index M = 1;
  int d = 1;
  Index rho = 1;
  std::vector<std::vector<cplx>> generators;  // row-major over the sample group
  std::string label;

  std::size_t r() const { return generators.size(); }
  std::size_t dims() const { return static_cast<std::size_t>(d + 1); }
  Index period(std::size_t a) const { return a == 0 ? N : M; }
  std::vector<int> sample_shape() const {
    std::vector<int> s;
    for (std::size_t a = 0; a < dims(); ++a) s.push_back(static_cast<int>(rho * period(a)));
    return s;
  }
  Index sample_count() const { return rho * N * ipow(rho * M, d); }
  Index shift_count() const { return N * ipow(M, d); }
  Index fiber_size() const { return ipow(rho, static_cast<int>(dims())); }

  void validate() const {
    if (d < 0) throw BadParams("d must be >= 0");
    if (N < 1 || (d > 0 && M < 1) || rho < 1) throw BadParams("N, M and rho must be positive");
    if (generators.empty()) throw BadParams("model needs r >= 1");
    for (const auto& g : generators) {
      if (static_cast<Index>(g.size()) != sample_count())
        throw DimensionMismatch("generator has " + std::to_string(g.size()) + " samples, expected " +
                                std::to_string(sample_count()));
      if (std::all_of(g.begin(), g.end(), [](cplx v) { return v == cplx(0.0); }))
        throw BadParams("generator is identically zero");
    }
  }

  /// Flat sample index of x taken modulo the group.
  Index sample_index(const Multi& x) const {
    Index idx = 0;
    for (std::size_t a = 0; a < dims(); ++a) idx = idx * rho * period(a) + floor_mod(x[a], rho * period(a));
    return idx;
  }
  Multi sample_multi(Index flat) const {
    Multi x(dims());
    for (std::size_t a = dims(); a-- > 0;) {
      x[a] = flat % (rho * period(a));
      flat /= rho * period(a);
    }
    return x;
  }
  Multi shift_multi(Index flat) const {
    Multi j(dims());
    for (std::size_t a = dims(); a-- > 0;) {
      j[a] = flat % period(a);
      flat /= period(a);
    }
    return j;
  }
};

/// g(. - rho j) on the sample group.
inline std::vector<cplx> cyclic_shift(const DiscreteModel& m, const std::vector<cplx>& g, const Multi& j) {
  std::vector<cplx> out(g.size());
  for (Index x = 0; x < m.sample_count(); ++x) {
    Multi y = m.sample_multi(x);
    for (std::size_t a = 0; a < y.size(); ++a) y[a] -= m.rho * j[a];
    out[static_cast<std::size_t>(x)] = g[static_cast<std::size_t>(m.sample_index(y))];
  }
  return out;
}

/// Columns (i, j), index i * F + j, hold generator i shifted by rho j.
inline Eigen::MatrixXcd build_synthesis_matrix(const DiscreteModel& m) {
  m.validate();
  const Index S = m.sample_count(), F = m.shift_count();
  Eigen::MatrixXcd T(S, static_cast<Index>(m.r()) * F);
  for (std::size_t i = 0; i < m.r(); ++i)
    for (Index j = 0; j < F; ++j) {
      auto col = cyclic_shift(m, m.generators[i], m.shift_multi(j));
      T.col(static_cast<Index>(i) * F + j) = Eigen::Map<const Eigen::VectorXcd>(col.data(), S);
    }
  return T;
}

/// Per-frequency fiber matrices: fiber kappa is fiber_size x r with entries
/// g_i-hat(kappa + (N, M) a) / sqrt(rho^{1+d}). The synthesis matrix is unitarily
/// equivalent to their block diagonal.
struct DiscreteFibers {
  std::vector<Eigen::MatrixXcd> fibers;  // kappa row-major over Z_N x (Z_M)^d
};

inline DiscreteFibers discrete_fibers(const DiscreteModel& m) {
  m.validate();
  const Index F = m.shift_count(), P = m.fiber_size();
  const std::size_t D = m.dims();
  std::vector<std::vector<cplx>> hats;
  for (const auto& g : m.generators) {
    auto h = g;
    fft_inplace(h, m.sample_shape(), FftDirection::forward);
    hats.push_back(std::move(h));
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(P));
  DiscreteFibers out;
  out.fibers.assign(static_cast<std::size_t>(F), Eigen::MatrixXcd(P, static_cast<Index>(m.r())));
  for (Index k = 0; k < F; ++k) {
    Multi kappa = m.shift_multi(k);
    for (Index a = 0; a < P; ++a) {
      Multi w = kappa;
      Index rem = a;
      for (std::size_t ax = D; ax-- > 0;) {
        w[ax] += m.period(ax) * (rem % m.rho);
        rem /= m.rho;
      }
      const Index idx = m.sample_index(w);
      for (std::size_t i = 0; i < m.r(); ++i)
        out.fibers[static_cast<std::size_t>(k)](a, static_cast<Index>(i)) = hats[i][static_cast<std::size_t>(idx)] * scale;
    }
  }
  return out;
}

struct FiberSpectrum {
  std::vector<std::vector<double>> singular_values;  // per fiber, descending
  std::vector<Index> ranks;
  Index k0 = 0;
  Index k_max = 0;
  bool constancy = true;
  double sigma_max = 0.0;
};

/// Singular values of every fiber; rank counts sigma^2 > rank_tol * sigma_max^2.
inline FiberSpectrum exact_fiber_profile(const DiscreteModel& m, double rank_tol = 1e-8) {
  DiscreteFibers fb = discrete_fibers(m);
  FiberSpectrum out;
  out.singular_values.resize(fb.fibers.size());
  parallel_for(static_cast<Index>(fb.fibers.size()), [&](Index k) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(fb.fibers[static_cast<std::size_t>(k)]);
    const auto& s = svd.singularValues();
    out.singular_values[static_cast<std::size_t>(k)].assign(s.data(), s.data() + s.size());
  });
  for (const auto& s : out.singular_values)
    if (!s.empty()) out.sigma_max = std::max(out.sigma_max, s.front());
  const double thresh = rank_tol * out.sigma_max * out.sigma_max;
  out.k0 = std::numeric_limits<Index>::max();
  for (const auto& s : out.singular_values) {
    Index rank = 0;
    for (double v : s)
      if (v * v > thresh) ++rank;
    out.ranks.push_back(rank);
    out.k0 = std::min(out.k0, rank);
    out.k_max = std::max(out.k_max, rank);
  }
  out.constancy = out.k0 == out.k_max;
  return out;
}

struct VerdictFlags {
  bool frame_22 = false;
  bool rank_constant = false;
  bool band_ok = false;
  bool dual_exists = false;
  bool min_norm_consistent = false;

  Index K = 0;  // shift_count * k_max
  double lambda_1 = 0.0;
  double lambda_K = 0.0;
  double B = kInf;
  double dual_residual = kInf;
  double min_norm_worst = kInf;  // largest violation ratio of the two-sided bound; <= 1 passes
  double condition = kInf;       // max over fibers of lambda_max / lambda_{k_max}

  bool agree() const {
    return frame_22 == rank_constant && rank_constant == band_ok && band_ok == dual_exists &&
           dual_exists == min_norm_consistent;
  }
  bool all_true() const { return agree() && frame_22; }
};

namespace detail {

/// Gram matrices of the synthesis matrix from direct lag sums on the sample group.
struct SynthesisGram {
  const DiscreteModel& m;
  const Eigen::MatrixXcd& T;

  /// T^H T: (i,j),(i',j') entry is sum_y conj(g_i(y)) g_i'(y - rho (j' - j)).
  Eigen::MatrixXcd column_gram() const {
    const Index F = m.shift_count(), r = static_cast<Index>(m.r());
    std::vector<Eigen::VectorXcd> lag(static_cast<std::size_t>(r * r), Eigen::VectorXcd(F));
    for (Index i = 0; i < r; ++i)
      for (Index ip = 0; ip < r; ++ip)
        for (Index dj = 0; dj < F; ++dj)
          lag[static_cast<std::size_t>(i + r * ip)](dj) = T.col(i * F).dot(T.col(ip * F + dj));
    Eigen::MatrixXcd G(r * F, r * F);
    const std::size_t D = m.dims();
    for (Index j = 0; j < F; ++j) {
      Multi a = m.shift_multi(j);
      for (Index jp = 0; jp < F; ++jp) {
        Multi b = m.shift_multi(jp);
        Index idx = 0;
        for (std::size_t ax = 0; ax < D; ++ax) idx = idx * m.period(ax) + floor_mod(b[ax] - a[ax], m.period(ax));
        for (Index i = 0; i < r; ++i)
          for (Index ip = 0; ip < r; ++ip) G(i * F + j, ip * F + jp) = lag[static_cast<std::size_t>(i + r * ip)](idx);
      }
    }
    return G;
  }

  /// T T^H: rows x0 + rho t reuse the phase rows x0 shifted by rho t.
  Eigen::MatrixXcd row_gram() const {
    const Index S = m.sample_count();
    const std::size_t D = m.dims();
    Eigen::MatrixXcd G(S, S);
    std::vector<Index> phase_rows;
    for (Index x = 0; x < S; ++x) {
      Multi v = m.sample_multi(x);
      bool phase = true;
      for (Index c : v)
        if (c >= m.rho) phase = false;
      if (phase) phase_rows.push_back(x);
    }
    for (Index x0 : phase_rows) {
      const Eigen::RowVectorXcd row = T.row(x0) * T.adjoint();
      const Multi v0 = m.sample_multi(x0);
      for (Index t = 0; t < m.shift_count(); ++t) {
        Multi sh = m.shift_multi(t);
        Multi xv = v0;
        for (std::size_t a = 0; a < D; ++a) xv[a] += m.rho * sh[a];
        const Index x = m.sample_index(xv);
        for (Index y = 0; y < S; ++y) {
          Multi yv = m.sample_multi(y);
          for (std::size_t a = 0; a < D; ++a) yv[a] -= m.rho * sh[a];
          G(x, y) = row(m.sample_index(yv));
        }
      }
    }
    return G;
  }
};

}  // namespace detail

/// Minimal-norm dual model: fibers F G^+ with G^+ inverted on the top k_max
/// eigenvalues. Empty when some inverted eigenvalue falls below rank_tol * lambda_max.
inline std::optional<DiscreteModel> discrete_dual(const DiscreteModel& m, Index k_max, double rank_tol = 1e-8) {
  DiscreteFibers fb = discrete_fibers(m);
  const Index r = static_cast<Index>(m.r()), P = m.fiber_size();
  const std::size_t D = m.dims();
  std::vector<Eigen::MatrixXcd> dual(fb.fibers.size());
  std::vector<double> lmin(fb.fibers.size()), lmax(fb.fibers.size());
  parallel_for(static_cast<Index>(fb.fibers.size()), [&](Index k) {
    const Eigen::MatrixXcd& Fk = fb.fibers[static_cast<std::size_t>(k)];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Fk.adjoint() * Fk);
    Eigen::MatrixXcd Gp = Eigen::MatrixXcd::Zero(r, r);
    for (Index q = r - k_max; q < r; ++q)
      Gp += es.eigenvectors().col(q) * es.eigenvectors().col(q).adjoint() / es.eigenvalues()(q);
    dual[static_cast<std::size_t>(k)] = Fk * Gp;
    lmin[static_cast<std::size_t>(k)] = k_max > 0 ? es.eigenvalues()(r - k_max) : kInf;
    lmax[static_cast<std::size_t>(k)] = es.eigenvalues()(r - 1);
  });
  const double top = *std::max_element(lmax.begin(), lmax.end());
  if (k_max < 1 || *std::min_element(lmin.begin(), lmin.end()) <= rank_tol * top) return std::nullopt;

  DiscreteModel out = m;
  out.label = m.label + "_dual";
  const double scale = std::sqrt(static_cast<double>(P));
  for (Index i = 0; i < r; ++i) {
    std::vector<cplx> hat(static_cast<std::size_t>(m.sample_count()));
    for (Index k = 0; k < m.shift_count(); ++k) {
      Multi kappa = m.shift_multi(k);
      for (Index a = 0; a < P; ++a) {
        Multi w = kappa;
        Index rem = a;
        for (std::size_t ax = D; ax-- > 0;) {
          w[ax] += m.period(ax) * (rem % m.rho);
          rem /= m.rho;
        }
        hat[static_cast<std::size_t>(m.sample_index(w))] = scale * dual[static_cast<std::size_t>(k)](a, i);
      }
    }
    fft_inplace(hat, m.sample_shape(), FftDirection::backward);
    for (auto& v : hat) v /= static_cast<double>(m.sample_count());
    out.generators[static_cast<std::size_t>(i)] = std::move(hat);
  }
  return out;
}

/// Evaluates the five frame-verdict flags; probe vectors come from `seed`.
inline VerdictFlags verdict_equivalence(const DiscreteModel& m, double rank_tol = 1e-8, std::uint64_t seed = 1,
                                        int probes = 8) {
  m.validate();
  VerdictFlags v;
  const FiberSpectrum prof = exact_fiber_profile(m, rank_tol);
  v.rank_constant = prof.constancy;
  const Index F = m.shift_count(), S = m.sample_count(), cols = static_cast<Index>(m.r()) * F;
  v.K = F * prof.k_max;

  // Band: eigenvalues of every fiber bracket F^H F.
  {
    DiscreteFibers fb = discrete_fibers(m);
    std::vector<double> kth(fb.fibers.size()), top(fb.fibers.size());
    const Index r = static_cast<Index>(m.r());
    parallel_for(static_cast<Index>(fb.fibers.size()), [&](Index k) {
      const Eigen::MatrixXcd& Fk = fb.fibers[static_cast<std::size_t>(k)];
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Fk.adjoint() * Fk, Eigen::EigenvaluesOnly);
      top[static_cast<std::size_t>(k)] = es.eigenvalues()(r - 1);
      kth[static_cast<std::size_t>(k)] = prof.k_max > 0 ? es.eigenvalues()(r - prof.k_max) : 0.0;
    });
    const double lmax = *std::max_element(top.begin(), top.end());
    const double lmin = *std::min_element(kth.begin(), kth.end());
    v.band_ok = prof.k_max > 0 && lmin > rank_tol * lmax;
    v.condition = lmin > 0.0 ? lmax / lmin : kInf;
  }
  // Round-off in the dual and the min-norm solve grows with the fiber condition number.
  const double residual_tol = 1e-10 + 1e3 * std::numeric_limits<double>::epsilon() * std::min(v.condition, 1e12);

  // Frame bounds of the synthesis matrix by brute force.
  const Eigen::MatrixXcd T = build_synthesis_matrix(m);
  detail::SynthesisGram gram{m, T};
  const bool use_cols = cols <= S;
  Eigen::MatrixXcd G = use_cols ? gram.column_gram() : gram.row_gram();
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G, Eigen::EigenvaluesOnly);
    const Index n = G.rows();
    v.lambda_1 = es.eigenvalues()(n - 1);
    v.lambda_K = (v.K >= 1 && v.K <= n) ? es.eigenvalues()(n - v.K) : 0.0;
  }
  v.frame_22 = v.K >= 1 && v.lambda_K > rank_tol * v.lambda_1;
  if (v.frame_22) v.B = std::max(std::sqrt(v.lambda_1), 1.0 / std::sqrt(v.lambda_K));

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
  auto random_coeffs = [&]() {
    Eigen::VectorXcd c(cols);
    for (Index t = 0; t < cols; ++t) c(t) = cplx(nd(rng), nd(rng));
    return c;
  };

  // Dual reconstruction on random range elements, both orders.
  if (auto dual = discrete_dual(m, prof.k_max, rank_tol)) {
    const Eigen::MatrixXcd U = build_synthesis_matrix(*dual);
    double worst = 0.0;
    for (int p = 0; p < probes; ++p) {
      const Eigen::VectorXcd x = T * random_coeffs();
      const double nx = x.norm();
      worst = std::max(worst, (T * (U.adjoint() * x) - x).norm() / nx);
      worst = std::max(worst, (U * (T.adjoint() * x) - x).norm() / nx);
    }
    v.dual_residual = worst;
    v.dual_exists = worst <= residual_tol;
  }

  // Minimum-norm coefficients of range elements against the two-sided bound.
  if (v.frame_22) {
    std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)> min_norm;
    if (v.K == cols) {
      auto llt = std::make_shared<Eigen::LLT<Eigen::MatrixXcd>>(use_cols ? G : gram.column_gram());
      min_norm = [llt, &T](const Eigen::VectorXcd& x) -> Eigen::VectorXcd { return llt->solve(T.adjoint() * x); };
    } else if (v.K == S) {
      auto llt = std::make_shared<Eigen::LLT<Eigen::MatrixXcd>>(use_cols ? gram.row_gram() : G);
      min_norm = [llt, &T](const Eigen::VectorXcd& x) -> Eigen::VectorXcd { return T.adjoint() * llt->solve(x); };
    } else {
      // Rank below both dimensions: pseudo-inverse of the smaller Gram on its top K eigenpairs.
      auto es = std::make_shared<Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>>(G);
      const Index K = v.K;
      min_norm = [es, K, use_cols, &T](const Eigen::VectorXcd& x) -> Eigen::VectorXcd {
        const auto V = es->eigenvectors().rightCols(K);
        const Eigen::VectorXcd inv = es->eigenvalues().tail(K).cwiseInverse().cast<cplx>();
        if (use_cols) return V * (inv.asDiagonal() * (V.adjoint() * (T.adjoint() * x)));
        return T.adjoint() * (V * (inv.asDiagonal() * (V.adjoint() * x)));
      };
    }
    double worst = 0.0;
    bool ok = true;
    for (int p = 0; p < probes; ++p) {
      const Eigen::VectorXcd c = random_coeffs();
      const Eigen::VectorXcd x = T * c;
      const Eigen::VectorXcd cs = min_norm(x);
      const double nx = x.norm(), nc = cs.norm();
      if ((T * cs - x).norm() > residual_tol * nx) ok = false;
      if (nc > c.norm() * (1 + residual_tol)) ok = false;
      worst = std::max({worst, (nx / v.B) / nc, nc / (v.B * nx)});
    }
    v.min_norm_worst = worst;
    v.min_norm_consistent = ok && worst <= 1.0 + residual_tol;
  }
  return v;
}

// ---------------------------------------------------------------------------
// Model builders

/// Single unit impulse at the origin: T is the identity.
inline DiscreteModel delta_model(Index N, Index M, int d, Index rho) {
  DiscreteModel m;
  m.N = N;
  m.M = M;
  m.d = d;
  m.rho = rho;
  m.label = "delta";
  std::vector<cplx> g(static_cast<std::size_t>(m.sample_count()), 0.0);
  g[0] = 1.0;
  m.generators = {g};
  m.validate();
  return m;
}

inline DiscreteModel random_model(Index N, Index M, int d, Index rho, std::size_t r, std::uint64_t seed) {
  DiscreteModel m;
  m.N = N;
  m.M = M;
  m.d = d;
  m.rho = rho;
  m.label = "random_r" + std::to_string(r) + "_s" + std::to_string(seed);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
  for (std::size_t i = 0; i < r; ++i) {
    std::vector<cplx> g(static_cast<std::size_t>(m.sample_count()));
    for (auto& v : g) v = cplx(nd(rng), nd(rng));
    m.generators.push_back(std::move(g));
  }
  m.validate();
  return m;
}

namespace detail {

/// Indicator of [0, rho)^{1+d} on the sample group.
inline std::vector<cplx> unit_block(const DiscreteModel& m) {
  std::vector<cplx> b(static_cast<std::size_t>(m.sample_count()), 0.0);
  for (Index x = 0; x < m.sample_count(); ++x) {
    Multi v = m.sample_multi(x);
    if (std::all_of(v.begin(), v.end(), [&](Index c) { return c < m.rho; })) b[static_cast<std::size_t>(x)] = 1.0;
  }
  return b;
}

inline Multi unit(std::size_t dims, std::size_t axis) {
  Multi e(dims, 0);
  e[axis] = 1;
  return e;
}

inline std::vector<cplx> axpy(std::vector<cplx> a, cplx s, const std::vector<cplx>& b) {
  for (std::size_t t = 0; t < a.size(); ++t) a[t] += s * b[t];
  return a;
}

}  // namespace detail

/// Curated systems: two that fail every verdict and three that pass it.
inline std::vector<DiscreteModel> adversarial_models(Index N, Index M, int d, Index rho, std::uint64_t seed) {
  std::vector<DiscreteModel> out;
  DiscreteModel base;
  base.N = N;
  base.M = M;
  base.d = d;
  base.rho = rho;
  const std::size_t D = base.dims();
  const auto b = detail::unit_block(base);

  {  // 2b - b(. - rho e1) - b(. - rho e_last): loses rank at the zero frequency only
    DiscreteModel m = base;
    m.label = "diff-filter";
    auto g = detail::axpy(std::vector<cplx>(b.size(), 0.0), 2.0, b);
    g = detail::axpy(g, -1.0, cyclic_shift(m, b, detail::unit(D, 0)));
    g = detail::axpy(g, -1.0, cyclic_shift(m, b, detail::unit(D, D - 1)));
    m.generators = {g};
    out.push_back(m);
  }
  const DiscreteModel r1 = random_model(N, M, d, rho, 1, seed);
  {
    DiscreteModel m = base;
    m.label = "shifted-pair";
    m.generators = {r1.generators[0], cyclic_shift(m, r1.generators[0], detail::unit(D, 0))};
    out.push_back(m);
  }
  {
    // delta_0 and delta_{rho e1} + eps delta_{e1}: every fiber has condition number of order 1/eps.
    // With rho = 1 the off-lattice sample does not exist, so a random perturbation stands in.
    DiscreteModel m = base;
    m.label = "near-deficient";
    std::vector<cplx> d0(static_cast<std::size_t>(m.sample_count()), 0.0);
    d0[0] = 1.0;
    std::vector<cplx> pert = rho >= 2 ? d0 : random_model(N, M, d, rho, 1, seed + 1).generators[0];
    if (rho >= 2) {
      pert.assign(pert.size(), 0.0);
      Multi x(D, 0);
      x[0] = 1;
      pert[static_cast<std::size_t>(m.sample_index(x))] = 1.0;
    }
    m.generators = {d0, detail::axpy(cyclic_shift(m, d0, detail::unit(D, 0)), 1e-3, pert)};
    out.push_back(m);
  }
  {
    DiscreteModel m = random_model(N, M, d, rho, static_cast<std::size_t>(base.fiber_size() + 1), seed + 2);
    m.label = "overcomplete";
    out.push_back(m);
  }
  {  // b + b(. - rho e1): vanishes on the fibers with kappa_1 = N / 2
    DiscreteModel m = base;
    m.label = "nyquist-null";
    m.generators = {detail::axpy(b, 1.0, cyclic_shift(m, b, detail::unit(D, 0)))};
    out.push_back(m);
  }
  for (auto& m : out) m.validate();
  return out;
}

/// Samples of a continuum system on the torus Z_{rho N} x (Z_{rho M})^d with
/// rho = 1/h, scaled by h^{(1+d)/2} so lattice inner products match.
inline DiscreteModel sample_system(const GeneratorSystem& phi, Index N, Index M) {
  DiscreteModel m;
  m.N = N;
  m.M = M;
  m.d = phi.d();
  m.rho = phi.inv_h();
  m.label = "sampled";
  const double scale = std::pow(phi[0].h(), 0.5 * static_cast<double>(m.dims()));
  for (const auto& g : phi.generators()) {
    for (std::size_t a = 0; a < m.dims(); ++a)
      if (g.unit_box().extent(a) >= m.period(a)) throw BadParams("generator support does not fit the torus");
    std::vector<cplx> v(static_cast<std::size_t>(m.sample_count()), 0.0);
    const BoxArray& s = g.values();
    for (Index t = 0; t < s.size(); ++t)
      v[static_cast<std::size_t>(m.sample_index(s.multi(t)))] += scale * s.data()[static_cast<std::size_t>(t)];
    m.generators.push_back(std::move(v));
  }
  m.validate();
  return m;
}

struct CrossCheck {
  double max_abs_diff = 0.0;
  double lambda_max = 0.0;
  Index fibers = 0;
};

/// Bracket eigenvalues from fiberization against squared discrete fiber
/// singular values; fiber kappa matches node k = kappa + N/2 (mod N) per axis.
inline CrossCheck cross_check(const GeneratorSystem& phi, Index N, Index M, double rank_tol = 1e-8) {
  if (N % 2 || M % 2) throw BadParams("cross-check needs even N and M");
  DiscreteModel m = sample_system(phi, N, M);
  FiberSpectrum disc = exact_fiber_profile(m, rank_tol);
  FrequencyGrid freq;
  freq.d = phi.d();
  freq.n1 = N;
  freq.n2 = M;
  freq.J = static_cast<Index>(max_support_width(phi)) + 1;
  SpectralProfile cont = spectral_profile(bracket(phi, phi, freq), rank_tol);
  CrossCheck out;
  out.lambda_max = cont.lambda_max;
  const std::size_t D = m.dims();
  const Index r = static_cast<Index>(phi.r());
  for (Index node = 0; node < freq.node_count(); ++node) {
    Multi k = freq.node_multi(node), kappa(D);
    for (std::size_t a = 0; a < D; ++a) kappa[a] = floor_mod(k[a] + freq.extent(a) / 2, freq.extent(a));
    Index kflat = 0;
    for (std::size_t a = 0; a < D; ++a) kflat = kflat * m.period(a) + kappa[a];
    const auto& sv = disc.singular_values[static_cast<std::size_t>(kflat)];
    for (Index i = 0; i < r; ++i) {
      const double ds = i < static_cast<Index>(sv.size()) ? sv[static_cast<std::size_t>(i)] : 0.0;
      out.max_abs_diff = std::max(out.max_abs_diff, std::abs(ds * ds - cont.eigenvalue(node, i)));
    }
    ++out.fibers;
  }
  return out;
}

}  // namespace siframe
