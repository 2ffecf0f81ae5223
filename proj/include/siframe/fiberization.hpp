#pragma once

#include <Eigen/Dense>

#include "siframe/fourier.hpp"
#include "siframe/lattice_ops.hpp"

namespace siframe {

/// Fiber nodes xi_k = -pi + 2 pi k / n on each axis; n1 along x1, n2 per
/// axis along x2. J is the lag radius of the bracket sum and the periodization
/// radius of fourier_fibers.
struct FrequencyGrid {
  int d = 1;
  Index n1 = 64;
  Index n2 = 64;
  Index J = 16;

  void validate() const {
    if (d < 1) throw BadParams("frequency grid needs d >= 1");
    if (n1 < 2 || n2 < 2) throw BadParams("fiber counts must be >= 2");
    if (J < 1) throw BadParams("J must be >= 1");
  }
  std::size_t dims() const { return static_cast<std::size_t>(d + 1); }
  Index extent(std::size_t a) const { return a == 0 ? n1 : n2; }
  Index node_count() const { return n1 * ipow(n2, d); }
  std::vector<int> shape() const {
    std::vector<int> s(dims(), static_cast<int>(n2));
    s[0] = static_cast<int>(n1);
    return s;
  }
  static double node(Index k, Index n) { return -kPi + 2.0 * kPi * static_cast<double>(k) / static_cast<double>(n); }
  Multi node_multi(Index flat) const {
    Multi k(dims());
    for (std::size_t a = dims(); a-- > 0;) {
      k[a] = flat % extent(a);
      flat /= extent(a);
    }
    return k;
  }
  Index node_flat(const Multi& k) const {
    Index f = 0;
    for (std::size_t a = 0; a < dims(); ++a) f = f * extent(a) + k[a];
    return f;
  }
  std::vector<double> xi(Index flat) const {
    Multi k = node_multi(flat);
    std::vector<double> x(dims());
    for (std::size_t a = 0; a < dims(); ++a) x[a] = node(k[a], extent(a));
    return x;
  }
};

namespace detail {

inline double sinc(double t) {
  if (std::abs(t) < 1e-4) return 1.0 - t * t / 6.0;
  return std::sin(t) / t;
}

/// Transform of the cellwise-constant field on a tensor product of
/// per-axis frequency lists; row-major result.
inline std::vector<cplx> fourier_tensor(const SampledField& f, const std::vector<std::vector<double>>& freqs) {
  const std::size_t D = f.grid().dims();
  if (freqs.size() != D) throw DimensionMismatch("frequency rank must be 1+d");
  const BoxArray& a = f.values();
  std::vector<Index> shape(D);
  for (std::size_t k = 0; k < D; ++k) shape[k] = a.box().extent(k);
  std::vector<cplx> cur = a.data();
  if (cur.empty()) {
    Index total = 1;
    for (const auto& w : freqs) total *= static_cast<Index>(w.size());
    return std::vector<cplx>(static_cast<std::size_t>(total), cplx(0.0));
  }
  const double h = f.h();
  for (std::size_t ax = D; ax-- > 0;) {
    const Index W = static_cast<Index>(freqs[ax].size());
    const Index S = shape[ax];
    Index outer = 1, inner = 1;
    for (std::size_t k = 0; k < ax; ++k) outer *= shape[k];
    for (std::size_t k = ax + 1; k < D; ++k) inner *= shape[k];
    std::vector<cplx> E(static_cast<std::size_t>(W * S));
    for (Index w = 0; w < W; ++w) {
      const double om = freqs[ax][static_cast<std::size_t>(w)];
      const double amp = h * sinc(0.5 * om * h);
      for (Index s = 0; s < S; ++s) {
        const double x = f.grid().coord(a.box().lo[ax] + s);
        E[static_cast<std::size_t>(w * S + s)] = std::polar(amp, -om * x);
      }
    }
    std::vector<cplx> next(static_cast<std::size_t>(outer * W * inner), cplx(0.0));
    parallel_for(outer * W, [&](Index ow) {
      const Index o = ow / W, w = ow % W;
      cplx* dst = next.data() + ow * inner;
      for (Index s = 0; s < S; ++s) {
        const cplx e = E[static_cast<std::size_t>(w * S + s)];
        const cplx* src = cur.data() + (o * S + s) * inner;
        for (Index i = 0; i < inner; ++i) dst[i] += e * src[i];
      }
    });
    shape[ax] = W;
    cur.swap(next);
  }
  return cur;
}

}  // namespace detail

/// Fourier transform of the cellwise-constant field at one frequency.
inline cplx fourier_transform(const SampledField& f, const std::vector<double>& omega) {
  std::vector<std::vector<double>> freqs;
  for (double w : omega) freqs.push_back({w});
  return detail::fourier_tensor(f, freqs).at(0);
}

/// Values of phi-hat(xi + 2 pi k) for every node and every |k|_inf <= J.
struct FourierFibers {
  FrequencyGrid freq;
  Index per_node = 0;  // (2J+1)^{1+d}, k ordered row-major from (-J,...,-J)
  std::vector<cplx> values;

  cplx at(Index node, Index k) const { return values[static_cast<std::size_t>(node * per_node + k)]; }
};

inline FourierFibers fourier_fibers(const SampledField& phi, const FrequencyGrid& freq) {
  freq.validate();
  if (phi.d() != freq.d) throw DimensionMismatch("field and frequency grid differ in d");
  const std::size_t D = freq.dims();
  const Index K = 2 * freq.J + 1;
  std::vector<std::vector<double>> freqs(D);
  for (std::size_t a = 0; a < D; ++a)
    for (Index k = 0; k < freq.extent(a); ++k)
      for (Index m = -freq.J; m <= freq.J; ++m)
        freqs[a].push_back(FrequencyGrid::node(k, freq.extent(a)) + 2.0 * kPi * static_cast<double>(m));
  std::vector<cplx> t = detail::fourier_tensor(phi, freqs);
  FourierFibers out;
  out.freq = freq;
  out.per_node = ipow(K, static_cast<int>(D));
  out.values.resize(t.size());
  std::vector<Index> W(D);
  for (std::size_t a = 0; a < D; ++a) W[a] = freq.extent(a) * K;
  for (std::size_t flat = 0; flat < t.size(); ++flat) {
    Index rem = static_cast<Index>(flat), node = 0, kk = 0;
    Multi idx(D);
    for (std::size_t a = D; a-- > 0;) {
      idx[a] = rem % W[a];
      rem /= W[a];
    }
    for (std::size_t a = 0; a < D; ++a) {
      node = node * freq.extent(a) + idx[a] / K;
      kk = kk * K + idx[a] % K;
    }
    out.values[static_cast<std::size_t>(node * out.per_node + kk)] = t[flat];
  }
  return out;
}

/// Bracket matrices [Phi^, Psi^] at every node, plus the lag Gram they come from.
struct GramianField {
  FrequencyGrid freq;
  std::size_t r = 0;
  std::size_t s = 0;
  std::vector<cplx> fibers;            // node-major, each r x s column-major
  std::vector<CoefficientArray> lags;  // <phi_i, psi_i'(. - j)>, index i + r * i'
  double tail_bound = 0.0;             // bound on |truncation error| per entry

  Eigen::Map<const Eigen::MatrixXcd> fiber(Index node) const {
    return Eigen::Map<const Eigen::MatrixXcd>(fibers.data() + node * static_cast<Index>(r * s),
                                              static_cast<Index>(r), static_cast<Index>(s));
  }
  Index node_count() const { return freq.node_count(); }

  /// Bracket at an arbitrary frequency from the lags with |j|_inf <= J.
  Eigen::MatrixXcd evaluate(const std::vector<double>& xi) const {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Index>(r), static_cast<Index>(s));
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t ip = 0; ip < s; ++ip) {
        const BoxArray& g = lags[i + r * ip].data();
        for (Index t = 0; t < g.size(); ++t) {
          const cplx v = g.data()[static_cast<std::size_t>(t)];
          if (v == cplx(0.0)) continue;
          Multi j = g.multi(t);
          double phase = 0.0;
          bool inside = true;
          for (std::size_t a = 0; a < j.size(); ++a) {
            if (std::abs(j[a]) > freq.J) inside = false;
            phase += xi[a] * static_cast<double>(j[a]);
          }
          if (inside) m(static_cast<Index>(i), static_cast<Index>(ip)) += v * std::polar(1.0, -phase);
        }
      }
    return m;
  }
};

inline double max_support_width(const GeneratorSystem& phi) {
  Index w = 1;
  for (const auto& g : phi.generators())
    for (std::size_t a = 0; a < g.unit_box().dims(); ++a) w = std::max(w, g.unit_box().extent(a));
  return static_cast<double>(w);
}

/// Grid with J = widest support + 16.
inline FrequencyGrid default_frequency_grid(const GeneratorSystem& phi, Index n1 = 64, Index n2 = 64) {
  FrequencyGrid f;
  f.d = phi.d();
  f.n1 = n1;
  f.n2 = n2;
  f.J = static_cast<Index>(max_support_width(phi)) + 16;
  return f;
}

inline GramianField bracket(const GeneratorSystem& phi, const GeneratorSystem& psi, const FrequencyGrid& freq) {
  freq.validate();
  if (phi.d() != psi.d() || phi.d() != freq.d) throw DimensionMismatch("bracket inputs differ in d");
  if (phi.inv_h() != psi.inv_h()) throw DimensionMismatch("bracket inputs differ in grid step");
  GramianField G;
  G.freq = freq;
  G.r = phi.r();
  G.s = psi.r();
  const std::size_t D = freq.dims();
  const Index nodes = freq.node_count();
  G.fibers.assign(static_cast<std::size_t>(nodes) * G.r * G.s, cplx(0.0));
  double lag_tail = 0.0, decay_tail = 0.0;
  const MixedExponents e22(2.0, 2.0);
  for (std::size_t ip = 0; ip < G.s; ++ip)
    for (std::size_t i = 0; i < G.r; ++i) {
      const SampledField& f = phi[i];
      const SampledField& g = psi[ip];
      CoefficientArray lag = analyze_one(f, g);
      std::vector<cplx> fold(static_cast<std::size_t>(nodes), cplx(0.0));
      double tail = 0.0;
      for (Index t = 0; t < lag.data().size(); ++t) {
        const cplx v = lag.data().data()[static_cast<std::size_t>(t)];
        if (v == cplx(0.0)) continue;
        Multi j = lag.data().multi(t);
        bool inside = true;
        Index parity = 0, idx = 0;
        for (std::size_t a = 0; a < D; ++a) {
          if (std::abs(j[a]) > freq.J) inside = false;
          parity += j[a];
          idx = idx * freq.extent(a) + floor_mod(j[a], freq.extent(a));
        }
        if (!inside) {
          tail += std::abs(v);
          continue;
        }
        fold[static_cast<std::size_t>(idx)] += (floor_mod(parity, 2) ? -v : v);
      }
      fft_inplace(fold, freq.shape(), FftDirection::forward);
      for (Index k = 0; k < nodes; ++k)
        G.fibers[static_cast<std::size_t>(k) * G.r * G.s + i + G.r * ip] = fold[static_cast<std::size_t>(k)];
      lag_tail = std::max(lag_tail, tail);
      const double tf = f.decay().tail_mass, tg = g.decay().tail_mass;
      if (tf > 0.0 || tg > 0.0)
        decay_tail = std::max(decay_tail, tf * amalgam_norm(g, e22) + tg * amalgam_norm(f, e22) + tf * tg);
      G.lags.push_back(std::move(lag));
    }
  // lags were pushed with i fastest, matching index i + r * i'
  G.tail_bound = lag_tail + decay_tail;
  return G;
}

struct SpectralProfile {
  FrequencyGrid freq;
  std::size_t r = 0;
  double rank_tol = 1e-8;
  std::vector<double> eigenvalues;  // node-major, descending within a node
  std::vector<Index> k_per_fiber;
  Index k0 = 0;
  Index k_max = 0;
  double C_est = 1.0;
  bool constancy = true;
  double lambda_max = 0.0;
  double min_eigenvalue = 0.0;
  double max_asymmetry = 0.0;  // relative to the largest fiber norm

  double eigenvalue(Index node, std::size_t i) const { return eigenvalues[static_cast<std::size_t>(node) * r + i]; }
};

inline SpectralProfile spectral_profile(const GramianField& G, double rank_tol = 1e-8) {
  if (G.r != G.s) throw DimensionMismatch("spectral profile needs a square bracket");
  const Index nodes = G.node_count();
  const Index r = static_cast<Index>(G.r);
  SpectralProfile S;
  S.freq = G.freq;
  S.r = G.r;
  S.rank_tol = rank_tol;
  S.eigenvalues.assign(static_cast<std::size_t>(nodes * r), 0.0);
  double gmax = 0.0, asym = 0.0;
  for (Index k = 0; k < nodes; ++k) {
    auto F = G.fiber(k);
    gmax = std::max(gmax, F.norm());
    asym = std::max(asym, (F - F.adjoint()).norm());
  }
  S.max_asymmetry = gmax > 0.0 ? asym / gmax : 0.0;
  if (asym > 1e-8 * gmax)
    throw NonHermitianFiber("fiber asymmetry " + std::to_string(S.max_asymmetry) + " exceeds 1e-8");
  parallel_for(nodes, [&](Index k) {
    Eigen::MatrixXcd F = G.fiber(k);
    Eigen::MatrixXcd H = 0.5 * (F + F.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H, Eigen::EigenvaluesOnly);
    for (Index i = 0; i < r; ++i) S.eigenvalues[static_cast<std::size_t>(k * r + i)] = es.eigenvalues()(r - 1 - i);
  });
  S.lambda_max = 0.0;
  S.min_eigenvalue = kInf;
  for (double v : S.eigenvalues) {
    S.lambda_max = std::max(S.lambda_max, v);
    S.min_eigenvalue = std::min(S.min_eigenvalue, v);
  }
  const double thr = rank_tol * S.lambda_max;
  S.k_per_fiber.assign(static_cast<std::size_t>(nodes), 0);
  S.k0 = r;
  S.k_max = 0;
  S.C_est = 1.0;
  for (Index k = 0; k < nodes; ++k) {
    Index rank = 0;
    for (Index i = 0; i < r; ++i) {
      const double v = S.eigenvalues[static_cast<std::size_t>(k * r + i)];
      if (v > thr) {
        ++rank;
        S.C_est = std::max(S.C_est, std::max(v, 1.0 / v));
      }
    }
    S.k_per_fiber[static_cast<std::size_t>(k)] = rank;
    S.k0 = std::min(S.k0, rank);
    S.k_max = std::max(S.k_max, rank);
  }
  S.constancy = (S.k0 == S.k_max);
  return S;
}

struct ConditionIII {
  bool holds = false;
  double C = 0.0;
};

inline ConditionIII condition_iii_check(const SpectralProfile& S) { return {S.constancy, S.C_est}; }

/// Ranks of the (2J+1)^{1+d} x r pre-Gramian fiber matrices.
struct PreGramianProfile {
  std::vector<Index> ranks;
  std::vector<double> singular_values;  // node-major, descending
  Index k0 = 0;
  Index k_max = 0;
  bool constancy = true;
};

inline PreGramianProfile pre_gramian_profile(const GeneratorSystem& phi, const FrequencyGrid& freq,
                                             double rank_tol = 1e-8) {
  std::vector<FourierFibers> ff;
  for (const auto& g : phi.generators()) ff.push_back(fourier_fibers(g, freq));
  const Index nodes = freq.node_count();
  const Index r = static_cast<Index>(phi.r());
  const Index K = ff.front().per_node;
  PreGramianProfile P;
  P.singular_values.assign(static_cast<std::size_t>(nodes * r), 0.0);
  parallel_for(nodes, [&](Index k) {
    Eigen::MatrixXcd M(K, r);
    for (Index i = 0; i < r; ++i)
      for (Index m = 0; m < K; ++m) M(m, i) = ff[static_cast<std::size_t>(i)].at(k, m);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
    for (Index i = 0; i < std::min(r, K); ++i) P.singular_values[static_cast<std::size_t>(k * r + i)] = svd.singularValues()(i);
  });
  double smax = 0.0;
  for (double v : P.singular_values) smax = std::max(smax, v);
  P.ranks.assign(static_cast<std::size_t>(nodes), 0);
  P.k0 = r;
  for (Index k = 0; k < nodes; ++k) {
    Index rank = 0;
    for (Index i = 0; i < r; ++i) {
      const double s = P.singular_values[static_cast<std::size_t>(k * r + i)];
      if (s * s > rank_tol * smax * smax) ++rank;
    }
    P.ranks[static_cast<std::size_t>(k)] = rank;
    P.k0 = std::min(P.k0, rank);
    P.k_max = std::max(P.k_max, rank);
  }
  P.constancy = (P.k0 == P.k_max);
  return P;
}

}  // namespace siframe
