#pragma once

#include <optional>
#include <random>
#include <set>

#include "siframe/mixed_norms.hpp"

namespace siframe {

/// r generators on a shared grid step and dimension.
class GeneratorSystem {
 public:
  GeneratorSystem() = default;
  GeneratorSystem(std::vector<SampledField> gens, std::vector<std::string> labels = {})
      : gens_(std::move(gens)), labels_(std::move(labels)) {
    if (gens_.empty()) throw BadParams("generator system needs r >= 1");
    for (const auto& g : gens_) {
      if (g.d() != gens_[0].d()) throw DimensionMismatch("generators differ in d");
      if (g.inv_h() != gens_[0].inv_h()) throw DimensionMismatch("generators differ in grid step");
      if (g.is_zero()) throw BadParams("generator is identically zero");
    }
    if (labels_.empty())
      for (std::size_t i = 0; i < gens_.size(); ++i) labels_.push_back("phi" + std::to_string(i + 1));
    if (labels_.size() != gens_.size()) throw ArityMismatch("label count differs from r");
  }

  std::size_t r() const { return gens_.size(); }
  int d() const { return gens_.front().d(); }
  Index inv_h() const { return gens_.front().inv_h(); }
  const SampledField& operator[](std::size_t i) const { return gens_[i]; }
  const std::vector<SampledField>& generators() const { return gens_; }
  const std::vector<std::string>& labels() const { return labels_; }

 private:
  std::vector<SampledField> gens_;
  std::vector<std::string> labels_;
};

/// Translate a field by an integer lattice vector.
inline SampledField shift(const SampledField& f, const Multi& k) {
  Multi ks = k;
  for (auto& v : ks) v *= f.inv_h();
  return SampledField::from_samples(f.d(), f.inv_h(), f.values().translated(ks), f.decay());
}

inline CoefficientArray shift(const CoefficientArray& c, const Multi& k) {
  return CoefficientArray(c.d(), c.data().translated(k));
}

/// alpha * f + beta * g on the hull of both boxes.
inline SampledField accumulate(const SampledField& f, const SampledField& g, cplx alpha = 1.0, cplx beta = 1.0) {
  if (f.d() != g.d() || f.inv_h() != g.inv_h()) throw DimensionMismatch("fields on different grids");
  IndexBox ub = IndexBox::hull(f.unit_box(), g.unit_box());
  SampledField out(f.d(), f.inv_h(), ub);
  const Multi zero(ub.dims(), 0);
  BoxArray::add_into(out.values(), f.values(), zero, alpha);
  BoxArray::add_into(out.values(), g.values(), zero, beta);
  Decay dec = f.decay();
  if (g.decay().kind == DecayKind::exponential) dec = g.decay();
  dec.tail_mass = std::abs(alpha) * f.decay().tail_mass + std::abs(beta) * g.decay().tail_mass;
  out.set_decay(dec);
  return out;
}

/// h^{1+d} sum f conj(g), exact for cellwise-constant fields.
inline cplx inner_product(const SampledField& f, const SampledField& g) {
  if (f.d() != g.d() || f.inv_h() != g.inv_h()) throw DimensionMismatch("fields on different grids");
  return f.grid().cell_measure() * BoxArray::overlap_dot(f.values(), g.values(), Multi(f.grid().dims(), 0));
}

/// sum_j d(j) f(. - j).
inline SampledField semi_convolve(const SampledField& f, const CoefficientArray& D) {
  if (D.d() != f.d()) throw DimensionMismatch("coefficient dimension differs from field dimension");
  const IndexBox& fb = f.unit_box();
  const IndexBox& w = D.window();
  if (w.empty()) return SampledField(f.d(), f.inv_h(), IndexBox(fb.lo, fb.lo), f.decay());
  IndexBox ub = fb;
  for (std::size_t a = 0; a < ub.dims(); ++a) {
    ub.lo[a] = fb.lo[a] + w.lo[a];
    ub.hi[a] = fb.hi[a] + w.hi[a] - 1;
  }
  SampledField out(f.d(), f.inv_h(), ub);
  const Index n = f.inv_h();
  double l11 = 0.0;
  for (Index t = 0; t < D.data().size(); ++t) {
    const cplx v = D.data().data()[static_cast<std::size_t>(t)];
    if (v == cplx(0.0)) continue;
    l11 += std::abs(v);
    Multi j = D.data().multi(t);
    for (auto& x : j) x *= n;
    BoxArray::add_into(out.values(), f.values(), j, v);
  }
  Decay dec = f.decay();
  dec.tail_mass *= l11;
  out.set_decay(dec);
  return out;
}

/// Smallest lattice window containing every j with supp f meeting supp g(. - j).
inline IndexBox required_window(const SampledField& f, const SampledField& g) {
  const std::size_t D = f.grid().dims();
  IndexBox sf = f.values().support(), sg = g.values().support();
  if (sf.empty() || sg.empty()) return IndexBox(Multi(D, 0), Multi(D, 0));
  const Index n = f.inv_h();
  IndexBox w{Multi(D), Multi(D)};
  for (std::size_t a = 0; a < D; ++a) {
    w.lo[a] = floor_div(sf.lo[a] - sg.hi[a], n) + 1;
    w.hi[a] = -floor_div(-(sf.hi[a] - sg.lo[a]), n);  // ceil, exclusive upper end
  }
  return w;
}

/// Analysis coefficients c(j) = <f, g(. - j)> over a lattice window.
inline CoefficientArray analyze_one(const SampledField& f, const SampledField& g,
                                    const std::optional<IndexBox>& window = std::nullopt) {
  if (f.d() != g.d() || f.inv_h() != g.inv_h()) throw DimensionMismatch("field and generator on different grids");
  IndexBox need = required_window(f, g);
  IndexBox win = window ? *window : need;
  if (win.dims() != f.grid().dims()) throw DimensionMismatch("window rank must be 1+d");
  if (!need.empty() && !win.contains(need))
    throw WindowTooSmall("support overlap needs window " + need.str() + ", got " + win.str());
  if (win.empty()) win = IndexBox(Multi(f.grid().dims(), 0), Multi(f.grid().dims(), 1));
  CoefficientArray c(f.d(), win);
  const double w = f.grid().cell_measure();
  const Index n = f.inv_h();
  auto& data = c.data().data();
  parallel_for(c.data().size(), [&](Index t) {
    Multi j = c.data().multi(t);
    for (auto& x : j) x *= n;
    data[static_cast<std::size_t>(t)] = w * BoxArray::overlap_dot(f.values(), g.values(), j);
  });
  return c;
}

/// Frame coefficients of f against every generator.
inline std::vector<CoefficientArray> analyze(const SampledField& f, const GeneratorSystem& phi,
                                             const std::optional<IndexBox>& window = std::nullopt) {
  if (f.d() != phi.d()) throw DimensionMismatch("field and system differ in d");
  std::vector<CoefficientArray> out;
  out.reserve(phi.r());
  for (const auto& g : phi.generators()) out.push_back(analyze_one(f, g, window));
  return out;
}

/// sum_i phi_i *' D_i.
inline SampledField synthesize(const GeneratorSystem& phi, const std::vector<CoefficientArray>& D) {
  if (D.size() != phi.r()) throw ArityMismatch("expected " + std::to_string(phi.r()) + " coefficient arrays");
  for (const auto& c : D)
    if (c.d() != phi.d()) throw DimensionMismatch("coefficient dimension differs from system");
  std::vector<SampledField> parts;
  IndexBox ub;
  for (std::size_t i = 0; i < phi.r(); ++i) {
    parts.push_back(semi_convolve(phi[i], D[i]));
    ub = IndexBox::hull(ub, parts.back().unit_box());
  }
  if (ub.empty()) ub = parts.front().unit_box();
  SampledField out(phi.d(), phi.inv_h(), ub);
  Decay dec;
  for (const auto& p : parts) {
    BoxArray::add_into(out.values(), p.values(), Multi(ub.dims(), 0), 1.0);
    if (p.decay().kind == DecayKind::exponential) dec.kind = DecayKind::exponential, dec.rate = p.decay().rate;
    dec.tail_mass += p.decay().tail_mass;
  }
  out.set_decay(dec);
  return out;
}

/// Coefficient array with `taps` distinct random positions in a cube of side
/// ceil(taps^{1/(1+d)}) anchored at the origin; complex standard normal values.
inline CoefficientArray random_taps(int d, Index taps, std::uint64_t seed) {
  if (taps < 1) throw BadParams("taps must be >= 1");
  const std::size_t D = static_cast<std::size_t>(d + 1);
  Index side = 1;
  while (ipow(side, static_cast<int>(D)) < taps) ++side;
  IndexBox win(Multi(D, 0), Multi(D, side));
  CoefficientArray c(d, win);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
  std::vector<Index> slots(static_cast<std::size_t>(win.size()));
  for (std::size_t i = 0; i < slots.size(); ++i) slots[i] = static_cast<Index>(i);
  std::shuffle(slots.begin(), slots.end(), rng);
  for (Index t = 0; t < taps; ++t) {
    const double re = nd(rng), im = nd(rng);
    c.data().data()[static_cast<std::size_t>(slots[static_cast<std::size_t>(t)])] = cplx(re, im);
  }
  return c;
}

}  // namespace siframe
