#pragma once

#include <functional>

#include "siframe/grid.hpp"

namespace siframe {

enum class DecayKind { compact, exponential };

/// Decay metadata. For exponential decay, tail_mass bounds the amalgam (2,2)
/// norm of the part of the function cut off by the box.
struct Decay {
  DecayKind kind = DecayKind::compact;
  double rate = 0.0;
  double tail_mass = 0.0;

  static Decay compact() { return {}; }
  static Decay exponential(double rate, double tail_mass) { return {DecayKind::exponential, rate, tail_mass}; }
};

/// Complex samples of a function on R x R^d at the cell midpoints of a
/// uniform grid; zero outside the box. The field is read as the function that
/// is constant on each grid cell.
class SampledField {
 public:
  SampledField() = default;
  SampledField(UniformGrid grid, Decay decay = {})
      : grid_(std::move(grid)), values_(grid_.sample_box()), decay_(decay) {}
  SampledField(int d, Index inv_h, IndexBox unit_box, Decay decay = {})
      : SampledField(UniformGrid(d, inv_h, std::move(unit_box)), decay) {}

  /// Samples fn at every node; fn receives the 1+d coordinates.
  static SampledField from_function(int d, Index inv_h, IndexBox unit_box,
                                    const std::function<cplx(const double*)>& fn, Decay decay = {}) {
    SampledField f(d, inv_h, std::move(unit_box), decay);
    std::vector<double> x(f.grid().dims());
    const std::size_t D = x.size();
    for_each_row(f.values_.box(), [&](const Multi& m, Index len) {
      cplx* p = f.values_.data().data() + f.values_.offset(m);
      for (std::size_t a = 0; a + 1 < D; ++a) x[a] = f.grid_.coord(m[a]);
      for (Index i = 0; i < len; ++i) {
        x[D - 1] = f.grid_.coord(m[D - 1] + i);
        p[i] = fn(x.data());
      }
    });
    return f;
  }

  const UniformGrid& grid() const { return grid_; }
  int d() const { return grid_.d; }
  Index inv_h() const { return grid_.inv_h; }
  double h() const { return grid_.h(); }
  const IndexBox& unit_box() const { return grid_.box; }
  const BoxArray& values() const { return values_; }
  BoxArray& values() { return values_; }
  const Decay& decay() const { return decay_; }
  void set_decay(Decay d) { decay_ = d; }

  /// Wrap samples already laid out on inv_h * unit_box.
  static SampledField from_samples(int d, Index inv_h, BoxArray samples, Decay decay = {}) {
    IndexBox ub = samples.box();
    for (std::size_t a = 0; a < ub.dims(); ++a) {
      if (floor_mod(ub.lo[a], inv_h) != 0 || floor_mod(ub.hi[a], inv_h) != 0)
        throw BadParams("sample box is not aligned with unit cells");
      ub.lo[a] /= inv_h;
      ub.hi[a] /= inv_h;
    }
    SampledField f(d, inv_h, ub, decay);
    f.values_ = std::move(samples);
    return f;
  }

  bool is_zero() const { return values_.max_abs() == 0.0; }

  void scale(cplx s) {
    for (auto& v : values_.data()) v *= s;
    decay_.tail_mass *= std::abs(s);
  }

  void check_finite() const {
    for (const auto& v : values_.data())
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw BadParams("non-finite sample");
  }

 private:
  UniformGrid grid_;
  BoxArray values_;
  Decay decay_;
};

/// Finitely supported coefficients d(j1, j2) on Z x Z^d.
class CoefficientArray {
 public:
  CoefficientArray() = default;
  CoefficientArray(int d, IndexBox window) : d_(d), data_(std::move(window)) {
    if (data_.dims() != static_cast<std::size_t>(d + 1)) throw DimensionMismatch("window rank must be 1+d");
  }
  CoefficientArray(int d, BoxArray data) : d_(d), data_(std::move(data)) {
    if (data_.dims() != static_cast<std::size_t>(d + 1)) throw DimensionMismatch("window rank must be 1+d");
  }

  /// Unit impulse at k.
  static CoefficientArray delta(int d, const Multi& k, cplx value = 1.0) {
    Multi hi = k;
    for (auto& v : hi) ++v;
    CoefficientArray c(d, IndexBox(k, hi));
    c(k) = value;
    return c;
  }

  int d() const { return d_; }
  const IndexBox& window() const { return data_.box(); }
  const Multi& offset() const { return data_.box().lo; }
  const BoxArray& data() const { return data_; }
  BoxArray& data() { return data_; }
  cplx& operator()(const Multi& j) { return data_(j); }
  const cplx& operator()(const Multi& j) const { return data_(j); }
  cplx at(const Multi& j) const { return data_.at_or_zero(j); }

 private:
  int d_ = 1;
  BoxArray data_;
};

}  // namespace siframe
