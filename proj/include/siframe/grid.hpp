#pragma once

#include <cassert>
#include <sstream>

#include "siframe/core.hpp"

namespace siframe {

/// Half-open integer box [lo, hi) in Z^dims.
struct IndexBox {
  Multi lo;
  Multi hi;

  IndexBox() = default;
  IndexBox(Multi lo_, Multi hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
    if (lo.size() != hi.size()) throw DimensionMismatch("box corners differ in rank");
  }

  std::size_t dims() const { return lo.size(); }
  Index extent(std::size_t a) const { return std::max<Index>(0, hi[a] - lo[a]); }
  Index size() const {
    if (lo.empty()) return 0;
    Index s = 1;
    for (std::size_t a = 0; a < dims(); ++a) s *= extent(a);
    return s;
  }
  bool empty() const { return size() == 0; }

  bool contains(const Multi& m) const {
    for (std::size_t a = 0; a < dims(); ++a)
      if (m[a] < lo[a] || m[a] >= hi[a]) return false;
    return true;
  }
  bool contains(const IndexBox& b) const {
    if (b.empty()) return true;
    for (std::size_t a = 0; a < dims(); ++a)
      if (b.lo[a] < lo[a] || b.hi[a] > hi[a]) return false;
    return true;
  }

  IndexBox shifted(const Multi& k) const {
    IndexBox b = *this;
    for (std::size_t a = 0; a < dims(); ++a) {
      b.lo[a] += k[a];
      b.hi[a] += k[a];
    }
    return b;
  }
  IndexBox scaled(Index n) const {
    IndexBox b = *this;
    for (std::size_t a = 0; a < dims(); ++a) {
      b.lo[a] *= n;
      b.hi[a] *= n;
    }
    return b;
  }

  static IndexBox intersect(const IndexBox& x, const IndexBox& y) {
    IndexBox b = x;
    for (std::size_t a = 0; a < x.dims(); ++a) {
      b.lo[a] = std::max(x.lo[a], y.lo[a]);
      b.hi[a] = std::max(b.lo[a], std::min(x.hi[a], y.hi[a]));
    }
    return b;
  }
  static IndexBox hull(const IndexBox& x, const IndexBox& y) {
    if (x.empty()) return y;
    if (y.empty()) return x;
    IndexBox b = x;
    for (std::size_t a = 0; a < x.dims(); ++a) {
      b.lo[a] = std::min(x.lo[a], y.lo[a]);
      b.hi[a] = std::max(x.hi[a], y.hi[a]);
    }
    return b;
  }
  /// Cube [-r, r]^dims.
  static IndexBox cube(std::size_t dims, Index r) {
    return IndexBox(Multi(dims, -r), Multi(dims, r + 1));
  }

  std::string str() const {
    std::ostringstream os;
    for (std::size_t a = 0; a < dims(); ++a) os << (a ? "x" : "") << "[" << lo[a] << "," << hi[a] << ")";
    return os.str();
  }
  bool operator==(const IndexBox&) const = default;
};

/// Calls fn(start, len) for every contiguous run along the last axis of region.
template <class Fn>
void for_each_row(const IndexBox& region, Fn&& fn) {
  if (region.empty()) return;
  const std::size_t D = region.dims();
  Multi m = region.lo;
  const Index len = region.extent(D - 1);
  for (;;) {
    fn(static_cast<const Multi&>(m), len);
    std::size_t a = D - 1;
    for (;;) {
      if (a == 0) return;
      --a;
      if (++m[a] < region.hi[a]) break;
      m[a] = region.lo[a];
    }
  }
}

/// Dense complex array over an IndexBox, row-major with axis 0 slowest.
class BoxArray {
 public:
  BoxArray() = default;
  explicit BoxArray(IndexBox box) : box_(std::move(box)) {
    strides_.assign(box_.dims(), 1);
    for (std::size_t a = box_.dims(); a-- > 1;) strides_[a - 1] = strides_[a] * box_.extent(a);
    data_.assign(static_cast<std::size_t>(box_.size()), cplx(0.0));
  }

  const IndexBox& box() const { return box_; }
  std::size_t dims() const { return box_.dims(); }
  Index size() const { return static_cast<Index>(data_.size()); }
  const std::vector<Index>& strides() const { return strides_; }
  std::vector<cplx>& data() { return data_; }
  const std::vector<cplx>& data() const { return data_; }

  std::size_t offset(const Multi& m) const {
    Index off = 0;
    for (std::size_t a = 0; a < box_.dims(); ++a) off += (m[a] - box_.lo[a]) * strides_[a];
    return static_cast<std::size_t>(off);
  }
  cplx& operator()(const Multi& m) { return data_[offset(m)]; }
  const cplx& operator()(const Multi& m) const { return data_[offset(m)]; }
  cplx at_or_zero(const Multi& m) const { return box_.contains(m) ? data_[offset(m)] : cplx(0.0); }

  Multi multi(Index flat) const {
    Multi m(box_.dims());
    for (std::size_t a = 0; a < box_.dims(); ++a) {
      m[a] = box_.lo[a] + flat / strides_[a];
      flat %= strides_[a];
    }
    return m;
  }

  /// Same data viewed at a translated box.
  BoxArray translated(const Multi& k) const {
    BoxArray out = *this;
    out.box_ = box_.shifted(k);
    return out;
  }

  /// Copy into a (larger or smaller) box, zero-filling or cropping.
  BoxArray reboxed(const IndexBox& box) const {
    BoxArray out(box);
    add_into(out, *this, Multi(dims(), 0), cplx(1.0));
    return out;
  }

  /// dst(x + shift) += scale * src(x) on the part of src that lands inside dst.
  static void add_into(BoxArray& dst, const BoxArray& src, const Multi& shift, cplx scale) {
    IndexBox region = IndexBox::intersect(src.box(), dst.box().shifted(negate(shift)));
    for_each_row(region, [&](const Multi& m, Index len) {
      const cplx* s = src.data_.data() + src.offset(m);
      Multi t = m;
      for (std::size_t a = 0; a < t.size(); ++a) t[a] += shift[a];
      cplx* d = dst.data_.data() + dst.offset(t);
      for (Index i = 0; i < len; ++i) d[i] += scale * s[i];
    });
  }

  /// Sum over x of a(x) * conj(b(x - shift)).
  static cplx overlap_dot(const BoxArray& a, const BoxArray& b, const Multi& shift) {
    IndexBox region = IndexBox::intersect(a.box(), b.box().shifted(shift));
    cplx acc(0.0);
    for_each_row(region, [&](const Multi& m, Index len) {
      const cplx* pa = a.data_.data() + a.offset(m);
      Multi t = m;
      for (std::size_t k = 0; k < t.size(); ++k) t[k] -= shift[k];
      const cplx* pb = b.data_.data() + b.offset(t);
      double re = 0.0, im = 0.0;
      for (Index i = 0; i < len; ++i) {
        const double ar = pa[i].real(), ai = pa[i].imag(), br = pb[i].real(), bi = pb[i].imag();
        re += ar * br + ai * bi;
        im += ai * br - ar * bi;
      }
      acc += cplx(re, im);
    });
    return acc;
  }

  /// Bounding box of nonzero entries (empty box if all zero).
  IndexBox support() const {
    const std::size_t D = dims();
    Multi lo(D, std::numeric_limits<Index>::max()), hi(D, std::numeric_limits<Index>::min());
    bool any = false;
    for_each_row(box_, [&](const Multi& m, Index len) {
      const cplx* p = data_.data() + offset(m);
      Index first = -1, last = -1;
      for (Index i = 0; i < len; ++i)
        if (p[i] != cplx(0.0)) {
          if (first < 0) first = i;
          last = i;
        }
      if (first < 0) return;
      any = true;
      for (std::size_t a = 0; a + 1 < D; ++a) {
        lo[a] = std::min(lo[a], m[a]);
        hi[a] = std::max(hi[a], m[a] + 1);
      }
      lo[D - 1] = std::min(lo[D - 1], m[D - 1] + first);
      hi[D - 1] = std::max(hi[D - 1], m[D - 1] + last + 1);
    });
    if (!any) return IndexBox(box_.lo, box_.lo);
    return IndexBox(lo, hi);
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  static Multi negate(Multi k) {
    for (auto& v : k) v = -v;
    return k;
  }

 private:
  IndexBox box_;
  std::vector<Index> strides_;
  std::vector<cplx> data_;
};

/// Uniform grid of step h = 1/inv_h over an integer-cornered box in R^{1+d}.
struct UniformGrid {
  int d = 1;
  Index inv_h = 1;
  IndexBox box;  // unit coordinates

  UniformGrid() = default;
  UniformGrid(int d_, Index inv_h_, IndexBox box_) : d(d_), inv_h(inv_h_), box(std::move(box_)) { validate(); }

  void validate() const {
    if (d < 1) throw BadParams("spatial dimension d must be >= 1");
    if (inv_h < 1) throw BadParams("1/h must be a positive integer");
    if (box.dims() != static_cast<std::size_t>(d + 1)) throw DimensionMismatch("grid box rank must be 1+d");
  }
  double h() const { return 1.0 / static_cast<double>(inv_h); }
  std::size_t dims() const { return static_cast<std::size_t>(d + 1); }
  /// Sample-index box (node s sits at x = (s + 1/2) h).
  IndexBox sample_box() const { return box.scaled(inv_h); }
  double coord(Index s) const { return (static_cast<double>(s) + 0.5) / static_cast<double>(inv_h); }
  double cell_measure() const { return std::pow(h(), d + 1); }
};

}  // namespace siframe
