#pragma once

#include <fftw3.h>

#include <mutex>

#include "siframe/core.hpp"

namespace siframe {

namespace detail {
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

enum class FftDirection { forward = FFTW_FORWARD, backward = FFTW_BACKWARD };

/// Unnormalized in-place multidimensional DFT, row-major shape.
/// forward: sum_j x(j) e^{-2 pi i k.j / n}; backward uses e^{+...}.
inline void fft_inplace(std::vector<cplx>& data, const std::vector<int>& shape, FftDirection dir) {
  if (data.empty()) return;
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    plan = fftw_plan_dft(static_cast<int>(shape.size()), shape.data(), p, p, static_cast<int>(dir), FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
  fftw_destroy_plan(plan);
}

}  // namespace siframe
