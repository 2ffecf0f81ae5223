#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace siframe {

using cplx = std::complex<double>;
using Index = std::int64_t;
using Multi = std::vector<Index>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kPi = 3.14159265358979323846;

enum class ErrorKind {
  DimensionMismatch,
  WindowTooSmall,
  ArityMismatch,
  NonHermitianFiber,
  ConditionIIIFails,
  TailMassExceeded,
  PreconditionSumNonzero,
  UnknownCorpusEntry,
  BadParams,
  BadScenario,
  Io,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::WindowTooSmall: return "WindowTooSmall";
    case ErrorKind::ArityMismatch: return "ArityMismatch";
    case ErrorKind::NonHermitianFiber: return "NonHermitianFiber";
    case ErrorKind::ConditionIIIFails: return "ConditionIIIFails";
    case ErrorKind::TailMassExceeded: return "TailMassExceeded";
    case ErrorKind::PreconditionSumNonzero: return "PreconditionSumNonzero";
    case ErrorKind::UnknownCorpusEntry: return "UnknownCorpusEntry";
    case ErrorKind::BadParams: return "BadParams";
    case ErrorKind::BadScenario: return "BadScenario";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

template <ErrorKind K>
class KindError : public Error {
 public:
  explicit KindError(const std::string& what) : Error(K, what) {}
};

using DimensionMismatch = KindError<ErrorKind::DimensionMismatch>;
using WindowTooSmall = KindError<ErrorKind::WindowTooSmall>;
using ArityMismatch = KindError<ErrorKind::ArityMismatch>;
using NonHermitianFiber = KindError<ErrorKind::NonHermitianFiber>;
using ConditionIIIFails = KindError<ErrorKind::ConditionIIIFails>;
using TailMassExceeded = KindError<ErrorKind::TailMassExceeded>;
using PreconditionSumNonzero = KindError<ErrorKind::PreconditionSumNonzero>;
using UnknownCorpusEntry = KindError<ErrorKind::UnknownCorpusEntry>;
using BadParams = KindError<ErrorKind::BadParams>;
using BadScenario = KindError<ErrorKind::BadScenario>;
using IoError = KindError<ErrorKind::Io>;

/// Exponent pair (p, q) in [1, inf]^2 with conjugates.
struct MixedExponents {
  double p = 2.0;
  double q = 2.0;

  MixedExponents() = default;
  MixedExponents(double p_, double q_) : p(p_), q(q_) { validate(); }

  void validate() const {
    if (!(p >= 1.0) || !(q >= 1.0)) throw BadParams("exponents must satisfy p, q >= 1");
  }
  static double conjugate(double e) {
    if (e == 1.0) return kInf;
    if (std::isinf(e)) return 1.0;
    return e / (e - 1.0);
  }
  double p_conj() const { return conjugate(p); }
  double q_conj() const { return conjugate(q); }
};

inline Index floor_div(Index a, Index b) {
  Index q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

inline Index floor_mod(Index a, Index b) { return a - b * floor_div(a, b); }

inline Index ipow(Index base, int e) {
  Index r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

/// Worker count: SIFRAME_THREADS if set, else hardware concurrency.
inline unsigned thread_count() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SIFRAME_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(std::min<long>(v, 1024));
  }
  return hw;
}

/// Runs fn(i) for i in [0, n). Each index must write only to its own slot.
template <class Fn>
void parallel_for(Index n, Fn&& fn) {
  unsigned workers = static_cast<unsigned>(std::min<Index>(thread_count(), n));
  if (workers <= 1 || n < 64) {
    for (Index i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<Index> next{0};
  const Index chunk = std::max<Index>(1, n / (8 * static_cast<Index>(workers)));
  std::vector<std::exception_ptr> errors(workers);
  auto body = [&](unsigned w) {
    try {
      for (;;) {
        Index start = next.fetch_add(chunk);
        if (start >= n) break;
        Index stop = std::min(n, start + chunk);
        for (Index i = start; i < stop; ++i) fn(i);
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(body, w);
  body(0);
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace siframe
