#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>

namespace tdlab::kernels {

/// Per-thread tally of dense vector work done through these kernels. Each
/// length-n operand read or written by a kernel adds n to `elements` and one
/// to `vector_passes`.
struct Counters {
  std::uint64_t vector_passes = 0;
  std::uint64_t elements = 0;
};

inline thread_local Counters thread_counters;

inline Counters& counters() { return thread_counters; }
inline void reset_counters() { thread_counters = Counters{}; }

namespace detail {
inline void tally(std::size_t operands, std::size_t n) {
  auto& c = counters();
  c.vector_passes += operands;
  c.elements += operands * n;
}
}  // namespace detail

using Vec = std::span<double>;
using CVec = std::span<const double>;

inline double dot(CVec a, CVec b) {
  detail::tally(2, a.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// y += alpha * x
inline void axpy(double alpha, CVec x, Vec y) {
  detail::tally(2, y.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

/// y += a * x + b * z
inline void axpbz(double a, CVec x, double b, CVec z, Vec y) {
  detail::tally(3, y.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i] + b * z[i];
}

/// y = beta * y + alpha * x
inline void scale_add(double beta, Vec y, double alpha, CVec x) {
  detail::tally(2, y.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = beta * y[i] + alpha * x[i];
}

/// y *= beta
inline void scale(double beta, Vec y) {
  detail::tally(1, y.size());
  for (auto& v : y) v *= beta;
}

inline void copy(CVec src, Vec dst) {
  detail::tally(2, dst.size());
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = src[i];
}

inline bool all_finite(CVec x) {
  detail::tally(1, x.size());
  for (double v : x) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace tdlab::kernels
