#pragma once

#include <cstddef>
#include <string>

// Dense double-precision row kernels used by the training and prior sweeps.
// Scalar reference implementations always exist; an AVX2/FMA variant is
// selected at runtime when the CPU supports it. Selection can be forced with
// the PELP_KERNELS environment variable ("scalar" or "avx2") or
// set_kernel_backend().

namespace pelp::kernels {

struct AdamParams {
  double lr;
  double beta1;
  double beta2;
  double eps;
  double bias1;  // 1 - beta1^t
  double bias2;  // 1 - beta2^t
};

struct KernelTable {
  const char* name;
  double (*dot)(const double*, const double*, size_t);
  void (*axpy)(double*, const double*, double, size_t);  // y += a*x
  double (*squared_norm)(const double*, size_t);
  double (*squared_dist)(const double*, const double*, size_t);
  // ga += w*(tb - ta); gb += w*(ta - tb)
  void (*edge_grad)(double, const double*, const double*, double*, double*,
                    size_t);
  // ascent step; returns false if any updated parameter is non-finite
  bool (*adam_update)(double*, double*, double*, const double*, size_t,
                      const AdamParams&);
};

enum class Backend { kAuto, kScalar, kAvx2 };

const KernelTable& active();
void set_kernel_backend(Backend b);
bool avx2_available();

extern const KernelTable scalar_table;
#if defined(PELP_HAVE_AVX2_KERNELS)
extern const KernelTable avx2_table;
#endif

inline double dot(const double* a, const double* b, size_t n) {
  return active().dot(a, b, n);
}
inline void axpy(double* y, const double* x, double a, size_t n) {
  active().axpy(y, x, a, n);
}
inline double squared_norm(const double* a, size_t n) {
  return active().squared_norm(a, n);
}
inline double squared_dist(const double* a, const double* b, size_t n) {
  return active().squared_dist(a, b, n);
}
inline void edge_grad(double w, const double* ta, const double* tb, double* ga,
                      double* gb, size_t n) {
  active().edge_grad(w, ta, tb, ga, gb, n);
}
inline bool adam_update(double* p, double* m, double* v, const double* g,
                        size_t n, const AdamParams& ap) {
  return active().adam_update(p, m, v, g, n, ap);
}

}  // namespace pelp::kernels
