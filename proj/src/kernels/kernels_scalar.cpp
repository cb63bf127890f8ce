#include <cmath>

#include "pelp/kernels.hpp"

namespace pelp::kernels {
namespace {

double dot_scalar(const double* a, const double* b, size_t n) {
  double s = 0.0;
  for (size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double* y, const double* x, double a, size_t n) {
  for (size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double squared_norm_scalar(const double* a, size_t n) {
  double s = 0.0;
  for (size_t i = 0; i < n; ++i) s += a[i] * a[i];
  return s;
}

double squared_dist_scalar(const double* a, const double* b, size_t n) {
  double s = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void edge_grad_scalar(double w, const double* ta, const double* tb, double* ga,
                      double* gb, size_t n) {
  for (size_t i = 0; i < n; ++i) {
    double d = w * (tb[i] - ta[i]);
    ga[i] += d;
    gb[i] -= d;
  }
}

bool adam_update_scalar(double* p, double* m, double* v, const double* g,
                        size_t n, const AdamParams& ap) {
  bool finite = true;
  for (size_t i = 0; i < n; ++i) {
    double gi = g[i];
    m[i] = ap.beta1 * m[i] + (1.0 - ap.beta1) * gi;
    v[i] = ap.beta2 * v[i] + (1.0 - ap.beta2) * gi * gi;
    double mhat = m[i] / ap.bias1;
    double vhat = v[i] / ap.bias2;
    p[i] += ap.lr * mhat / (std::sqrt(vhat) + ap.eps);
    finite = finite && std::isfinite(p[i]);
  }
  return finite;
}

}  // namespace

const KernelTable scalar_table = {
    "scalar",      dot_scalar,        axpy_scalar,        squared_norm_scalar,
    squared_dist_scalar, edge_grad_scalar, adam_update_scalar,
};

}  // namespace pelp::kernels
