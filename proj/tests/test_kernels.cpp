#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "pelp/kernels.hpp"
#include "pelp/rng.hpp"

using namespace pelp;

namespace {

std::vector<double> random_vec(Rng& rng, size_t n, double lo = -2.0,
                               double hi = 2.0) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

}  // namespace

TEST_CASE("dot on hand values") {
  const double a[] = {1.0, 2.0, 3.0};
  const double b[] = {4.0, 5.0, 6.0};
  CHECK(kernels::dot(a, b, 3) == doctest::Approx(32.0).epsilon(1e-15));
  CHECK(kernels::dot(a, b, 0) == 0.0);
}

TEST_CASE("axpy accumulates y += a*x") {
  double y[] = {1.0, 1.0, 1.0, 1.0};
  const double x[] = {1.0, 2.0, 3.0, 4.0};
  kernels::axpy(y, x, 0.5, 4);
  CHECK(y[0] == doctest::Approx(1.5));
  CHECK(y[1] == doctest::Approx(2.0));
  CHECK(y[2] == doctest::Approx(2.5));
  CHECK(y[3] == doctest::Approx(3.0));
}

TEST_CASE("squared_norm and squared_dist on hand values") {
  const double a[] = {3.0, 4.0};
  const double b[] = {0.0, 0.0};
  CHECK(kernels::squared_norm(a, 2) == doctest::Approx(25.0));
  CHECK(kernels::squared_dist(a, b, 2) == doctest::Approx(25.0));
  const double c[] = {1.0, 1.0};
  CHECK(kernels::squared_dist(a, c, 2) == doctest::Approx(4.0 + 9.0));
}

TEST_CASE("edge_grad pushes endpoints together") {
  // d = w*(tb - ta); ga += d; gb -= d
  const double ta[] = {1.0, 0.0};
  const double tb[] = {3.0, 4.0};
  double ga[] = {0.0, 0.0};
  double gb[] = {0.0, 0.0};
  kernels::edge_grad(2.0, ta, tb, ga, gb, 2);
  CHECK(ga[0] == doctest::Approx(4.0));
  CHECK(ga[1] == doctest::Approx(8.0));
  CHECK(gb[0] == doctest::Approx(-4.0));
  CHECK(gb[1] == doctest::Approx(-8.0));
}

TEST_CASE("adam first step moves by ~lr in the gradient direction") {
  // with m = v = 0 and bias correction at t = 1, the update is
  // lr * g / (|g| + eps), an ascent step of magnitude ~lr
  double p[] = {0.0, 1.0};
  double m[] = {0.0, 0.0};
  double v[] = {0.0, 0.0};
  const double g[] = {2.0, -0.5};
  kernels::AdamParams ap;
  ap.lr = 0.1;
  ap.beta1 = 0.9;
  ap.beta2 = 0.999;
  ap.eps = 1e-8;
  ap.bias1 = 1.0 - 0.9;
  ap.bias2 = 1.0 - 0.999;
  CHECK(kernels::adam_update(p, m, v, g, 2, ap));
  // exact: mhat = g, vhat = g^2, step = lr * g / (|g| + eps)
  CHECK(p[0] == doctest::Approx(0.1 * 2.0 / (2.0 + 1e-8)).epsilon(1e-12));
  CHECK(p[1] ==
        doctest::Approx(1.0 + 0.1 * (-0.5) / (0.5 + 1e-8)).epsilon(1e-12));
  CHECK(m[0] == doctest::Approx(0.1 * 2.0));
  CHECK(v[0] == doctest::Approx(0.001 * 4.0));
}

TEST_CASE("adam_update reports non-finite parameters") {
  double p[] = {0.0};
  double m[] = {0.0};
  double v[] = {0.0};
  const double g[] = {1e308};
  kernels::AdamParams ap;
  ap.lr = 1e308;
  ap.beta1 = 0.9;
  ap.beta2 = 0.999;
  ap.eps = 1e-8;
  ap.bias1 = 0.1;
  ap.bias2 = 0.001;
  CHECK_FALSE(kernels::adam_update(p, m, v, g, 1, ap));
}

TEST_CASE("scalar and simd backends agree") {
#if defined(PELP_HAVE_AVX2_KERNELS)
  if (!kernels::avx2_available()) return;
  const auto& sc = kernels::scalar_table;
  const auto& vx = kernels::avx2_table;
  Rng rng(11);
  // odd lengths exercise the vector tails
  for (size_t n : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 13u, 31u, 64u, 100u}) {
    auto a = random_vec(rng, n);
    auto b = random_vec(rng, n);
    CHECK(sc.dot(a.data(), b.data(), n) ==
          doctest::Approx(vx.dot(a.data(), b.data(), n)).epsilon(1e-12));
    CHECK(sc.squared_norm(a.data(), n) ==
          doctest::Approx(vx.squared_norm(a.data(), n)).epsilon(1e-12));
    CHECK(sc.squared_dist(a.data(), b.data(), n) ==
          doctest::Approx(vx.squared_dist(a.data(), b.data(), n))
              .epsilon(1e-12));

    auto y1 = random_vec(rng, n);
    auto y2 = y1;
    sc.axpy(y1.data(), a.data(), 0.7, n);
    vx.axpy(y2.data(), a.data(), 0.7, n);
    for (size_t i = 0; i < n; ++i)
      CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-12));

    auto ga1 = random_vec(rng, n), gb1 = random_vec(rng, n);
    auto ga2 = ga1, gb2 = gb1;
    sc.edge_grad(1.3, a.data(), b.data(), ga1.data(), gb1.data(), n);
    vx.edge_grad(1.3, a.data(), b.data(), ga2.data(), gb2.data(), n);
    for (size_t i = 0; i < n; ++i) {
      CHECK(ga1[i] == doctest::Approx(ga2[i]).epsilon(1e-12));
      CHECK(gb1[i] == doctest::Approx(gb2[i]).epsilon(1e-12));
    }

    auto p1 = random_vec(rng, n), m1 = random_vec(rng, n, 0.0, 0.1),
         v1 = random_vec(rng, n, 0.0, 0.1), g = random_vec(rng, n);
    auto p2 = p1, m2 = m1, v2 = v1;
    kernels::AdamParams ap;
    ap.lr = 0.05;
    ap.beta1 = 0.9;
    ap.beta2 = 0.999;
    ap.eps = 1e-8;
    ap.bias1 = 1.0 - std::pow(0.9, 3.0);
    ap.bias2 = 1.0 - std::pow(0.999, 3.0);
    CHECK(sc.adam_update(p1.data(), m1.data(), v1.data(), g.data(), n, ap));
    CHECK(vx.adam_update(p2.data(), m2.data(), v2.data(), g.data(), n, ap));
    for (size_t i = 0; i < n; ++i) {
      CHECK(p1[i] == doctest::Approx(p2[i]).epsilon(1e-12));
      CHECK(m1[i] == doctest::Approx(m2[i]).epsilon(1e-12));
      CHECK(v1[i] == doctest::Approx(v2[i]).epsilon(1e-12));
    }
  }
#endif
}

TEST_CASE("backend forcing round-trips") {
  kernels::set_kernel_backend(kernels::Backend::kScalar);
  CHECK(std::string(kernels::active().name) == "scalar");
  kernels::set_kernel_backend(kernels::Backend::kAuto);
  // auto picks some valid table
  CHECK(kernels::active().name != nullptr);
}
