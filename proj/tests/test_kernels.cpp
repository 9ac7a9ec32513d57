// Copyright 2026 The sdslab Authors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "sdslab/kernels.hpp"
#include "sdslab/rng.hpp"

using namespace sdslab;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

double rel_err(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

}  // namespace

TEST_CASE("scalar transcendental kernels match libm") {
  const auto& ops = kernels::scalar_ops;
  Rng rng(7);
  std::vector<double> x = random_vec(rng, 1000, -60.0, 60.0);
  x.push_back(0.0);
  x.push_back(-689.0);
  x.push_back(689.0);
  std::vector<double> y(x.size());
  ops.exp_array(x.data(), y.data(), x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    CHECK(rel_err(y[i], std::exp(x[i])) < 1e-14);
  ops.logistic(x.data(), y.data(), x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    CHECK(rel_err(y[i], 1.0 / (1.0 + std::exp(-x[i]))) < 1e-13);
}

TEST_CASE("backend equivalence on every kernel") {
  const auto names = kernels::available();
  if (names.size() < 2) {
    MESSAGE("only scalar backend available; equivalence trivially holds");
    return;
  }
  const auto& sc = kernels::scalar_ops;
  REQUIRE(kernels::select("avx2"));
  const auto& vx = kernels::active();
  Rng rng(42);

  for (std::size_t n : {1u, 3u, 4u, 17u, 256u, 1001u}) {
    auto x = random_vec(rng, n, -5.0, 5.0);
    auto y = random_vec(rng, n, -5.0, 5.0);

    {
      auto y1 = y, y2 = y;
      sc.axpby(1.7, x.data(), -0.3, y1.data(), n);
      vx.axpby(1.7, x.data(), -0.3, y2.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(rel_err(y1[i], y2[i]) < 1e-13);
    }
    {
      std::vector<double> z1(n), z2(n);
      sc.axpbyz(0.25, x.data(), 2.0, y.data(), z1.data(), n);
      vx.axpbyz(0.25, x.data(), 2.0, y.data(), z2.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(rel_err(z1[i], z2[i]) < 1e-13);
    }
    {
      auto y1 = y, y2 = y;
      sc.add_scaled(y1.data(), -1.1, x.data(), n);
      vx.add_scaled(y2.data(), -1.1, x.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(rel_err(y1[i], y2[i]) < 1e-13);
    }
    {
      const double d1 = sc.dot(x.data(), y.data(), n);
      const double d2 = vx.dot(x.data(), y.data(), n);
      CHECK(std::abs(d1 - d2) <= 1e-12 * (1.0 + sc.dot(x.data(), x.data(), n)));
      CHECK(rel_err(sc.sq_norm(x.data(), n), vx.sq_norm(x.data(), n)) < 1e-13);
      double s1 = sc.sum(x.data(), n), s2 = vx.sum(x.data(), n);
      CHECK(std::abs(s1 - s2) < 1e-11);
    }
    {
      double mn1, mx1, mn2, mx2;
      sc.min_max(x.data(), n, &mn1, &mx1);
      vx.min_max(x.data(), n, &mn2, &mx2);
      CHECK(mn1 == mn2);
      CHECK(mx1 == mx2);
    }
  }

  // transcendental kernels over their documented domain
  auto x = random_vec(rng, 4096, -600.0, 600.0);
  for (int i = 0; i < 64; ++i) x[i] = rng.uniform(-1e-3, 1e-3);
  std::vector<double> a(x.size()), b(x.size());
  sc.exp_array(x.data(), a.data(), x.size());
  vx.exp_array(x.data(), b.data(), x.size());
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(rel_err(a[i], b[i]) < 1e-13);
  sc.softplus(x.data(), a.data(), x.size());
  vx.softplus(x.data(), b.data(), x.size());
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(rel_err(a[i], b[i]) < 1e-13);
  sc.logistic(x.data(), a.data(), x.size());
  vx.logistic(x.data(), b.data(), x.size());
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(rel_err(a[i], b[i]) < 1e-13);

  // fused adam update
  const std::size_t n = 333;
  auto p1 = random_vec(rng, n, -1, 1);
  auto m1 = random_vec(rng, n, -0.1, 0.1);
  auto v1 = random_vec(rng, n, 0, 0.01);
  auto g = random_vec(rng, n, -1, 1);
  auto p2 = p1, m2 = m1, v2 = v1;
  sc.adam_step(p1.data(), m1.data(), v1.data(), g.data(), n, 1e-2, 0.9, 0.99,
               1e-8, 0.1, 0.01);
  vx.adam_step(p2.data(), m2.data(), v2.data(), g.data(), n, 1e-2, 0.9, 0.99,
               1e-8, 0.1, 0.01);
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(rel_err(p1[i], p2[i]) < 1e-12);
    CHECK(rel_err(m1[i], m2[i]) < 1e-12);
    CHECK(rel_err(v1[i], v2[i]) < 1e-12);
  }

  kernels::select("avx2");  // leave auto-detected default in place
}

TEST_CASE("softplus and logistic honor their defining identities") {
  const auto& ops = kernels::active();
  Rng rng(3);
  auto x = random_vec(rng, 512, -40.0, 40.0);
  std::vector<double> sp(x.size()), lg(x.size());
  ops.softplus(x.data(), sp.data(), x.size());
  ops.logistic(x.data(), lg.data(), x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(sp[i] >= 0.0);
    CHECK(lg[i] >= 0.0);
    CHECK(lg[i] <= 1.0);
    if (std::abs(x[i]) < 30.0) {
      CHECK(lg[i] > 0.0);
      CHECK(lg[i] < 1.0);
    }
    // d/dx softplus = logistic, checked by central differences
    const double h = 1e-6;
    double up, dn;
    ops.softplus(&(x[i] += h), &up, 1);
    x[i] -= 2 * h;
    ops.softplus(&x[i], &dn, 1);
    x[i] += h;
    CHECK(std::abs((up - dn) / (2 * h) - lg[i]) < 1e-8);
  }
}
