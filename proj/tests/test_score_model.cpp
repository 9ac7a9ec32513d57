// Copyright 2026 The sdslab Authors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "sdslab/kernels.hpp"
#include "sdslab/rng.hpp"
#include "sdslab/score_model.hpp"

using namespace sdslab;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

double vec_norm(const std::vector<double>& v) {
  return std::sqrt(kernels::active().sq_norm(v.data(), v.size()));
}

// central finite differences of a log density
template <typename F>
std::vector<double> fd_gradient(const F& logp, std::vector<double> z,
                                double step) {
  std::vector<double> g(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double orig = z[i];
    z[i] = orig + step;
    const double up = logp(z);
    z[i] = orig - step;
    const double dn = logp(z);
    z[i] = orig;
    g[i] = (up - dn) / (2.0 * step);
  }
  return g;
}

double rel_vec_err(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    scale += a[i] * a[i];
  }
  return std::sqrt(diff) / std::max(std::sqrt(scale), 1e-12);
}

}  // namespace

TEST_CASE("gaussian score at and around the mode") {
  std::vector<double> mu = {0.4, -0.2, 1.1};
  auto s = gaussian_score(mu, mu, 0.7);
  for (double v : s) CHECK(v == 0.0);

  std::vector<double> z = {1.4, -0.2};
  std::vector<double> mu2 = {0.4, -0.2};
  s = gaussian_score(z, mu2, 1.0);
  CHECK(s[0] == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(s[1] == doctest::Approx(0.0).epsilon(1e-15));

  CHECK_THROWS_AS(gaussian_score(z, mu2, 0.0), std::domain_error);
  CHECK_THROWS_AS(gaussian_score(z, mu, 1.0), std::invalid_argument);
}

TEST_CASE("gaussian score matches finite differences of its log density") {
  Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t dim = 2 + static_cast<std::size_t>(rng.uniform(0, 14));
    const auto z = random_vec(rng, dim, -2.0, 2.0);
    const auto mu = random_vec(rng, dim, -2.0, 2.0);
    const double sigma2 = rng.uniform(0.2, 3.0);
    const auto analytic = gaussian_score(z, mu, sigma2);
    const double step = 1e-4 * std::max(vec_norm(z), 1.0);
    const auto fd = fd_gradient(
        [&](const std::vector<double>& q) {
          return log_gaussian_density(q, mu, sigma2);
        },
        z, step);
    CHECK(rel_vec_err(analytic, fd) < 1e-5);
  }
}

TEST_CASE("noised mixture score: degeneracy, symmetry, finite differences") {
  const auto sched = NoiseSchedule::linear();
  Rng rng(33);
  const int t = 350;
  const double ab = sched.alpha_bar(t);

  // single mode degenerates to the plain gaussian score
  {
    GaussianMode m{random_vec(rng, 8, -1, 1), 1.0, "a"};
    const auto z_t = random_vec(rng, 8, -1, 1);
    std::vector<double> noised_mu(8);
    for (int i = 0; i < 8; ++i) noised_mu[i] = std::sqrt(ab) * m.mu[i];
    const auto expect = gaussian_score(z_t, noised_mu, 1.0 - ab);
    const auto got = noised_mixture_score(z_t, {m}, t, sched);
    CHECK(rel_vec_err(expect, got) < 1e-12);
  }

  // two equal modes, evaluated at their noised midpoint: zero score
  {
    GaussianMode a{random_vec(rng, 6, -1, 1), 0.5, "a"};
    GaussianMode b{random_vec(rng, 6, -1, 1), 0.5, "b"};
    std::vector<double> mid(6);
    for (int i = 0; i < 6; ++i)
      mid[i] = 0.5 * std::sqrt(ab) * (a.mu[i] + b.mu[i]);
    const auto s = noised_mixture_score(mid, {a, b}, t, sched);
    for (double v : s) CHECK(std::abs(v) < 1e-12);
  }

  // three random modes vs finite differences of the log mixture density
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t dim = 2 + static_cast<std::size_t>(rng.uniform(0, 10));
    std::vector<GaussianMode> bucket;
    double wsum = 0.0;
    for (int k = 0; k < 3; ++k) {
      GaussianMode m{random_vec(rng, dim, -1.5, 1.5), rng.uniform(0.2, 1.0),
                     "m" + std::to_string(k)};
      wsum += m.weight;
      bucket.push_back(std::move(m));
    }
    for (auto& m : bucket) m.weight /= wsum;
    const int tt = 100 + static_cast<int>(rng.uniform(0, 800));
    const auto z_t = random_vec(rng, dim, -1.5, 1.5);
    const auto analytic = noised_mixture_score(z_t, bucket, tt, sched);
    const double step = 1e-4 * std::max(vec_norm(z_t), 1.0);
    const auto fd = fd_gradient(
        [&](const std::vector<double>& q) {
          return log_noised_mixture_density(q, bucket, tt, sched);
        },
        z_t, step);
    CHECK(rel_vec_err(analytic, fd) < 1e-5);
  }

  CHECK_THROWS_AS(noised_mixture_score({1.0}, {}, t, sched),
                  std::runtime_error);
}

TEST_CASE("predict_noise is consistent with the score relation") {
  const auto sched = NoiseSchedule::linear();
  Rng rng(44);
  const int t = 520;
  const double ab = sched.alpha_bar(t);
  std::vector<GaussianMode> bucket;
  bucket.push_back({random_vec(rng, 12, -1, 1), 0.6, "a"});
  bucket.push_back({random_vec(rng, 12, -1, 1), 0.4, "b"});

  // at a noised single mode the prediction vanishes
  {
    std::vector<double> at_mode(12);
    for (int i = 0; i < 12; ++i) at_mode[i] = std::sqrt(ab) * bucket[0].mu[i];
    const auto eh = predict_noise(at_mode, {bucket[0]}, t, sched);
    for (double v : eh) CHECK(std::abs(v) < 1e-12);
  }

  // eps_hat = -sqrt(1-ab) * score, reconstructed independently
  const auto z_t = random_vec(rng, 12, -1, 1);
  const auto eh = predict_noise(z_t, bucket, t, sched);
  const auto s = noised_mixture_score(z_t, bucket, t, sched);
  double err = 0.0;
  for (int i = 0; i < 12; ++i)
    err += std::pow(eh[i] + std::sqrt(1.0 - ab) * s[i], 2);
  CHECK(std::sqrt(err) <= 1e-12);

  // conditioning changes the prediction when z_t is not equidistant
  const auto eh_cond = predict_noise(z_t, {bucket[0]}, t, sched);
  CHECK(rel_vec_err(eh, eh_cond) > 1e-6);
}

TEST_CASE("condition restricts and renormalizes the bucket") {
  const auto sched = NoiseSchedule::linear();
  ViewLandscape landscape;
  landscape.codec = LatentCodec(8, 2, 3);
  landscape.schedule = &sched;
  Rng rng(5);
  std::vector<GaussianMode> modes;
  modes.push_back({random_vec(rng, 4, -1, 1), 0.5, "hand5/open"});
  modes.push_back({random_vec(rng, 4, -1, 1), 0.3, "hand4/open"});
  modes.push_back({random_vec(rng, 4, -1, 1), 0.2, "hand4/open"});
  landscape.buckets["front"] = modes;

  // a key matching every mode keeps the bucket identical
  ConditionKey key;
  key.view_label = "front";
  {
    ViewLandscape uniform = landscape;
    for (auto& m : uniform.buckets["front"]) m.label = "hand5/open";
    key.skeleton_label = "hand5/open";
    const auto all = condition(uniform, "front", key);
    REQUIRE(all.size() == 3);
    CHECK(all[0].weight == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(all[1].weight == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(all[2].weight == doctest::Approx(0.2).epsilon(1e-15));
  }

  key.skeleton_label = "hand4/open";
  auto sel = condition(landscape, "front", key);
  REQUIRE(sel.size() == 2);
  CHECK(sel[0].weight == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(sel[1].weight == doctest::Approx(0.4).epsilon(1e-12));

  key.skeleton_label = "hand5/open";
  sel = condition(landscape, "front", key);
  REQUIRE(sel.size() == 1);
  CHECK(sel[0].weight == doctest::Approx(1.0).epsilon(1e-12));

  key.skeleton_label = "hand9/fist";
  CHECK_THROWS_WITH_AS(condition(landscape, "front", key),
                       doctest::Contains("hand9/fist"), std::runtime_error);
  // conditioning never grows the bucket and keeps weights normalized
  key.skeleton_label = "hand4/open";
  sel = condition(landscape, "front", key);
  CHECK(sel.size() <= modes.size());
  double wsum = 0.0;
  for (const auto& m : sel) wsum += m.weight;
  CHECK(wsum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("expected_init_score: zero gap, fixed gap, and the two routes") {
  const auto sched = NoiseSchedule::linear();
  const LatentCodec codec(16, 4, 3);
  Rng rng(17);
  const int t = 300;
  const double ab = sched.alpha_bar(t);

  std::vector<Image> views;
  for (int v = 0; v < 4; ++v) {
    Image img(16, 16, 3);
    for (auto& x : img.values) x = rng.uniform(0.0, 1.0);
    views.push_back(std::move(img));
  }

  // identical views with eps forced to zero: exactly zero
  {
    Rng r2(1);
    const auto res = expected_init_score(views, views, t, 8, codec, sched, r2,
                                         /*noise_scale=*/0.0);
    CHECK(res.formula_value == 0.0);
    CHECK(res.mc_value == 0.0);
  }

  // identical views, real noise, many draws: both routes shrink toward zero
  {
    Rng r2(2);
    const auto res_small =
        expected_init_score(views, views, t, 10, codec, sched, r2);
    Rng r3(2);
    const auto res_large =
        expected_init_score(views, views, t, 4000, codec, sched, r3);
    CHECK(res_large.formula_value < res_small.formula_value);
  }

  // constant offset gap with eps = 0: formula = sqrt(ab) * |gap| / (1 - ab)
  {
    std::vector<Image> shifted = views;
    const double offset = 0.2;
    for (auto& img : shifted)
      for (auto& x : img.values) x += offset;
    Rng r2(3);
    const auto res = expected_init_score(shifted, views, t, 4, codec, sched,
                                         r2, 0.0);
    const double gap_norm =
        offset * std::sqrt(static_cast<double>(codec.latent_dim()));
    const double expected = std::sqrt(ab) * gap_norm / (1.0 - ab);
    CHECK(res.formula_value == doctest::Approx(expected).epsilon(1e-12));
  }

  // the closed form and the Monte-Carlo route agree by construction
  {
    std::vector<Image> shifted = views;
    for (auto& img : shifted)
      for (auto& x : img.values) x = 1.0 - x;
    Rng r2(4);
    const auto res =
        expected_init_score(shifted, views, t, 64, codec, sched, r2);
    CHECK(std::abs(res.formula_value - res.mc_value) <=
          1e-10 * std::max(res.formula_value, 1e-300));
  }

  std::vector<Image> mismatched(3, views[0]);
  Rng r4(5);
  CHECK_THROWS_AS(
      expected_init_score(views, mismatched, t, 4, codec, sched, r4),
      std::invalid_argument);
}

TEST_CASE("timestep washout: the gap term vanishes as t grows") {
  const auto sched = NoiseSchedule::linear();
  const LatentCodec codec(16, 4, 3);
  Rng rng(23);
  std::vector<Image> a, b;
  for (int v = 0; v < 3; ++v) {
    Image x(16, 16, 3), y(16, 16, 3);
    for (auto& q : x.values) q = rng.uniform(0.0, 1.0);
    for (auto& q : y.values) q = rng.uniform(0.0, 1.0);
    a.push_back(std::move(x));
    b.push_back(std::move(y));
  }
  double prev = 1e300;
  for (int t : {100, 400, 700, 1000}) {
    Rng r2(1);
    const auto res = expected_init_score(a, b, t, 1, codec, sched, r2, 0.0);
    CHECK(res.formula_value < prev);
    prev = res.formula_value;
  }
  Rng r3(1);
  CHECK(expected_init_score(a, b, 1000, 1, codec, sched, r3, 0.0)
            .formula_value < 0.02);
}
