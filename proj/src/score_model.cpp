// Copyright 2026 The sdslab Authors
// SPDX-License-Identifier: Apache-2.0
#include "sdslab/score_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "sdslab/kernels.hpp"
#include "sdslab/rng.hpp"

namespace sdslab {

void ViewLandscape::validate() const {
  if (buckets.empty()) throw std::runtime_error("landscape has no buckets");
  const std::size_t dim = codec.latent_dim();
  for (const auto& [label, modes] : buckets) {
    if (modes.empty())
      throw std::runtime_error("bucket '" + label + "' has no modes");
    double wsum = 0.0;
    for (const auto& m : modes) {
      if (m.mu.size() != dim)
        throw std::runtime_error("bucket '" + label +
                                 "' mode dimensionality mismatch");
      wsum += m.weight;
    }
    if (std::abs(wsum - 1.0) > 1e-12)
      throw std::runtime_error("bucket '" + label +
                               "' weights sum to " + std::to_string(wsum));
  }
}

const std::vector<GaussianMode>& ViewLandscape::bucket(
    const std::string& view_label) const {
  auto it = buckets.find(view_label);
  if (it == buckets.end())
    throw std::runtime_error("no bucket for view label '" + view_label + "'");
  return it->second;
}

std::vector<double> gaussian_score(const std::vector<double>& z,
                                   const std::vector<double>& mu,
                                   double sigma2) {
  if (sigma2 <= 0.0) throw std::domain_error("gaussian_score: sigma2 <= 0");
  if (z.size() != mu.size())
    throw std::invalid_argument("gaussian_score: dimension mismatch");
  // subtract first so the score vanishes exactly at the mode
  std::vector<double> s(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) s[i] = (mu[i] - z[i]) / sigma2;
  return s;
}

double log_gaussian_density(const std::vector<double>& z,
                            const std::vector<double>& mu, double sigma2) {
  if (sigma2 <= 0.0) throw std::domain_error("log_gaussian: sigma2 <= 0");
  if (z.size() != mu.size())
    throw std::invalid_argument("log_gaussian: dimension mismatch");
  const auto n = z.size();
  double q = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = z[i] - mu[i];
    q += d * d;
  }
  const double d = static_cast<double>(n);
  return -0.5 * q / sigma2 -
         0.5 * d * std::log(2.0 * std::numbers::pi * sigma2);
}

namespace {

// Responsibilities r_k of each noised mode at z_t, computed with a shared
// log-sum-exp shift. Returns log density as well.
struct MixtureEval {
  std::vector<double> responsibilities;
  double log_density = 0.0;
};

MixtureEval eval_noised_mixture(const std::vector<double>& z_t,
                                const std::vector<GaussianMode>& bucket,
                                int t, const NoiseSchedule& schedule) {
  if (bucket.empty())
    throw std::runtime_error("noised mixture evaluated on an empty bucket");
  const double ab = schedule.alpha_bar(t);
  const double var = 1.0 - ab;
  const double sq_ab = std::sqrt(ab);
  const std::size_t dim = z_t.size();
  const std::size_t k = bucket.size();

  std::vector<double> logits(k);
  for (std::size_t j = 0; j < k; ++j) {
    if (bucket[j].mu.size() != dim)
      throw std::invalid_argument("mixture mode dimension mismatch");
    double q = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      const double d = z_t[i] - sq_ab * bucket[j].mu[i];
      q += d * d;
    }
    logits[j] = std::log(bucket[j].weight) - 0.5 * q / var;
  }
  const double mx = *std::max_element(logits.begin(), logits.end());
  double denom = 0.0;
  MixtureEval out;
  out.responsibilities.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    out.responsibilities[j] = std::exp(logits[j] - mx);
    denom += out.responsibilities[j];
  }
  for (auto& r : out.responsibilities) r /= denom;
  out.log_density =
      mx + std::log(denom) -
      0.5 * static_cast<double>(dim) * std::log(2.0 * std::numbers::pi * var);
  return out;
}

}  // namespace

double log_noised_mixture_density(const std::vector<double>& z_t,
                                  const std::vector<GaussianMode>& bucket,
                                  int t, const NoiseSchedule& schedule) {
  return eval_noised_mixture(z_t, bucket, t, schedule).log_density;
}

std::vector<double> noised_mixture_score(const std::vector<double>& z_t,
                                         const std::vector<GaussianMode>& bucket,
                                         int t, const NoiseSchedule& schedule) {
  const auto eval = eval_noised_mixture(z_t, bucket, t, schedule);
  const double ab = schedule.alpha_bar(t);
  const double var = 1.0 - ab;
  const double sq_ab = std::sqrt(ab);
  const std::size_t dim = z_t.size();
  // score = -(z_t - sqrt(ab) * sum_k r_k mu_k) / var
  std::vector<double> mean(dim, 0.0);
  for (std::size_t j = 0; j < bucket.size(); ++j)
    kernels::active().add_scaled(mean.data(), eval.responsibilities[j],
                                 bucket[j].mu.data(), dim);
  std::vector<double> s(dim);
  for (std::size_t i = 0; i < dim; ++i)
    s[i] = (sq_ab * mean[i] - z_t[i]) / var;
  return s;
}

std::vector<double> predict_noise(const std::vector<double>& z_t,
                                  const std::vector<GaussianMode>& bucket,
                                  int t, const NoiseSchedule& schedule) {
  auto s = noised_mixture_score(z_t, bucket, t, schedule);
  const double ab = schedule.alpha_bar(t);
  kernels::active().scale(s.data(), -std::sqrt(1.0 - ab), s.size());
  return s;
}

std::vector<GaussianMode> condition(const ViewLandscape& landscape,
                                    const std::string& view_label,
                                    const ConditionKey& key) {
  const auto& modes = landscape.bucket(view_label);
  std::vector<GaussianMode> selected;
  for (const auto& m : modes)
    if (m.label == key.skeleton_label) selected.push_back(m);
  if (selected.empty()) {
    std::string labels;
    for (const auto& m : modes) labels += " '" + m.label + "'";
    throw std::runtime_error("condition '" + key.skeleton_label +
                             "' matches no mode in bucket '" + view_label +
                             "' (available:" + labels + ")");
  }
  double wsum = 0.0;
  for (const auto& m : selected) wsum += m.weight;
  for (auto& m : selected) m.weight /= wsum;
  return selected;
}

InitScoreResult expected_init_score(const std::vector<Image>& init_views,
                                    const std::vector<Image>& latent_views,
                                    int t, int n_eps,
                                    const LatentCodec& codec,
                                    const NoiseSchedule& schedule, Rng& rng,
                                    double noise_scale) {
  if (init_views.size() != latent_views.size() || init_views.empty())
    throw std::invalid_argument("expected_init_score: unpaired view lists");
  if (n_eps < 1)
    throw std::invalid_argument("expected_init_score: n_eps must be >= 1");

  const double ab = schedule.alpha_bar(t);
  const double var = 1.0 - ab;
  const double sq_ab = std::sqrt(ab);
  const double sq_var = std::sqrt(var);
  const std::size_t dim = codec.latent_dim();
  const auto& ops = kernels::active();

  std::vector<double> formula_acc(dim, 0.0);
  std::vector<double> mc_acc(dim, 0.0);
  std::vector<double> eps(dim), eps_bar(dim), term(dim);

  for (std::size_t v = 0; v < init_views.size(); ++v) {
    const auto z_init = codec.encode(init_views[v]);
    const auto z_latent = codec.encode(latent_views[v]);

    std::fill(eps_bar.begin(), eps_bar.end(), 0.0);
    for (int j = 0; j < n_eps; ++j) {
      rng.fill_gaussian(eps.data(), dim);
      if (noise_scale != 1.0) ops.scale(eps.data(), noise_scale, dim);
      ops.add_scaled(eps_bar.data(), 1.0 / n_eps, eps.data(), dim);

      // exact score of N(sqrt(ab) z_latent, var I) at the noised init
      for (std::size_t i = 0; i < dim; ++i) {
        const double z_t = sq_ab * z_init[i] + sq_var * eps[i];
        mc_acc[i] += -(z_t - sq_ab * z_latent[i]) / var / n_eps;
      }
    }

    // closed form: -(sqrt(ab)(z_init - z_latent) + sqrt(var) eps_bar) / var
    for (std::size_t i = 0; i < dim; ++i)
      term[i] = -(sq_ab * (z_init[i] - z_latent[i]) + sq_var * eps_bar[i]) / var;
    ops.add_scaled(formula_acc.data(), 1.0, term.data(), dim);
  }

  const double inv_views = 1.0 / static_cast<double>(init_views.size());
  InitScoreResult out;
  out.formula_value =
      std::sqrt(ops.sq_norm(formula_acc.data(), dim)) * inv_views;
  out.mc_value = std::sqrt(ops.sq_norm(mc_acc.data(), dim)) * inv_views;
  return out;
}

}  // namespace sdslab
