// Copyright 2026 The sdslab Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace sdslab::kernels {

// Elementwise / reduction kernels used by the arithmetic inner loops
// (field transforms, optimizer updates, latent algebra, loss reductions).
// Scalar reference implementations are the semantic ground truth; the AVX2
// variants are selected at runtime and equivalence-tested against them.
//
// exp/softplus/logistic accept arguments in [-690, 690]; larger magnitudes
// are clamped (the clamp is monotone and far below any value these loops
// produce from finite parameters).
struct Ops {
  const char* name;

  // y = a*x + b*y
  void (*axpby)(double a, const double* x, double b, double* y, std::size_t n);
  // z = a*x + b*y
  void (*axpbyz)(double a, const double* x, double b, const double* y,
                 double* z, std::size_t n);
  // y += a*x
  void (*add_scaled)(double* y, double a, const double* x, std::size_t n);
  void (*scale)(double* y, double a, std::size_t n);
  double (*dot)(const double* x, const double* y, std::size_t n);
  double (*sum)(const double* x, std::size_t n);
  double (*sq_norm)(const double* x, std::size_t n);
  void (*min_max)(const double* x, std::size_t n, double* mn, double* mx);
  void (*exp_array)(const double* x, double* y, std::size_t n);
  void (*softplus)(const double* x, double* y, std::size_t n);
  void (*logistic)(const double* x, double* y, std::size_t n);
  // Fused adaptive-moment update:
  //   m = b1*m + (1-b1)*g; v = b2*v + (1-b2)*g^2
  //   p -= lr * (m/bc1) / (sqrt(v/bc2) + eps)
  void (*adam_step)(double* p, double* m, double* v, const double* g,
                    std::size_t n, double lr, double beta1, double beta2,
                    double eps, double bc1, double bc2);
};

extern const Ops scalar_ops;
#if defined(SDSLAB_HAVE_AVX2_TU)
extern const Ops avx2_ops;
#endif

// Active backend (auto-detected on first use; AVX2 preferred when the CPU
// supports it).
const Ops& active();

// Force a backend by name ("scalar", "avx2"). Returns false if unavailable.
bool select(const std::string& name);

std::vector<std::string> available();

}  // namespace sdslab::kernels
