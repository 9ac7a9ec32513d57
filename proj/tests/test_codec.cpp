// Copyright 2026 The sdslab Authors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "sdslab/codec.hpp"
#include "sdslab/rng.hpp"

using namespace sdslab;

namespace {

Image random_image(Rng& rng, int size, int channels) {
  Image img(size, size, channels);
  for (auto& v : img.values) v = rng.uniform(0.0, 1.0);
  return img;
}

}  // namespace

TEST_CASE("constant images round-trip exactly") {
  const LatentCodec codec(64, 16, 3);
  Image img(64, 64, 3);
  for (auto& v : img.values) v = 0.37;
  const auto z = codec.encode(img);
  for (double v : z) CHECK(v == doctest::Approx(0.37).epsilon(1e-15));
  const Image back = codec.decode(z);
  for (std::size_t i = 0; i < img.values.size(); ++i)
    CHECK(back.values[i] == doctest::Approx(0.37).epsilon(1e-15));
  // decode-range images are fixed points of decode(encode(.))
  Rng rng(5);
  const Image in_range = codec.decode(codec.encode(random_image(rng, 64, 3)));
  const Image twice = codec.decode(codec.encode(in_range));
  for (std::size_t i = 0; i < in_range.values.size(); ++i)
    CHECK(twice.values[i] == doctest::Approx(in_range.values[i]).epsilon(1e-13));
}

TEST_CASE("encode is linear") {
  const LatentCodec codec(64, 16, 3);
  Rng rng(7);
  const Image x = random_image(rng, 64, 3);
  const Image y = random_image(rng, 64, 3);
  const double a = 1.7, b = -0.45;
  Image combo(64, 64, 3);
  for (std::size_t i = 0; i < combo.values.size(); ++i)
    combo.values[i] = a * x.values[i] + b * y.values[i];
  const auto zx = codec.encode(x);
  const auto zy = codec.encode(y);
  const auto zc = codec.encode(combo);
  for (std::size_t i = 0; i < zc.size(); ++i)
    CHECK(std::abs(zc[i] - (a * zx[i] + b * zy[i])) < 1e-12);
}

TEST_CASE("encode_adjoint is the transpose of encode") {
  const LatentCodec codec(32, 8, 3);
  Rng rng(9);
  const Image x = random_image(rng, 32, 3);
  std::vector<double> g(codec.latent_dim());
  for (auto& v : g) v = rng.uniform(-1.0, 1.0);
  // <encode(x), g> == <x, encode_adjoint(g)>
  const auto z = codec.encode(x);
  double lhs = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) lhs += z[i] * g[i];
  const Image adj = codec.encode_adjoint(g);
  double rhs = 0.0;
  for (std::size_t i = 0; i < x.values.size(); ++i)
    rhs += x.values[i] * adj.values[i];
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("codec rejects bad shapes") {
  CHECK_THROWS_AS(LatentCodec(64, 15, 3), std::invalid_argument);
  const LatentCodec codec(64, 16, 3);
  Image wrong(32, 32, 3);
  CHECK_THROWS_AS(codec.encode(wrong), std::invalid_argument);
  std::vector<double> bad(7);
  CHECK_THROWS_AS(codec.decode(bad), std::invalid_argument);
}
