// Copyright 2026 The sdslab Authors
// SPDX-License-Identifier: Apache-2.0
#include "sdslab/codec.hpp"

#include <stdexcept>
#include <string>

namespace sdslab {

LatentCodec::LatentCodec(int image_size_, int latent_size_, int channels_)
    : image_size(image_size_), latent_size(latent_size_), channels(channels_) {
  if (latent_size < 1 || image_size < latent_size ||
      image_size % latent_size != 0)
    throw std::invalid_argument("latent size must evenly divide image size");
  if (channels != 1 && channels != 3)
    throw std::invalid_argument("codec supports 1 or 3 channels");
}

std::vector<double> LatentCodec::encode(const Image& img) const {
  if (img.width != image_size || img.height != image_size ||
      img.channels != channels)
    throw std::invalid_argument(
        "encode: image shape mismatch, got " + std::to_string(img.width) +
        "x" + std::to_string(img.height) + "x" + std::to_string(img.channels));
  const int f = factor();
  const double inv = 1.0 / (static_cast<double>(f) * f * channels);
  std::vector<double> latent(latent_dim(), 0.0);
  for (int ly = 0; ly < latent_size; ++ly) {
    for (int lx = 0; lx < latent_size; ++lx) {
      double acc = 0.0;
      for (int dy = 0; dy < f; ++dy)
        for (int dx = 0; dx < f; ++dx)
          for (int c = 0; c < channels; ++c)
            acc += img.at(lx * f + dx, ly * f + dy, c);
      latent[static_cast<std::size_t>(ly) * latent_size + lx] = acc * inv;
    }
  }
  return latent;
}

Image LatentCodec::decode(const std::vector<double>& latent) const {
  if (latent.size() != latent_dim())
    throw std::invalid_argument("decode: latent dimension mismatch");
  const int f = factor();
  Image img(image_size, image_size, channels);
  for (int y = 0; y < image_size; ++y)
    for (int x = 0; x < image_size; ++x) {
      const double v =
          latent[static_cast<std::size_t>(y / f) * latent_size + x / f];
      for (int c = 0; c < channels; ++c) img.at(x, y, c) = v;
    }
  return img;
}

Image LatentCodec::encode_adjoint(const std::vector<double>& latent_grad) const {
  if (latent_grad.size() != latent_dim())
    throw std::invalid_argument("encode_adjoint: latent dimension mismatch");
  const int f = factor();
  const double inv = 1.0 / (static_cast<double>(f) * f * channels);
  Image img(image_size, image_size, channels);
  for (int y = 0; y < image_size; ++y)
    for (int x = 0; x < image_size; ++x) {
      const double g =
          latent_grad[static_cast<std::size_t>(y / f) * latent_size + x / f] *
          inv;
      for (int c = 0; c < channels; ++c) img.at(x, y, c) = g;
    }
  return img;
}

}  // namespace sdslab
