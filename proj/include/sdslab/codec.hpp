// Copyright 2026 The sdslab Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "sdslab/image.hpp"

namespace sdslab {

// Linear image <-> latent codec: encode averages each (factor x factor)
// pixel block across channels into one latent cell; decode upsamples
// nearest-neighbor and replicates channels. Constant images round-trip
// exactly and both maps are linear, which is everything the score algebra
// relies on.
struct LatentCodec {
  int image_size = 64;
  int latent_size = 16;
  int channels = 3;

  LatentCodec() = default;
  LatentCodec(int image_size_, int latent_size_, int channels_ = 3);

  int factor() const { return image_size / latent_size; }
  std::size_t latent_dim() const {
    return static_cast<std::size_t>(latent_size) * latent_size;
  }

  std::vector<double> encode(const Image& img) const;
  Image decode(const std::vector<double>& latent) const;

  // Adjoint of encode: distributes a latent-space gradient back onto image
  // pixels (the transpose of the averaging map).
  Image encode_adjoint(const std::vector<double>& latent_grad) const;
};

}  // namespace sdslab
