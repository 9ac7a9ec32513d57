// Copyright 2026 The sdslab Authors
// SPDX-License-Identifier: Apache-2.0
#include "sdslab/kernels.hpp"

namespace sdslab::kernels {
namespace {

const Ops* detect() {
#if defined(SDSLAB_HAVE_AVX2_TU)
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
    return &avx2_ops;
#endif
  return &scalar_ops;
}

const Ops*& active_slot() {
  static const Ops* current = detect();
  return current;
}

}  // namespace

const Ops& active() { return *active_slot(); }

bool select(const std::string& name) {
  if (name == "scalar") {
    active_slot() = &scalar_ops;
    return true;
  }
#if defined(SDSLAB_HAVE_AVX2_TU)
  if (name == "avx2" && __builtin_cpu_supports("avx2") &&
      __builtin_cpu_supports("fma")) {
    active_slot() = &avx2_ops;
    return true;
  }
#endif
  return false;
}

std::vector<std::string> available() {
  std::vector<std::string> out = {"scalar"};
#if defined(SDSLAB_HAVE_AVX2_TU)
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
    out.push_back("avx2");
#endif
  return out;
}

}  // namespace sdslab::kernels
