// Copyright 2026 The sdslab Authors
// SPDX-License-Identifier: Apache-2.0
#include "sdslab/image.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "sdslab/rng.hpp"

namespace sdslab {

namespace {

unsigned char quantize(double v) {
  const double c = std::clamp(v, 0.0, 1.0);
  return static_cast<unsigned char>(std::lround(c * 255.0));
}

void append_le32(std::string& out, std::int32_t v) {
  for (int i = 0; i < 4; ++i)
    out.push_back(static_cast<char>((static_cast<std::uint32_t>(v) >> (8 * i)) & 0xFF));
}

}  // namespace

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& bytes) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

void write_pgm(const std::filesystem::path& path, const Image& gray) {
  if (gray.channels != 1)
    throw std::invalid_argument("write_pgm expects a single-channel image");
  std::string bytes = "P5\n" + std::to_string(gray.width) + " " +
                      std::to_string(gray.height) + "\n255\n";
  bytes.reserve(bytes.size() + gray.values.size());
  for (double v : gray.values) bytes.push_back(static_cast<char>(quantize(v)));
  write_file_atomic(path, bytes);
}

void write_ppm(const std::filesystem::path& path, const Image& rgb) {
  if (rgb.channels != 3)
    throw std::invalid_argument("write_ppm expects a three-channel image");
  std::string bytes = "P6\n" + std::to_string(rgb.width) + " " +
                      std::to_string(rgb.height) + "\n255\n";
  bytes.reserve(bytes.size() + rgb.values.size());
  for (double v : rgb.values) bytes.push_back(static_cast<char>(quantize(v)));
  write_file_atomic(path, bytes);
}

Image read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string magic;
  in >> magic;
  if (magic != "P5" && magic != "P6")
    throw std::runtime_error(path.string() + ": unsupported PNM magic");
  int w = 0, h = 0, maxval = 0;
  in >> w >> h >> maxval;
  in.get();  // single whitespace after header
  if (w <= 0 || h <= 0 || maxval != 255)
    throw std::runtime_error(path.string() + ": bad PNM header");
  const int c = magic == "P5" ? 1 : 3;
  Image img(w, h, c);
  std::vector<unsigned char> raw(img.values.size());
  in.read(reinterpret_cast<char*>(raw.data()),
          static_cast<std::streamsize>(raw.size()));
  if (!in) throw std::runtime_error(path.string() + ": truncated PNM data");
  for (std::size_t i = 0; i < raw.size(); ++i)
    img.values[i] = raw[i] / 255.0;
  return img;
}

void write_depth(const std::filesystem::path& path, const Image& depth) {
  if (depth.channels != 1)
    throw std::invalid_argument("write_depth expects a single-channel image");
  std::string bytes = "SDSLAB-DEPTH";
  append_le32(bytes, depth.height);
  append_le32(bytes, depth.width);
  bytes.reserve(bytes.size() + depth.values.size() * 4);
  for (double v : depth.values) {
    const float f = static_cast<float>(v);
    char buf[4];
    std::memcpy(buf, &f, 4);
    bytes.append(buf, 4);
  }
  write_file_atomic(path, bytes);
}

std::uint64_t file_checksum(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[65536];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    h = fnv1a64(buf, static_cast<std::size_t>(in.gcount()), h);
    if (!in) break;
  }
  return h;
}

std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace sdslab
