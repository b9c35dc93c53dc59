// Copyright 2026 The gradrev Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gradrev/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "gradrev/errors.hpp"

namespace gradrev {

double GrayImage::sample_clamped(double x, double y) const {
  x = std::clamp(x, 0.0, static_cast<double>(width - 1));
  y = std::clamp(y, 0.0, static_cast<double>(height - 1));
  const std::size_t x0 = static_cast<std::size_t>(x);
  const std::size_t y0 = static_cast<std::size_t>(y);
  const std::size_t x1 = std::min(x0 + 1, width - 1);
  const std::size_t y1 = std::min(y0 + 1, height - 1);
  const double fx = x - static_cast<double>(x0);
  const double fy = y - static_cast<double>(y0);
  const double top = at(x0, y0) * (1.0 - fx) + at(x1, y0) * fx;
  const double bottom = at(x0, y1) * (1.0 - fx) + at(x1, y1) * fx;
  return top * (1.0 - fy) + bottom * fy;
}

namespace {

// Next whitespace-delimited token, skipping '#' comments per the PGM spec.
std::string next_token(std::istream& in) {
  std::string token;
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  while (c != EOF && !std::isspace(c)) {
    token.push_back(static_cast<char>(c));
    c = in.get();
  }
  return token;
}

std::size_t parse_count(const std::string& token, const std::string& what,
                        const std::filesystem::path& path) {
  if (token.empty() ||
      !std::all_of(token.begin(), token.end(),
                   [](char c) { return c >= '0' && c <= '9'; })) {
    throw IngestionError("read_pgm: bad " + what + " '" + token + "' in " +
                         path.string());
  }
  return static_cast<std::size_t>(std::stoull(token));
}

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("read_pgm: cannot open " + path.string());

  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (in.gcount() != 2 || magic[0] != 'P' || magic[1] != '5') {
    throw IngestionError("read_pgm: not a binary PGM (bad magic) in " +
                         path.string());
  }
  const std::size_t width = parse_count(next_token(in), "width", path);
  const std::size_t height = parse_count(next_token(in), "height", path);
  const std::size_t maxval = parse_count(next_token(in), "maxval", path);
  if (width == 0 || height == 0 || maxval == 0 || maxval > 255) {
    throw IngestionError("read_pgm: unsupported header (" +
                         std::to_string(width) + "x" + std::to_string(height) +
                         ", maxval " + std::to_string(maxval) + ") in " +
                         path.string());
  }
  // The header terminator is the single whitespace already consumed by
  // next_token; raster bytes follow immediately.
  std::vector<unsigned char> raw(width * height);
  in.read(reinterpret_cast<char*>(raw.data()),
          static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
    throw IngestionError("read_pgm: truncated raster in " + path.string());
  }

  GrayImage image(width, height);
  const double denom = static_cast<double>(maxval);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    image.pixels[i] = static_cast<double>(raw[i]) / denom;
  }
  return image;
}

void write_pgm(const GrayImage& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestionError("write_pgm: cannot open " + path.string());
  out << "P5\n" << image.width << " " << image.height << "\n255\n";
  std::vector<unsigned char> raw(image.pixels.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double v = std::clamp(image.pixels[i], 0.0, 1.0);
    raw[i] = static_cast<unsigned char>(std::lround(v * 255.0));
  }
  out.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size()));
  if (!out) throw IngestionError("write_pgm: write failed for " + path.string());
}

}  // namespace gradrev
