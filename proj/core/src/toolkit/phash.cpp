#include "dr/toolkit/phash.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <numbers>
#include <string>

#include "dr/error.hpp"

namespace dr::toolkit {

namespace {

constexpr std::size_t kSide = 32;
constexpr std::size_t kBlock = 8;

// Area-weighted resample along one axis: out[k] averages src over
// [k * n / m, (k + 1) * n / m).
std::vector<std::vector<std::pair<std::size_t, double>>> area_weights(std::size_t n, std::size_t m) {
  std::vector<std::vector<std::pair<std::size_t, double>>> w(m);
  const double scale = static_cast<double>(n) / static_cast<double>(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double lo = static_cast<double>(k) * scale;
    const double hi = static_cast<double>(k + 1) * scale;
    auto first = static_cast<std::size_t>(std::floor(lo));
    for (std::size_t s = first; s < n && static_cast<double>(s) < hi; ++s) {
      const double overlap =
          std::min(hi, static_cast<double>(s + 1)) - std::max(lo, static_cast<double>(s));
      if (overlap > 0) w[k].emplace_back(s, overlap / scale);
    }
  }
  return w;
}

std::array<double, kSide * kSide> resample(const GrayImage& img) {
  const auto wx = area_weights(img.width, kSide);
  const auto wy = area_weights(img.height, kSide);
  std::vector<double> rows(img.height * kSide, 0.0);
  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t x = 0; x < kSide; ++x) {
      double acc = 0;
      for (auto [s, w] : wx[x]) acc += w * img.pixels[y * img.width + s];
      rows[y * kSide + x] = acc;
    }
  }
  std::array<double, kSide * kSide> out{};
  for (std::size_t y = 0; y < kSide; ++y) {
    for (std::size_t x = 0; x < kSide; ++x) {
      double acc = 0;
      for (auto [s, w] : wy[y]) acc += w * rows[s * kSide + x];
      out[y * kSide + x] = acc;
    }
  }
  return out;
}

const std::array<double, (kBlock + 1) * kSide>& dct_basis() {
  static const auto basis = [] {
    std::array<double, (kBlock + 1) * kSide> b{};
    for (std::size_t u = 0; u <= kBlock; ++u) {
      const double alpha = u == 0 ? std::sqrt(1.0 / kSide) : std::sqrt(2.0 / kSide);
      for (std::size_t x = 0; x < kSide; ++x) {
        b[u * kSide + x] =
            alpha * std::cos(std::numbers::pi * static_cast<double>((2 * x + 1) * u) / (2.0 * kSide));
      }
    }
    return b;
  }();
  return basis;
}

}  // namespace

PerceptualHash phash64(const GrayImage& image) {
  if (image.width == 0 || image.height == 0 || image.pixels.size() != image.width * image.height) {
    throw Error(ErrorCode::kUndecodableImage, "raster is empty or its size does not match");
  }
  const auto px = resample(image);
  const auto& basis = dct_basis();

  // Row transform restricted to frequencies 1..8, then the column transform.
  std::array<double, kSide * kBlock> tmp{};
  for (std::size_t y = 0; y < kSide; ++y) {
    for (std::size_t v = 1; v <= kBlock; ++v) {
      double acc = 0;
      for (std::size_t x = 0; x < kSide; ++x) acc += basis[v * kSide + x] * px[y * kSide + x];
      tmp[y * kBlock + (v - 1)] = acc;
    }
  }
  std::array<double, kBlock * kBlock> coeffs{};
  for (std::size_t u = 1; u <= kBlock; ++u) {
    for (std::size_t v = 0; v < kBlock; ++v) {
      double acc = 0;
      for (std::size_t y = 0; y < kSide; ++y) acc += basis[u * kSide + y] * tmp[y * kBlock + v];
      coeffs[(u - 1) * kBlock + v] = acc;
    }
  }

  auto sorted = coeffs;
  std::sort(sorted.begin(), sorted.end());
  const double median = 0.5 * (sorted[31] + sorted[32]);
  PerceptualHash h;
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    if (coeffs[k] > median) h.bits |= std::uint64_t{1} << (63 - k);
  }
  return h;
}

int hamming_distance(PerceptualHash a, PerceptualHash b) { return std::popcount(a.bits ^ b.bits); }

bool should_suppress_image(PerceptualHash prev, PerceptualHash cur, int max_distance) {
  return hamming_distance(prev, cur) <= max_distance;
}

GrayImage decode_pgm(std::string_view bytes) {
  std::size_t pos = 0;
  auto fail = [](const std::string& why) -> GrayImage {
    throw Error(ErrorCode::kUndecodableImage, "invalid PGM: " + why);
  };
  auto skip_ws = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_uint = [&]() -> std::size_t {
    skip_ws();
    if (pos >= bytes.size() || !std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      fail("expected a number");
    }
    std::size_t v = 0;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      v = v * 10 + static_cast<std::size_t>(bytes[pos] - '0');
      if (v > (1u << 24)) fail("number too large");
      ++pos;
    }
    return v;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5')) {
    return fail("missing P2/P5 magic");
  }
  const bool binary = bytes[1] == '5';
  pos = 2;
  GrayImage img;
  img.width = read_uint();
  img.height = read_uint();
  const std::size_t maxval = read_uint();
  if (img.width == 0 || img.height == 0) return fail("zero dimension");
  if (maxval == 0 || maxval > 255) return fail("only 8-bit PGM is supported");
  const std::size_t n = img.width * img.height;
  img.pixels.resize(n);
  if (binary) {
    ++pos;  // single whitespace after maxval
    if (bytes.size() < pos + n) return fail("truncated pixel data");
    for (std::size_t i = 0; i < n; ++i) {
      img.pixels[i] = static_cast<std::uint8_t>(
          static_cast<unsigned>(static_cast<unsigned char>(bytes[pos + i])) * 255 / maxval);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const auto v = read_uint();
      if (v > maxval) return fail("sample exceeds maxval");
      img.pixels[i] = static_cast<std::uint8_t>(v * 255 / maxval);
    }
  }
  return img;
}

bool ScreenshotGate::admit(const GrayImage& screenshot) {
  const auto h = phash64(screenshot);
  const bool suppress = last_ && should_suppress_image(*last_, h, max_distance_);
  last_ = h;
  return !suppress;
}

}  // namespace dr::toolkit
