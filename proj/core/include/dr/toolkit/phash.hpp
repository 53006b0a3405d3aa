#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace dr::toolkit {

struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, width * height
};

struct PerceptualHash {
  std::uint64_t bits = 0;

  bool operator==(const PerceptualHash&) const = default;
};

/// DCT perceptual hash: area-resample to 32x32, 2-D DCT-II, keep the 8x8
/// lowest non-DC frequencies, threshold at their median. Throws
/// dr::Error(kUndecodableImage) for empty or inconsistent rasters.
PerceptualHash phash64(const GrayImage& image);

int hamming_distance(PerceptualHash a, PerceptualHash b);

inline constexpr int kDefaultSuppressionDistance = 10;

/// True when the two screenshots are close enough that the image can be
/// dropped in favour of a text-only observation.
bool should_suppress_image(PerceptualHash prev, PerceptualHash cur, int max_distance);

/// Binary (P5) and ASCII (P2) PGM decoder.
GrayImage decode_pgm(std::string_view bytes);

/// Compares each browser screenshot with the one taken after the previous action.
class ScreenshotGate {
 public:
  explicit ScreenshotGate(int max_distance = kDefaultSuppressionDistance)
      : max_distance_(max_distance) {}

  /// True when the image should be sent; false when it is suppressed.
  bool admit(const GrayImage& screenshot);

 private:
  int max_distance_;
  std::optional<PerceptualHash> last_;
};

}  // namespace dr::toolkit
