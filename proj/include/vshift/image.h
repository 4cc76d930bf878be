#ifndef VSHIFT_IMAGE_H_
#define VSHIFT_IMAGE_H_

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "vshift/memory_tracker.h"

namespace vshift {

template <typename T>
using TrackedVector = std::vector<T, TrackedAllocator<T>>;

using Rgb = std::array<std::uint8_t, 3>;

// 8-bit RGB image, row-major, top-left origin, interleaved channels.
class ImageBuffer {
 public:
  ImageBuffer() = default;
  // Black image. Throws InvalidInput on negative dimensions.
  ImageBuffer(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return width_ == 0 || height_ == 0; }

  Rgb at(int x, int y) const {
    const std::size_t i = Index(x, y);
    return {data_[i], data_[i + 1], data_[i + 2]};
  }
  void set(int x, int y, const Rgb& rgb) {
    const std::size_t i = Index(x, y);
    data_[i] = rgb[0];
    data_[i + 1] = rgb[1];
    data_[i + 2] = rgb[2];
  }

  std::span<const std::uint8_t> bytes() const { return data_; }
  std::span<std::uint8_t> bytes() { return data_; }

  bool operator==(const ImageBuffer& other) const {
    return width_ == other.width_ && height_ == other.height_ &&
           data_ == other.data_;
  }

 private:
  std::size_t Index(int x, int y) const {
    return (static_cast<std::size_t>(y) * width_ + x) * 3;
  }

  int width_ = 0;
  int height_ = 0;
  TrackedVector<std::uint8_t> data_;
};

// Per-pixel metric depth along camera +z. Invalid pixels hold exactly 0.
class DepthMap {
 public:
  DepthMap() = default;
  // All pixels invalid.
  DepthMap(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }

  double at(int x, int y) const { return values_[Index(x, y)]; }
  bool valid(int x, int y) const { return values_[Index(x, y)] > 0.0; }

  // Stores a valid depth. Throws InvalidInput unless finite and > 0.
  void set(int x, int y, double meters);
  void invalidate(int x, int y) { values_[Index(x, y)] = 0.0; }

  std::span<const double> values() const { return values_; }

  bool operator==(const DepthMap& other) const = default;

 private:
  std::size_t Index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  TrackedVector<double> values_;
};

// Converts stored 16-bit depth units to meters (0 stays invalid).
DepthMap DepthFromStored(int width, int height,
                         std::span<const std::uint16_t> stored,
                         double depth_scale);

// Quantizes meters to 16-bit units with round-half-up. Depths that do not fit
// (or invalid pixels) are stored as 0.
std::vector<std::uint16_t> DepthToStored(const DepthMap& depth,
                                         double depth_scale);

}  // namespace vshift

#endif  // VSHIFT_IMAGE_H_
