#include "vshift/image.h"

#include <cmath>
#include <string>

#include "vshift/errors.h"

namespace vshift {

ImageBuffer::ImageBuffer(int width, int height)
    : width_(width), height_(height) {
  if (width < 0 || height < 0) {
    throw InvalidInput("image dimensions must be non-negative");
  }
  data_.assign(static_cast<std::size_t>(width) * height * 3, 0);
}

DepthMap::DepthMap(int width, int height) : width_(width), height_(height) {
  if (width < 0 || height < 0) {
    throw InvalidInput("depth map dimensions must be non-negative");
  }
  values_.assign(static_cast<std::size_t>(width) * height, 0.0);
}

void DepthMap::set(int x, int y, double meters) {
  if (!std::isfinite(meters) || meters <= 0.0) {
    throw InvalidInput("depth must be finite and positive, got " +
                       std::to_string(meters));
  }
  values_[Index(x, y)] = meters;
}

DepthMap DepthFromStored(int width, int height,
                         std::span<const std::uint16_t> stored,
                         double depth_scale) {
  if (!(depth_scale > 0.0) || !std::isfinite(depth_scale)) {
    throw InvalidInput("depth_scale must be positive");
  }
  if (stored.size() != static_cast<std::size_t>(width) * height) {
    throw InvalidInput("stored depth size does not match dimensions");
  }
  DepthMap depth(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const std::uint16_t v = stored[static_cast<std::size_t>(y) * width + x];
      if (v != 0) depth.set(x, y, v * depth_scale);
    }
  }
  return depth;
}

std::vector<std::uint16_t> DepthToStored(const DepthMap& depth,
                                         double depth_scale) {
  if (!(depth_scale > 0.0) || !std::isfinite(depth_scale)) {
    throw InvalidInput("depth_scale must be positive");
  }
  std::vector<std::uint16_t> out(
      static_cast<std::size_t>(depth.width()) * depth.height(), 0);
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      if (!depth.valid(x, y)) continue;
      const double units = std::floor(depth.at(x, y) / depth_scale + 0.5);
      if (units >= 1.0 && units <= 65535.0) {
        out[static_cast<std::size_t>(y) * depth.width() + x] =
            static_cast<std::uint16_t>(units);
      }
    }
  }
  return out;
}

}  // namespace vshift
