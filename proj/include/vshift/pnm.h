#ifndef VSHIFT_PNM_H_
#define VSHIFT_PNM_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "vshift/image.h"

namespace vshift {
namespace pnm {

// Single-channel raster read from a P5 file.
struct GrayImage {
  int width = 0;
  int height = 0;
  int maxval = 0;
  std::vector<std::uint16_t> values;  // row-major
};

// Binary PPM (P6, maxval 255).
std::string EncodePpm(const ImageBuffer& image);
ImageBuffer DecodePpm(std::string_view bytes);

// Binary PGM (P5). maxval <= 255 stores one byte per sample, otherwise two
// bytes, most significant first.
std::string EncodePgm(int width, int height, int maxval,
                      std::span<const std::uint16_t> values);
GrayImage DecodePgm(std::string_view bytes);

void WritePpm(const std::filesystem::path& path, const ImageBuffer& image);
ImageBuffer ReadPpm(const std::filesystem::path& path);

void WritePgm(const std::filesystem::path& path, int width, int height,
              int maxval, std::span<const std::uint16_t> values);
GrayImage ReadPgm(const std::filesystem::path& path);

// Whole-file helpers shared by the readers/writers above.
std::string ReadFileBytes(const std::filesystem::path& path);
void WriteFileBytes(const std::filesystem::path& path, std::string_view bytes);

}  // namespace pnm
}  // namespace vshift

#endif  // VSHIFT_PNM_H_
