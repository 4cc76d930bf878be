#include "vshift/pnm.h"

#include <cctype>
#include <fstream>
#include <sstream>

#include "vshift/errors.h"

namespace vshift {
namespace pnm {
namespace {

struct Header {
  std::string magic;
  int width = 0;
  int height = 0;
  int maxval = 0;
  std::size_t data_offset = 0;
};

class HeaderParser {
 public:
  explicit HeaderParser(std::string_view bytes) : bytes_(bytes) {}

  Header Parse() {
    Header h;
    if (bytes_.size() < 2 || bytes_[0] != 'P') {
      throw FormatError("not a PNM file: bad magic");
    }
    h.magic = std::string(bytes_.substr(0, 2));
    pos_ = 2;
    h.width = NextInt("width");
    h.height = NextInt("height");
    h.maxval = NextInt("maxval");
    // Exactly one whitespace byte separates the header from the raster.
    if (pos_ >= bytes_.size() ||
        !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      throw FormatError("truncated PNM header");
    }
    h.data_offset = pos_ + 1;
    if (h.width <= 0 || h.height <= 0) {
      throw FormatError("PNM dimensions must be positive");
    }
    if (h.maxval <= 0 || h.maxval > 65535) {
      throw FormatError("PNM maxval out of range");
    }
    return h;
  }

 private:
  void SkipSpaceAndComments() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  int NextInt(const char* what) {
    SkipSpaceAndComments();
    long value = 0;
    std::size_t digits = 0;
    while (pos_ < bytes_.size() &&
           std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000'000) {
        throw FormatError(std::string("PNM ") + what + " too large");
      }
      ++pos_;
      ++digits;
    }
    if (digits == 0) {
      throw FormatError(std::string("malformed PNM header: missing ") + what);
    }
    return static_cast<int>(value);
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

std::string HeaderString(const char* magic, int width, int height,
                         int maxval) {
  std::ostringstream out;
  out << magic << '\n' << width << ' ' << height << '\n' << maxval << '\n';
  return out.str();
}

}  // namespace

std::string EncodePpm(const ImageBuffer& image) {
  std::string out = HeaderString("P6", image.width(), image.height(), 255);
  const auto bytes = image.bytes();
  out.append(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  return out;
}

ImageBuffer DecodePpm(std::string_view bytes) {
  const Header h = HeaderParser(bytes).Parse();
  if (h.magic != "P6") throw FormatError("expected P6, found " + h.magic);
  if (h.maxval != 255) throw FormatError("only 8-bit PPM is supported");
  const std::size_t need = static_cast<std::size_t>(h.width) * h.height * 3;
  if (bytes.size() - h.data_offset < need) {
    throw FormatError("truncated PPM raster");
  }
  ImageBuffer image(h.width, h.height);
  auto dst = image.bytes();
  std::copy_n(bytes.data() + h.data_offset, need,
              reinterpret_cast<char*>(dst.data()));
  return image;
}

std::string EncodePgm(int width, int height, int maxval,
                      std::span<const std::uint16_t> values) {
  if (maxval <= 0 || maxval > 65535) throw InvalidInput("PGM maxval");
  if (values.size() != static_cast<std::size_t>(width) * height) {
    throw InvalidInput("PGM value count does not match dimensions");
  }
  std::string out = HeaderString("P5", width, height, maxval);
  const bool wide = maxval > 255;
  out.reserve(out.size() + values.size() * (wide ? 2 : 1));
  for (std::uint16_t v : values) {
    if (v > maxval) throw InvalidInput("PGM sample exceeds maxval");
    if (wide) {
      out.push_back(static_cast<char>(v >> 8));
      out.push_back(static_cast<char>(v & 0xff));
    } else {
      out.push_back(static_cast<char>(v));
    }
  }
  return out;
}

GrayImage DecodePgm(std::string_view bytes) {
  const Header h = HeaderParser(bytes).Parse();
  if (h.magic != "P5") throw FormatError("expected P5, found " + h.magic);
  const bool wide = h.maxval > 255;
  const std::size_t count = static_cast<std::size_t>(h.width) * h.height;
  const std::size_t need = count * (wide ? 2 : 1);
  if (bytes.size() - h.data_offset < need) {
    throw FormatError("truncated PGM raster");
  }
  GrayImage g{h.width, h.height, h.maxval, std::vector<std::uint16_t>(count)};
  const auto* p =
      reinterpret_cast<const unsigned char*>(bytes.data() + h.data_offset);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint16_t v =
        wide ? static_cast<std::uint16_t>((p[2 * i] << 8) | p[2 * i + 1])
             : p[i];
    if (v > h.maxval) throw FormatError("PGM sample exceeds maxval");
    g.values[i] = v;
  }
  return g;
}

std::string ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path.string());
  return buf.str();
}

void WriteFileBytes(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

void WritePpm(const std::filesystem::path& path, const ImageBuffer& image) {
  WriteFileBytes(path, EncodePpm(image));
}

ImageBuffer ReadPpm(const std::filesystem::path& path) {
  try {
    return DecodePpm(ReadFileBytes(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void WritePgm(const std::filesystem::path& path, int width, int height,
              int maxval, std::span<const std::uint16_t> values) {
  WriteFileBytes(path, EncodePgm(width, height, maxval, values));
}

GrayImage ReadPgm(const std::filesystem::path& path) {
  try {
    return DecodePgm(ReadFileBytes(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace pnm
}  // namespace vshift
