#include <bit>
#include <cstring>
#include <sstream>
#include <string>
#include <type_traits>

#include "vshift/errors.h"
#include "vshift/flow.h"
#include "vshift/pnm.h"

namespace vshift {
namespace flow {

namespace {

constexpr char kMagic[4] = {'V', 'S', 'F', 'M'};
constexpr std::uint32_t kVersion = 1;
// Input channel order (z_t ‖ c ‖ t-embedding).
constexpr std::uint32_t kLayoutTag = 1;

template <typename T>
void PutLe(std::string& out, T value) {
  using U = std::make_unsigned_t<
      std::conditional_t<std::is_floating_point_v<T>, std::uint64_t, T>>;
  U bits;
  if constexpr (std::is_floating_point_v<T>) {
    bits = std::bit_cast<std::uint64_t>(value);
  } else {
    bits = static_cast<U>(value);
  }
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
  }
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename U>
  U Get() {
    if (pos_ + sizeof(U) > bytes_.size()) {
      throw FormatError("checkpoint is truncated");
    }
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      v |= static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + i]))
           << (8 * i);
    }
    pos_ += sizeof(U);
    return v;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::string_view Take(std::size_t n) {
    if (pos_ + n > bytes_.size()) throw FormatError("checkpoint is truncated");
    const std::string_view s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string EncodeCheckpoint(const ToyDenoiser& model, int downscale) {
  std::string out(kMagic, 4);
  PutLe<std::uint32_t>(out, kVersion);
  PutLe<std::uint32_t>(out, kLayoutTag);
  PutLe<std::uint32_t>(out, model.config.latent_channels);
  PutLe<std::uint32_t>(out, model.config.patch_radius);
  PutLe<std::uint32_t>(out, model.config.time_embed);
  PutLe<std::uint32_t>(out, model.config.hidden);
  PutLe<std::uint32_t>(out, downscale);
  PutLe<std::uint64_t>(out, model.seed);
  PutLe<std::uint64_t>(out, model.params.size());
  for (double p : model.params) PutLe<double>(out, p);
  return out;
}

Checkpoint DecodeCheckpoint(std::string_view bytes) {
  Reader r(bytes);
  if (r.Take(4) != std::string_view(kMagic, 4)) {
    throw FormatError("not a checkpoint (bad magic)");
  }
  const auto version = r.Get<std::uint32_t>();
  if (version != kVersion) {
    throw FormatError("unsupported checkpoint version " +
                      std::to_string(version));
  }
  if (r.Get<std::uint32_t>() != kLayoutTag) {
    throw FormatError("checkpoint uses an unknown channel layout");
  }
  Checkpoint ck;
  DenoiserConfig& c = ck.model.config;
  c.latent_channels = static_cast<int>(r.Get<std::uint32_t>());
  c.patch_radius = static_cast<int>(r.Get<std::uint32_t>());
  c.time_embed = static_cast<int>(r.Get<std::uint32_t>());
  c.hidden = static_cast<int>(r.Get<std::uint32_t>());
  ck.downscale = static_cast<int>(r.Get<std::uint32_t>());
  ck.model.seed = r.Get<std::uint64_t>();
  const auto count = r.Get<std::uint64_t>();
  try {
    c.Validate();
  } catch (const InvalidInput& e) {
    throw FormatError(std::string("checkpoint header: ") + e.what());
  }
  if (ck.downscale != 1 && ck.downscale != 2 && ck.downscale != 4) {
    throw FormatError("checkpoint has an invalid downscale factor");
  }
  if (count != static_cast<std::uint64_t>(c.ParameterCount())) {
    throw FormatError("checkpoint parameter count does not match its config");
  }
  if (r.remaining() != count * 8) {
    throw FormatError("checkpoint payload has the wrong size");
  }
  ck.model.params.resize(count);
  for (auto& p : ck.model.params) {
    p = std::bit_cast<double>(r.Get<std::uint64_t>());
  }
  return ck;
}

void SaveCheckpoint(const ToyDenoiser& model, int downscale,
                    const std::filesystem::path& path) {
  pnm::WriteFileBytes(path, EncodeCheckpoint(model, downscale));
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  return DecodeCheckpoint(pnm::ReadFileBytes(path));
}

void WriteLossTrace(std::span<const double> trace,
                    const std::filesystem::path& path) {
  std::ostringstream out;
  out.precision(17);
  out << "step,loss\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    out << i << ',' << trace[i] << '\n';
  }
  pnm::WriteFileBytes(path, out.str());
}

}  // namespace flow
}  // namespace vshift
