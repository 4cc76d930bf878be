#ifndef VSHIFT_FLOW_H_
#define VSHIFT_FLOW_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "vshift/dataset.h"
#include "vshift/image.h"

namespace vshift {
namespace flow {

// Latent image, height x width x channels, channel-interleaved row-major.
struct LatentTensor {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> values;

  LatentTensor() = default;
  LatentTensor(int height, int width, int channels, double fill = 0.0);

  std::size_t size() const { return values.size(); }
  double& at(int y, int x, int c) {
    return values[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  double at(int y, int x, int c) const {
    return values[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  bool SameShape(const LatentTensor& o) const {
    return height == o.height && width == o.width && channels == o.channels;
  }
  bool AllFinite() const;
  bool operator==(const LatentTensor&) const = default;
};

// Stand-in codec: per-channel block mean over factor x factor blocks mapped
// to [-1, 1] (2·mean/255 - 1); decoding upsamples by nearest neighbor and maps
// back to [0, 255] with round-half-up and clamping. Throws InvalidInput if the
// image size is not divisible by `factor` or factor is not 1, 2, or 4.
LatentTensor ToyEncode(const ImageBuffer& image, int factor);
ImageBuffer ToyDecode(const LatentTensor& latent, int factor);

// Rectified-flow path (1 - t)·z0 + t·z1 and its velocity z1 - z0.
LatentTensor FmInterpolate(const LatentTensor& z0, const LatentTensor& z1,
                           double t);
LatentTensor FmTarget(const LatentTensor& z0, const LatentTensor& z1);
// Mean squared error over all elements.
double FmLoss(const LatentTensor& pred, const LatentTensor& target);

// Unit Gaussian latent drawn from CounterRng(seed, stream).
LatentTensor NoiseLatent(std::uint64_t seed, std::uint64_t stream, int height,
                         int width, int channels);

// Sinusoidal time features: sin(2^k·π·t/2), cos(2^k·π·t/2), k = 0..size/2-1.
std::vector<double> TimeEmbedding(double t, int size);

struct DenoiserConfig {
  int latent_channels = 3;
  int patch_radius = 1;  // input patch is (2r+1)^2 pixels of z_t and of c
  int time_embed = 8;    // even
  int hidden = 32;

  int InputDim() const;
  int ParameterCount() const;
  void Validate() const;
  bool operator==(const DenoiserConfig&) const = default;
};

// Per-pixel two-layer map over the flattened (z_t ‖ c ‖ t-embedding) patch:
//   y = W2 · tanh(W1 · x + b1) + b2
// Parameters are stored flat as [W1 (hidden x in, row-major), b1, W2
// (channels x hidden, row-major), b2].
struct ToyDenoiser {
  DenoiserConfig config;
  std::uint64_t seed = 0;
  std::vector<double> params;

  // Gaussian init scaled by 1/sqrt(fan_in); biases zero. When
  // `zero_output` is set, W2 and b2 start at zero.
  static ToyDenoiser Init(const DenoiserConfig& config, std::uint64_t seed,
                          bool zero_output = false);
  bool AllFinite() const;
};

LatentTensor DenoiserForward(const ToyDenoiser& model, const LatentTensor& z_t,
                             double t, const LatentTensor& c);

// One supervised flow-matching term.
struct FmExample {
  LatentTensor z_t;
  double t = 0.0;
  LatentTensor c;
  LatentTensor target;
};

struct LossAndGradient {
  double loss = 0.0;
  std::vector<double> gradient;  // same layout as ToyDenoiser::params
};

// Mean squared error over every element of every example, and its analytic
// gradient. Examples are accumulated in the given order.
LossAndGradient DenoiserBackward(const ToyDenoiser& model,
                                 std::span<const FmExample> batch);

struct TrainConfig {
  double learning_rate = 0.2;
  int steps = 2000;
  int batch_size = 1;   // training pairs per step
  int time_points = 8;  // t grid 1, 1 - 1/T, ..., 1/T evaluated every step
  std::uint64_t seed = 0;
  int downscale = 1;
  DenoiserConfig model;

  void Validate() const;
};

// Encoded (z0, c) pair.
struct TrainPair {
  LatentTensor z0;  // encoded raw image
  LatentTensor c;   // encoded condition image
};

std::vector<TrainPair> EncodePairs(std::span<const ConditionSample> samples,
                                   int factor);

struct TrainResult {
  ToyDenoiser model;
  std::vector<double> loss_trace;  // loss at each step, before the update
};

// Plain fixed-rate gradient descent. Pair i is always noised with
// NoiseLatent(seed, i); step s uses pairs (s·batch + b) mod N.
TrainResult Train(std::span<const TrainPair> pairs, const TrainConfig& config,
                  const std::function<void(int, double)>& on_step = {});

using VelocityField =
    std::function<LatentTensor(const LatentTensor& z, double t)>;

// Euler integration from t = 1 down to 0: z <- z - (1/steps)·v(z, t).
LatentTensor EulerIntegrate(LatentTensor z, int steps,
                            const VelocityField& velocity);

// Starts from NoiseLatent(seed, 0) and integrates the model's velocity
// conditioned on the encoded `condition`.
ImageBuffer Sample(const ToyDenoiser& model, const ImageBuffer& condition,
                   int steps, std::uint64_t seed, int downscale);

double Psnr(const ImageBuffer& a, const ImageBuffer& b);

// Checkpoint: "VSFM" magic, u32 version, u32 channel layout tag, u32 latent
// channels, patch radius, time embedding, hidden, downscale; u64 seed; u64
// parameter count; then parameters as little-endian float64.
void SaveCheckpoint(const ToyDenoiser& model, int downscale,
                    const std::filesystem::path& path);
struct Checkpoint {
  ToyDenoiser model;
  int downscale = 1;
};
Checkpoint LoadCheckpoint(const std::filesystem::path& path);
std::string EncodeCheckpoint(const ToyDenoiser& model, int downscale);
Checkpoint DecodeCheckpoint(std::string_view bytes);

// "step,loss" CSV.
void WriteLossTrace(std::span<const double> trace,
                    const std::filesystem::path& path);

}  // namespace flow
}  // namespace vshift

#endif  // VSHIFT_FLOW_H_
