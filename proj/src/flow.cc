#include "vshift/flow.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Core>

#include "vshift/errors.h"
#include "vshift/geometry.h"
#include "vshift/random.h"

namespace vshift {
namespace flow {

namespace {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;
using VectorMap = Eigen::Map<Eigen::VectorXd>;

void CheckFactor(int factor) {
  if (factor != 1 && factor != 2 && factor != 4) {
    throw InvalidInput("latent downscale factor must be 1, 2, or 4");
  }
}

void CheckSameShape(const LatentTensor& a, const LatentTensor& b) {
  if (!a.SameShape(b)) throw InvalidInput("latent shapes differ");
}

// Offsets of the parameter blocks inside the flat vector.
struct Layout {
  int in, hidden, out;
  std::size_t w1, b1, w2, b2, total;

  explicit Layout(const DenoiserConfig& c)
      : in(c.InputDim()), hidden(c.hidden), out(c.latent_channels) {
    w1 = 0;
    b1 = w1 + static_cast<std::size_t>(hidden) * in;
    w2 = b1 + hidden;
    b2 = w2 + static_cast<std::size_t>(out) * hidden;
    total = b2 + out;
  }
};

// One row per latent pixel: the (z_t ‖ c ‖ t-embedding) feature vector.
RowMatrix BuildFeatures(const DenoiserConfig& cfg, const LatentTensor& z_t,
                        double t, const LatentTensor& c) {
  CheckSameShape(z_t, c);
  if (z_t.channels != cfg.latent_channels) {
    throw InvalidInput("latent channel count does not match the model");
  }
  const int r = cfg.patch_radius;
  const int side = 2 * r + 1;
  const int ch = cfg.latent_channels;
  const int patch_cols = side * side * ch;
  const std::vector<double> temb = TimeEmbedding(t, cfg.time_embed);

  RowMatrix x = RowMatrix::Zero(
      static_cast<Eigen::Index>(z_t.height) * z_t.width, cfg.InputDim());
  for (int y = 0; y < z_t.height; ++y) {
    for (int xx = 0; xx < z_t.width; ++xx) {
      const Eigen::Index row = static_cast<Eigen::Index>(y) * z_t.width + xx;
      for (int dy = -r; dy <= r; ++dy) {
        const int sy = y + dy;
        if (sy < 0 || sy >= z_t.height) continue;
        for (int dx = -r; dx <= r; ++dx) {
          const int sx = xx + dx;
          if (sx < 0 || sx >= z_t.width) continue;
          const int base = ((dy + r) * side + (dx + r)) * ch;
          for (int k = 0; k < ch; ++k) {
            x(row, base + k) = z_t.at(sy, sx, k);
            x(row, patch_cols + base + k) = c.at(sy, sx, k);
          }
        }
      }
      for (int e = 0; e < cfg.time_embed; ++e) {
        x(row, 2 * patch_cols + e) = temb[e];
      }
    }
  }
  return x;
}

}  // namespace

LatentTensor::LatentTensor(int h, int w, int c, double fill)
    : height(h), width(w), channels(c) {
  if (h <= 0 || w <= 0 || c <= 0) {
    throw InvalidInput("latent dimensions must be positive");
  }
  values.assign(static_cast<std::size_t>(h) * w * c, fill);
}

bool LatentTensor::AllFinite() const {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

LatentTensor ToyEncode(const ImageBuffer& image, int factor) {
  CheckFactor(factor);
  if (image.empty() || image.width() % factor != 0 ||
      image.height() % factor != 0) {
    throw InvalidInput("image size must be a positive multiple of the factor");
  }
  LatentTensor z(image.height() / factor, image.width() / factor, 3);
  const double inv_area = 1.0 / (factor * factor);
  for (int y = 0; y < z.height; ++y) {
    for (int x = 0; x < z.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        int sum = 0;
        for (int dy = 0; dy < factor; ++dy) {
          for (int dx = 0; dx < factor; ++dx) {
            sum += image.at(x * factor + dx, y * factor + dy)[c];
          }
        }
        z.at(y, x, c) = 2.0 * (sum * inv_area) / 255.0 - 1.0;
      }
    }
  }
  return z;
}

ImageBuffer ToyDecode(const LatentTensor& z, int factor) {
  CheckFactor(factor);
  if (z.channels != 3) throw InvalidInput("decoder expects 3 channels");
  ImageBuffer image(z.width * factor, z.height * factor);
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      Rgb px{};
      for (int c = 0; c < 3; ++c) {
        const double v = (z.at(y / factor, x / factor, c) + 1.0) * 127.5;
        const std::int64_t q = std::isfinite(v) ? RoundHalfUp(v) : 0;
        px[c] = static_cast<std::uint8_t>(std::clamp<std::int64_t>(q, 0, 255));
      }
      image.set(x, y, px);
    }
  }
  return image;
}

LatentTensor FmInterpolate(const LatentTensor& z0, const LatentTensor& z1,
                           double t) {
  CheckSameShape(z0, z1);
  if (!(t >= 0.0 && t <= 1.0)) throw InvalidInput("t must lie in [0, 1]");
  LatentTensor out = z0;
  if (t == 0.0) return out;
  if (t == 1.0) return z1;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.values[i] = (1.0 - t) * z0.values[i] + t * z1.values[i];
  }
  return out;
}

LatentTensor FmTarget(const LatentTensor& z0, const LatentTensor& z1) {
  CheckSameShape(z0, z1);
  LatentTensor out = z1;
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] -= z0.values[i];
  return out;
}

double FmLoss(const LatentTensor& pred, const LatentTensor& target) {
  CheckSameShape(pred, target);
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred.values[i] - target.values[i];
    sum += d * d;
  }
  return sum / static_cast<double>(pred.size());
}

LatentTensor NoiseLatent(std::uint64_t seed, std::uint64_t stream, int height,
                         int width, int channels) {
  const CounterRng rng(seed, stream);
  LatentTensor z(height, width, channels);
  for (std::size_t i = 0; i < z.size(); ++i) z.values[i] = rng.Normal(i);
  return z;
}

std::vector<double> TimeEmbedding(double t, int size) {
  std::vector<double> e(static_cast<std::size_t>(size));
  for (int k = 0; k < size / 2; ++k) {
    const double w = std::ldexp(std::numbers::pi / 2.0, k);
    e[2 * k] = std::sin(w * t);
    e[2 * k + 1] = std::cos(w * t);
  }
  return e;
}

int DenoiserConfig::InputDim() const {
  const int side = 2 * patch_radius + 1;
  return 2 * side * side * latent_channels + time_embed;
}

int DenoiserConfig::ParameterCount() const {
  return static_cast<int>(Layout(*this).total);
}

void DenoiserConfig::Validate() const {
  if (latent_channels <= 0 || patch_radius < 0 || hidden <= 0 ||
      time_embed < 0 || time_embed % 2 != 0) {
    throw InvalidInput("invalid denoiser configuration");
  }
}

ToyDenoiser ToyDenoiser::Init(const DenoiserConfig& config, std::uint64_t seed,
                              bool zero_output) {
  config.Validate();
  const Layout l(config);
  ToyDenoiser m{config, seed, std::vector<double>(l.total, 0.0)};
  const CounterRng rng(seed, /*stream=*/0x494e4954ull);  // "INIT"
  const double s1 = 1.0 / std::sqrt(static_cast<double>(l.in));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(l.hidden));
  for (std::size_t i = l.w1; i < l.b1; ++i) m.params[i] = s1 * rng.Normal(i);
  if (!zero_output) {
    for (std::size_t i = l.w2; i < l.b2; ++i) m.params[i] = s2 * rng.Normal(i);
  }
  return m;
}

bool ToyDenoiser::AllFinite() const {
  for (double p : params) {
    if (!std::isfinite(p)) return false;
  }
  return true;
}

LatentTensor DenoiserForward(const ToyDenoiser& model, const LatentTensor& z_t,
                             double t, const LatentTensor& c) {
  const Layout l(model.config);
  if (model.params.size() != l.total) {
    throw InvalidInput("parameter vector does not match configuration");
  }
  const RowMatrix x = BuildFeatures(model.config, z_t, t, c);
  const double* p = model.params.data();
  const ConstMatrixMap w1(p + l.w1, l.hidden, l.in);
  const ConstVectorMap b1(p + l.b1, l.hidden);
  const ConstMatrixMap w2(p + l.w2, l.out, l.hidden);
  const ConstVectorMap b2(p + l.b2, l.out);

  RowMatrix hidden = x * w1.transpose();
  hidden.rowwise() += b1.transpose();
  hidden = hidden.array().tanh().matrix();
  RowMatrix y = hidden * w2.transpose();
  y.rowwise() += b2.transpose();

  LatentTensor out(z_t.height, z_t.width, l.out);
  std::copy(y.data(), y.data() + y.size(), out.values.begin());
  return out;
}

LossAndGradient DenoiserBackward(const ToyDenoiser& model,
                                 std::span<const FmExample> batch) {
  const Layout l(model.config);
  if (model.params.size() != l.total) {
    throw InvalidInput("parameter vector does not match configuration");
  }
  if (batch.empty()) throw InvalidInput("empty batch");
  std::size_t elements = 0;
  for (const auto& ex : batch) {
    CheckSameShape(ex.z_t, ex.target);
    elements += ex.target.size();
  }
  const double scale = 2.0 / static_cast<double>(elements);

  const double* p = model.params.data();
  const ConstMatrixMap w1(p + l.w1, l.hidden, l.in);
  const ConstVectorMap b1(p + l.b1, l.hidden);
  const ConstMatrixMap w2(p + l.w2, l.out, l.hidden);
  const ConstVectorMap b2(p + l.b2, l.out);

  LossAndGradient result;
  result.gradient.assign(l.total, 0.0);
  double* g = result.gradient.data();
  MatrixMap gw1(g + l.w1, l.hidden, l.in);
  VectorMap gb1(g + l.b1, l.hidden);
  MatrixMap gw2(g + l.w2, l.out, l.hidden);
  VectorMap gb2(g + l.b2, l.out);

  double sq_sum = 0.0;
  for (const FmExample& ex : batch) {
    const RowMatrix x = BuildFeatures(model.config, ex.z_t, ex.t, ex.c);
    RowMatrix hidden = x * w1.transpose();
    hidden.rowwise() += b1.transpose();
    hidden = hidden.array().tanh().matrix();
    RowMatrix y = hidden * w2.transpose();
    y.rowwise() += b2.transpose();

    const ConstMatrixMap target(ex.target.values.data(), y.rows(), y.cols());
    const RowMatrix residual = y - target;
    sq_sum += residual.squaredNorm();

    const RowMatrix dy = scale * residual;
    gw2.noalias() += dy.transpose() * hidden;
    gb2 += dy.colwise().sum().transpose();
    RowMatrix dpre = dy * w2;
    dpre.array() *= (1.0 - hidden.array().square());
    gw1.noalias() += dpre.transpose() * x;
    gb1 += dpre.colwise().sum().transpose();
  }
  result.loss = sq_sum / static_cast<double>(elements);
  return result;
}

void TrainConfig::Validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw InvalidInput("learning rate must be finite and >= 0");
  }
  if (steps < 0 || batch_size < 1 || time_points < 1) {
    throw InvalidInput("steps >= 0, batch_size >= 1, time_points >= 1");
  }
  CheckFactor(downscale);
  model.Validate();
}

std::vector<TrainPair> EncodePairs(std::span<const ConditionSample> samples,
                                   int factor) {
  std::vector<TrainPair> pairs;
  pairs.reserve(samples.size());
  for (const auto& s : samples) {
    pairs.push_back({ToyEncode(s.raw, factor), ToyEncode(s.condition, factor)});
  }
  return pairs;
}

TrainResult Train(std::span<const TrainPair> pairs, const TrainConfig& config,
                  const std::function<void(int, double)>& on_step) {
  config.Validate();
  if (pairs.empty()) throw InvalidInput("training set is empty");
  for (const auto& pair : pairs) {
    CheckSameShape(pair.z0, pair.c);
    CheckSameShape(pair.z0, pairs.front().z0);
  }

  std::vector<LatentTensor> noise;
  noise.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const LatentTensor& z0 = pairs[i].z0;
    noise.push_back(NoiseLatent(config.seed, i, z0.height, z0.width,
                                z0.channels));
  }

  TrainResult result{ToyDenoiser::Init(config.model, config.seed), {}};
  result.loss_trace.reserve(static_cast<std::size_t>(config.steps));
  std::vector<FmExample> batch;
  for (int step = 0; step < config.steps; ++step) {
    batch.clear();
    for (int b = 0; b < config.batch_size; ++b) {
      const std::size_t i =
          (static_cast<std::size_t>(step) * config.batch_size + b) %
          pairs.size();
      const LatentTensor target = FmTarget(pairs[i].z0, noise[i]);
      for (int k = 0; k < config.time_points; ++k) {
        const double t = 1.0 - static_cast<double>(k) / config.time_points;
        batch.push_back(
            {FmInterpolate(pairs[i].z0, noise[i], t), t, pairs[i].c, target});
      }
    }
    const LossAndGradient lg = DenoiserBackward(result.model, batch);
    result.loss_trace.push_back(lg.loss);
    if (on_step) on_step(step, lg.loss);
    for (std::size_t j = 0; j < lg.gradient.size(); ++j) {
      result.model.params[j] -= config.learning_rate * lg.gradient[j];
    }
    if (!result.model.AllFinite()) {
      throw InvalidInput("training diverged at step " + std::to_string(step));
    }
  }
  return result;
}

LatentTensor EulerIntegrate(LatentTensor z, int steps,
                            const VelocityField& velocity) {
  if (steps < 1) throw InvalidInput("sampling needs at least one step");
  const double dt = 1.0 / steps;
  for (int k = 0; k < steps; ++k) {
    const double t = 1.0 - static_cast<double>(k) / steps;
    const LatentTensor v = velocity(z, t);
    CheckSameShape(z, v);
    for (std::size_t i = 0; i < z.size(); ++i) z.values[i] -= dt * v.values[i];
  }
  return z;
}

ImageBuffer Sample(const ToyDenoiser& model, const ImageBuffer& condition,
                   int steps, std::uint64_t seed, int downscale) {
  const LatentTensor c = ToyEncode(condition, downscale);
  LatentTensor z = NoiseLatent(seed, 0, c.height, c.width, c.channels);
  z = EulerIntegrate(std::move(z), steps,
                     [&](const LatentTensor& zt, double t) {
                       return DenoiserForward(model, zt, t, c);
                     });
  return ToyDecode(z, downscale);
}

double Psnr(const ImageBuffer& a, const ImageBuffer& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw InvalidInput("PSNR needs equal image sizes");
  }
  const auto x = a.bytes();
  const auto y = b.bytes();
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = static_cast<double>(x[i]) - y[i];
    sum += d * d;
  }
  const double mse = sum / static_cast<double>(x.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

}  // namespace flow
}  // namespace vshift
