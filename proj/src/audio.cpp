#include "addn/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>

#include "addn/error.hpp"
#include "addn/fft.hpp"

namespace addn {

std::string_view label_name(Label label) {
  switch (label) {
    case Label::Normal: return "normal";
    case Label::Crackle: return "crackle";
    case Label::Wheeze: return "wheeze";
    case Label::Both: return "both";
  }
  return "unknown";
}

std::optional<Label> parse_label(std::string_view name) {
  for (int i = 0; i < static_cast<int>(kNumClasses); ++i) {
    if (label_name(static_cast<Label>(i)) == name) return static_cast<Label>(i);
  }
  return std::nullopt;
}

Label label_from_flags(bool crackle, bool wheeze) {
  if (crackle && wheeze) return Label::Both;
  if (crackle) return Label::Crackle;
  if (wheeze) return Label::Wheeze;
  return Label::Normal;
}

bool has_crackle(Label label) { return label == Label::Crackle || label == Label::Both; }
bool has_wheeze(Label label) { return label == Label::Wheeze || label == Label::Both; }

std::size_t MelConfig::clip_samples() const {
  return static_cast<std::size_t>(std::llround(clip_seconds * sample_rate));
}

std::size_t MelConfig::frames() const {
  const std::size_t n = clip_samples();
  return n < n_fft ? 0 : 1 + (n - n_fft) / hop;
}

namespace {

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

double blackman(double u) {
  // u in [-1, 1]
  if (std::abs(u) >= 1.0) return 0.0;
  return 0.42 + 0.5 * std::cos(std::numbers::pi * u) + 0.08 * std::cos(2.0 * std::numbers::pi * u);
}

}  // namespace

AudioClip resample(const AudioClip& clip, int target_rate) {
  if (target_rate <= 0) throw ContractError("resample: target rate must be positive");
  if (clip.sample_rate <= 0) throw ContractError("resample: source rate must be positive");
  if (clip.sample_rate == target_rate) return clip;

  const std::uint64_t g = std::gcd(clip.sample_rate, target_rate);
  const std::uint64_t up = static_cast<std::uint64_t>(target_rate) / g;
  const std::uint64_t down = static_cast<std::uint64_t>(clip.sample_rate) / g;
  const std::size_t in_len = clip.samples.size();
  const auto out_len = static_cast<std::size_t>(
      std::llround(static_cast<double>(in_len) * target_rate / clip.sample_rate));

  // Cutoff relative to the input Nyquist frequency.
  const double cutoff = std::min(1.0, static_cast<double>(up) / static_cast<double>(down));
  constexpr double kZeroCrossings = 16.0;
  const auto half = static_cast<std::int64_t>(std::ceil(kZeroCrossings / cutoff));
  const std::size_t taps = static_cast<std::size_t>(2 * half);

  // One filter per fractional phase; tap j covers input offset j - half + 1.
  std::vector<std::vector<double>> bank(up, std::vector<double>(taps));
  for (std::uint64_t p = 0; p < up; ++p) {
    const double frac = static_cast<double>(p) / static_cast<double>(up);
    double total = 0.0;
    for (std::size_t j = 0; j < taps; ++j) {
      const double dist = frac - static_cast<double>(static_cast<std::int64_t>(j) - half + 1);
      const double h = cutoff * sinc(cutoff * dist) * blackman(dist / static_cast<double>(half));
      bank[p][j] = h;
      total += h;
    }
    for (double& h : bank[p]) h /= total;
  }

  AudioClip out = clip;
  out.sample_rate = target_rate;
  out.samples.assign(out_len, 0.0);
  const auto len = static_cast<std::int64_t>(in_len);
  for (std::size_t n = 0; n < out_len; ++n) {
    const std::uint64_t pos = static_cast<std::uint64_t>(n) * down;
    const auto base = static_cast<std::int64_t>(pos / up);
    const std::vector<double>& h = bank[pos % up];
    double acc = 0.0;
    for (std::size_t j = 0; j < taps; ++j) {
      const std::int64_t k = base + static_cast<std::int64_t>(j) - half + 1;
      if (k >= 0 && k < len) acc += clip.samples[static_cast<std::size_t>(k)] * h[j];
    }
    out.samples[n] = acc;
  }
  return out;
}

AudioClip fix_length(const AudioClip& clip, double target_seconds) {
  if (clip.samples.empty()) throw ContractError("fix_length: empty clip");
  if (!(target_seconds > 0.0)) throw ContractError("fix_length: target length must be positive");
  const auto target = static_cast<std::size_t>(std::llround(target_seconds * clip.sample_rate));
  AudioClip out = clip;
  out.samples.resize(target);
  const std::size_t n = clip.samples.size();
  for (std::size_t i = n; i < target; ++i) out.samples[i] = clip.samples[i % n];
  return out;
}

AudioClip normalize_amplitude(const AudioClip& clip) {
  double peak = 0.0;
  for (double s : clip.samples) peak = std::max(peak, std::abs(s));
  if (peak == 0.0) return clip;
  AudioClip out = clip;
  for (double& s : out.samples) s /= peak;
  return out;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

MelExtractor::MelExtractor(MelConfig config) : config_(config) {
  if (config_.n_fft == 0 || config_.hop == 0 || config_.n_mels == 0) {
    throw ContractError("mel: n_fft, hop and n_mels must be positive");
  }
  if (!(config_.f_max > config_.f_min) || config_.f_min < 0.0) throw ContractError("mel: invalid frequency span");
  if (!(config_.log_floor > 0.0)) throw ContractError("mel: log floor must be positive");

  const std::size_t n_fft = config_.n_fft;
  window_.resize(n_fft);
  for (std::size_t i = 0; i < n_fft; ++i) {
    window_[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n_fft));
  }

  const std::size_t bins = n_fft / 2 + 1;
  const double mel_lo = hz_to_mel(config_.f_min), mel_hi = hz_to_mel(config_.f_max);
  std::vector<double> edges(config_.n_mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) / static_cast<double>(config_.n_mels + 1));
  }
  filters_.assign(config_.n_mels, std::vector<double>(bins, 0.0));
  centers_.resize(config_.n_mels);
  for (std::size_t m = 0; m < config_.n_mels; ++m) {
    const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
    centers_[m] = mid;
    const double area_norm = 2.0 / (hi - lo);
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * config_.sample_rate / static_cast<double>(n_fft);
      const double rise = (f - lo) / (mid - lo);
      const double fall = (hi - f) / (hi - mid);
      filters_[m][k] = std::max(0.0, std::min(rise, fall)) * area_norm;
    }
  }
}

Spectrogram MelExtractor::operator()(const AudioClip& clip) const {
  if (clip.sample_rate != config_.sample_rate) {
    throw ContractError("mel: clip rate " + std::to_string(clip.sample_rate) + " Hz, expected " +
                        std::to_string(config_.sample_rate) + " Hz");
  }
  if (clip.samples.size() != config_.clip_samples()) {
    throw ContractError("mel: clip has " + std::to_string(clip.samples.size()) + " samples, expected " +
                        std::to_string(config_.clip_samples()));
  }
  const std::size_t frames = config_.frames();
  if (frames == 0) throw ContractError("mel: clip shorter than one window");
  const std::size_t n_fft = config_.n_fft, n_mels = config_.n_mels;
  std::vector<double> values(frames * n_mels);
  std::vector<double> frame(n_fft);
  for (std::size_t t = 0; t < frames; ++t) {
    const double* src = clip.samples.data() + t * config_.hop;
    for (std::size_t i = 0; i < n_fft; ++i) frame[i] = src[i] * window_[i];
    const std::vector<double> power = fft::power_spectrum(frame);
    for (std::size_t m = 0; m < n_mels; ++m) {
      double e = 0.0;
      const std::vector<double>& w = filters_[m];
      for (std::size_t k = 0; k < power.size(); ++k) e += w[k] * power[k];
      values[t * n_mels + m] = std::log(e + config_.log_floor);
    }
  }
  return {Tensor::from_data({frames, n_mels}, std::move(values)),
          static_cast<double>(config_.sample_rate) / static_cast<double>(config_.hop)};
}

Spectrogram mel_spectrogram(const AudioClip& clip, const MelConfig& config) { return MelExtractor(config)(clip); }

Spectrogram preprocess(const AudioClip& clip, const MelExtractor& extractor) {
  const MelConfig& cfg = extractor.config();
  AudioClip x = resample(clip, cfg.sample_rate);
  x = fix_length(x, cfg.clip_seconds);
  x = normalize_amplitude(x);
  return extractor(x);
}

}  // namespace addn
