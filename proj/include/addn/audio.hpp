#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "addn/tensor.hpp"

namespace addn {

enum class Label : int { Normal = 0, Crackle = 1, Wheeze = 2, Both = 3 };

inline constexpr std::size_t kNumClasses = 4;

std::string_view label_name(Label label);
std::optional<Label> parse_label(std::string_view name);
/// ICBHI flag pair to class: (0,0) Normal, (1,0) Crackle, (0,1) Wheeze, (1,1) Both.
Label label_from_flags(bool crackle, bool wheeze);
bool has_crackle(Label label);
bool has_wheeze(Label label);

struct AudioClip {
  std::vector<double> samples;
  int sample_rate = 16000;
  Label label = Label::Normal;
  std::string subject_id;

  double seconds() const { return static_cast<double>(samples.size()) / sample_rate; }
};

/// Front-end settings. Everything except the mel count, window size and the
/// 8 s / 16 kHz input format is a documented default rather than fixed.
struct MelConfig {
  int sample_rate = 16000;
  double clip_seconds = 8.0;
  std::size_t n_fft = 1024;
  std::size_t hop = 512;
  std::size_t n_mels = 64;
  double f_min = 0.0;
  double f_max = 8000.0;
  double log_floor = 1e-6;

  std::size_t clip_samples() const;
  std::size_t frames() const;
};

/// Log-mel energies, frames x mel bands.
struct Spectrogram {
  Tensor values;
  double frame_rate = 0.0;

  std::size_t frames() const { return values.rows(); }
  std::size_t bands() const { return values.cols(); }
};

/// Windowed-sinc polyphase resampling to target_rate. Output length is
/// round(len * target / source); equal rates return the input unchanged.
AudioClip resample(const AudioClip& clip, int target_rate);

/// Cyclically tiles short clips and truncates long ones to exactly
/// round(target_seconds * sample_rate) samples.
AudioClip fix_length(const AudioClip& clip, double target_seconds = 8.0);

/// Peak normalization to max |x| = 1. All-zero clips pass through.
AudioClip normalize_amplitude(const AudioClip& clip);

/// Hann window, HTK mel scale, triangular area-normalized filters.
class MelExtractor {
 public:
  explicit MelExtractor(MelConfig config = {});

  const MelConfig& config() const { return config_; }
  /// Filter weights, n_mels rows of n_fft/2+1 bins.
  const std::vector<std::vector<double>>& filterbank() const { return filters_; }
  /// Center frequency in Hz of each band.
  const std::vector<double>& band_centers() const { return centers_; }

  Spectrogram operator()(const AudioClip& clip) const;

 private:
  MelConfig config_;
  std::vector<double> window_;
  std::vector<std::vector<double>> filters_;
  std::vector<double> centers_;
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);

Spectrogram mel_spectrogram(const AudioClip& clip, const MelConfig& config = {});

/// resample -> fix_length -> normalize_amplitude -> mel.
Spectrogram preprocess(const AudioClip& clip, const MelExtractor& extractor);

}  // namespace addn
