#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <vector>

#include "addn/audio.hpp"

namespace addn {

enum class Split { Train, Test };

std::string_view split_name(Split split);

struct ManifestEntry {
  std::string recording;  // file stem the clip was cut from
  Label label = Label::Normal;
  std::string subject_id;
  Split split = Split::Train;
  double start_s = 0.0;
  double end_s = 0.0;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;

  std::size_t count(Split split) const;
  /// Throws DataFormatError naming the first subject present in both splits.
  void check_patient_disjoint() const;
};

/// Manifest entries and their decoded clips, index-aligned.
struct Dataset {
  DatasetManifest manifest;
  std::vector<AudioClip> clips;

  std::vector<std::size_t> indices(Split split) const;
};

/// One respiratory-cycle row of an annotation file.
struct AnnotationRow {
  double start_s = 0.0;
  double end_s = 0.0;
  bool crackle = false;
  bool wheeze = false;
};

/// Rows "start<TAB>end<TAB>crackle<TAB>wheeze"; blank lines are skipped.
/// Throws ParseError naming `file` and the 1-based line.
std::vector<AnnotationRow> parse_annotations(std::istream& in, const std::string& file);

/// Lines "recording<TAB>train|test".
std::map<std::string, Split> parse_split_file(const std::filesystem::path& path);

/// Leading patient number of an ICBHI recording name ("101_1b1_Al_sc_Meditron" -> "101").
std::string subject_from_recording(const std::string& recording, const std::string& file);

/// Reads every "<patient>_*.txt" annotation in `dir` with its sibling WAV,
/// slicing one clip per annotated cycle. Clips keep their native rate.
Dataset load_icbhi(const std::filesystem::path& dir, const std::filesystem::path& split_file);

/// Desk-scale stand-in for ICBHI audio.
struct SynthConfig {
  std::size_t train_per_class = 100;
  std::size_t test_per_class = 40;
  std::size_t subjects = 20;
  double snr_min_db = 5.0;
  double snr_max_db = 20.0;
  int sample_rate = 16000;
  double seconds = 8.0;
};

struct CrackleEvent {
  std::size_t start = 0;     // sample index
  std::size_t length = 0;    // samples
  double amplitude = 0.0;
  double decay = 0.0;        // time constant in samples
};

/// Everything drawn for one clip before rendering.
struct SynthClipPlan {
  Label label = Label::Normal;
  double wheeze_hz = 0.0;
  double wheeze_amplitude = 0.0;
  double wheeze_phase = 0.0;
  std::vector<CrackleEvent> crackles;
  double snr_db = 0.0;
  double breath_period_s = 4.0;
  double breath_phase = 0.0;
  std::uint64_t noise_seed = 0;
};

/// Separately rendered parts; the clip is their sum.
struct SynthComponents {
  std::vector<double> breath;    // band-emphasized pink noise, unit RMS
  std::vector<double> tone;      // wheeze sinusoid (zeros unless wheeze)
  std::vector<double> crackles;  // transients (zeros unless crackle)
  std::vector<double> noise;     // additive white noise at the drawn SNR
};

SynthClipPlan plan_synth_clip(Label label, const SynthConfig& config, std::uint64_t seed, std::uint64_t clip_index);
SynthComponents render_synth_clip(const SynthClipPlan& plan, const SynthConfig& config);

/// Deterministic in (config, seed). Train clips come first, classes
/// interleaved; splits use disjoint subject sets.
Dataset synth_dataset(const SynthConfig& config, std::uint64_t seed);

/// Persists clips as float WAV recordings with one annotation file each and
/// a "split.txt" split file, loadable by load_icbhi.
void write_dataset(const Dataset& dataset, const std::filesystem::path& dir);

}  // namespace addn
