#include "addn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "addn/error.hpp"
#include "addn/rng.hpp"
#include "addn/wav.hpp"

namespace addn {

namespace fs = std::filesystem;

std::string_view split_name(Split split) { return split == Split::Train ? "train" : "test"; }

std::size_t DatasetManifest::count(Split split) const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [&](const ManifestEntry& e) { return e.split == split; }));
}

void DatasetManifest::check_patient_disjoint() const {
  std::set<std::string> train, test;
  for (const auto& e : entries) (e.split == Split::Train ? train : test).insert(e.subject_id);
  for (const auto& s : train) {
    if (test.count(s)) throw DataFormatError("subject " + s + " appears in both train and test splits");
  }
}

std::vector<std::size_t> Dataset::indices(Split split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    if (manifest.entries[i].split == split) out.push_back(i);
  }
  return out;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::istringstream is(line);
  std::string f;
  while (is >> f) fields.push_back(f);
  return fields;
}

bool parse_double(const std::string& text, double& out) {
  if (text.empty()) return false;
  char* end = nullptr;
  out = std::strtod(text.c_str(), &end);
  return end == text.c_str() + text.size() && std::isfinite(out);
}

bool parse_flag(const std::string& text, bool& out) {
  if (text == "0") out = false;
  else if (text == "1") out = true;
  else return false;
  return true;
}

bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

std::vector<AnnotationRow> parse_annotations(std::istream& in, const std::string& file) {
  std::vector<AnnotationRow> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    const auto fields = split_fields(line);
    if (fields.size() != 4) {
      throw ParseError(file, lineno, "expected 4 columns (start, end, crackle, wheeze), found " +
                                         std::to_string(fields.size()));
    }
    AnnotationRow row;
    if (!parse_double(fields[0], row.start_s) || !parse_double(fields[1], row.end_s)) {
      throw ParseError(file, lineno, "cycle bounds must be numeric");
    }
    if (!parse_flag(fields[2], row.crackle) || !parse_flag(fields[3], row.wheeze)) {
      throw ParseError(file, lineno, "crackle and wheeze flags must be 0 or 1");
    }
    if (row.start_s < 0.0) throw ParseError(file, lineno, "cycle start is negative");
    if (row.end_s <= row.start_s) throw ParseError(file, lineno, "cycle end must be after its start");
    rows.push_back(row);
  }
  return rows;
}

std::map<std::string, Split> parse_split_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingFileError("cannot open split file " + path.string());
  std::map<std::string, Split> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    const auto fields = split_fields(line);
    if (fields.size() != 2) throw ParseError(path.string(), lineno, "expected \"recording<TAB>train|test\"");
    Split split;
    if (fields[1] == "train") split = Split::Train;
    else if (fields[1] == "test") split = Split::Test;
    else throw ParseError(path.string(), lineno, "split tag must be train or test, got \"" + fields[1] + "\"");
    if (!out.emplace(fields[0], split).second) {
      throw ParseError(path.string(), lineno, "recording " + fields[0] + " listed twice");
    }
  }
  return out;
}

std::string subject_from_recording(const std::string& recording, const std::string& file) {
  std::size_t n = 0;
  while (n < recording.size() && std::isdigit(static_cast<unsigned char>(recording[n]))) ++n;
  if (n == 0 || (n < recording.size() && recording[n] != '_')) {
    throw ParseError(file, 0, "recording name \"" + recording + "\" lacks a leading patient number");
  }
  return recording.substr(0, n);
}

Dataset load_icbhi(const fs::path& dir, const fs::path& split_file) {
  if (!fs::is_directory(dir)) throw MissingFileError("dataset directory not found: " + dir.string());
  const auto splits = parse_split_file(split_file);

  std::vector<fs::path> annotations;
  for (const auto& item : fs::directory_iterator(dir)) {
    if (!item.is_regular_file() || item.path().extension() != ".txt") continue;
    const std::string stem = item.path().stem().string();
    if (stem.empty() || !std::isdigit(static_cast<unsigned char>(stem[0])) || stem.find('_') == std::string::npos) {
      continue;
    }
    if (fs::equivalent(item.path(), split_file)) continue;
    annotations.push_back(item.path());
  }
  std::sort(annotations.begin(), annotations.end());

  Dataset ds;
  for (const fs::path& ann : annotations) {
    const std::string recording = ann.stem().string();
    const std::string subject = subject_from_recording(recording, ann.string());
    std::ifstream in(ann);
    if (!in) throw MissingFileError("cannot open annotation " + ann.string());
    const auto rows = parse_annotations(in, ann.string());

    const fs::path wav_path = dir / (recording + ".wav");
    if (!fs::exists(wav_path)) {
      throw MissingFileError("missing WAV " + wav_path.string() + " for annotation " + ann.string());
    }
    auto split_it = splits.find(recording);
    if (split_it == splits.end()) {
      throw ParseError(split_file.string(), 0, "recording " + recording + " has no split assignment");
    }
    const WavData wav = read_wav(wav_path);
    const auto len = static_cast<long long>(wav.samples.size());
    for (const auto& row : rows) {
      const long long begin = std::llround(row.start_s * wav.sample_rate);
      const long long end = std::min(len, std::llround(row.end_s * wav.sample_rate));
      if (begin >= len || end <= begin) {
        throw DataFormatError(ann.string() + ": cycle " + std::to_string(row.start_s) + "-" +
                              std::to_string(row.end_s) + " s lies outside the recording");
      }
      AudioClip clip;
      clip.samples.assign(wav.samples.begin() + begin, wav.samples.begin() + end);
      clip.sample_rate = wav.sample_rate;
      clip.label = label_from_flags(row.crackle, row.wheeze);
      clip.subject_id = subject;
      ds.manifest.entries.push_back({recording, clip.label, subject, split_it->second, row.start_s, row.end_s});
      ds.clips.push_back(std::move(clip));
    }
  }
  ds.manifest.check_patient_disjoint();
  return ds;
}

SynthClipPlan plan_synth_clip(Label label, const SynthConfig& config, std::uint64_t seed, std::uint64_t clip_index) {
  Rng rng = Rng::stream(seed, "synth", clip_index);
  const auto n = static_cast<std::size_t>(std::llround(config.seconds * config.sample_rate));
  SynthClipPlan plan;
  plan.label = label;
  plan.breath_period_s = rng.uniform(3.0, 5.0);
  plan.breath_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  plan.snr_db = rng.uniform(config.snr_min_db, config.snr_max_db);
  if (has_wheeze(label)) {
    plan.wheeze_hz = rng.uniform(200.0, 800.0);
    plan.wheeze_amplitude = rng.uniform(0.5, 1.0);
    plan.wheeze_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  }
  if (has_crackle(label)) {
    const std::size_t count = 5 + rng.below(16);
    for (std::size_t i = 0; i < count; ++i) {
      CrackleEvent ev;
      const double ms = rng.uniform(5.0, 20.0);
      ev.length = std::max<std::size_t>(1, static_cast<std::size_t>(ms * 1e-3 * config.sample_rate));
      ev.start = rng.below(n > ev.length ? n - ev.length : 1);
      ev.amplitude = rng.uniform(4.0, 8.0);
      ev.decay = static_cast<double>(ev.length) / 3.0;
      plan.crackles.push_back(ev);
    }
  }
  plan.noise_seed = rng.next_u64();
  return plan;
}

namespace {

double rms(const std::vector<double>& x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return x.empty() ? 0.0 : std::sqrt(acc / static_cast<double>(x.size()));
}

// RBJ constant-peak band-pass biquad.
std::vector<double> bandpass(const std::vector<double>& x, double lo_hz, double hi_hz, int rate) {
  const double f0 = std::sqrt(lo_hz * hi_hz);
  const double q = f0 / (hi_hz - lo_hz);
  const double w0 = 2.0 * std::numbers::pi * f0 / rate;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double a0 = 1.0 + alpha;
  const double b0 = alpha / a0, b2 = -alpha / a0;
  const double a1 = -2.0 * std::cos(w0) / a0, a2 = (1.0 - alpha) / a0;
  std::vector<double> y(x.size());
  double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = b0 * x[i] + b2 * x2 - a1 * y1 - a2 * y2;
    x2 = x1;
    x1 = x[i];
    y2 = y1;
    y1 = v;
    y[i] = v;
  }
  return y;
}

}  // namespace

SynthComponents render_synth_clip(const SynthClipPlan& plan, const SynthConfig& config) {
  const auto n = static_cast<std::size_t>(std::llround(config.seconds * config.sample_rate));
  const double rate = config.sample_rate;
  Rng rng(plan.noise_seed);
  SynthComponents out;

  // Pink noise (Kellet's economy filter), then a 100-1000 Hz emphasis and a
  // slow breathing envelope.
  std::vector<double> pink(n);
  double p0 = 0, p1 = 0, p2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = rng.normal();
    p0 = 0.99765 * p0 + w * 0.0990460;
    p1 = 0.96300 * p1 + w * 0.2965164;
    p2 = 0.57000 * p2 + w * 1.0526913;
    pink[i] = p0 + p1 + p2 + w * 0.1848;
  }
  const std::vector<double> band = bandpass(pink, 100.0, 1000.0, config.sample_rate);
  out.breath.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate;
    const double s = std::sin(std::numbers::pi * t / plan.breath_period_s + plan.breath_phase);
    out.breath[i] = (0.25 * pink[i] + 2.0 * band[i]) * (0.4 + 0.6 * s * s);
  }
  const double breath_rms = rms(out.breath);
  for (double& v : out.breath) v /= breath_rms;

  out.tone.assign(n, 0.0);
  if (plan.wheeze_hz > 0.0) {
    for (std::size_t i = 0; i < n; ++i) {
      out.tone[i] = plan.wheeze_amplitude *
                    std::sin(2.0 * std::numbers::pi * plan.wheeze_hz * static_cast<double>(i) / rate + plan.wheeze_phase);
    }
  }

  out.crackles.assign(n, 0.0);
  for (const auto& ev : plan.crackles) {
    for (std::size_t k = 0; k < ev.length && ev.start + k < n; ++k) {
      out.crackles[ev.start + k] += ev.amplitude * rng.normal() * std::exp(-static_cast<double>(k) / ev.decay);
    }
  }

  double signal_power = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = out.breath[i] + out.tone[i] + out.crackles[i];
    signal_power += s * s;
  }
  signal_power /= static_cast<double>(n);
  const double noise_std = std::sqrt(signal_power / std::pow(10.0, plan.snr_db / 10.0));
  out.noise.resize(n);
  for (double& v : out.noise) v = noise_std * rng.normal();
  return out;
}

Dataset synth_dataset(const SynthConfig& config, std::uint64_t seed) {
  if (config.train_per_class + config.test_per_class == 0) throw ContractError("synth: per-class counts must be positive");
  if (config.subjects == 0) throw ContractError("synth: subject count must be positive");
  if (config.sample_rate <= 0 || !(config.seconds > 0.0)) throw ContractError("synth: invalid clip format");
  if (!(config.snr_max_db >= config.snr_min_db)) throw ContractError("synth: SNR range is empty");

  const std::size_t train_total = config.train_per_class * kNumClasses;
  const std::size_t test_total = config.test_per_class * kNumClasses;
  std::size_t train_subjects = config.subjects, test_subjects = 0;
  if (test_total > 0) {
    if (config.subjects < 2 && train_total > 0) throw ContractError("synth: two splits need at least two subjects");
    train_subjects = train_total == 0 ? 0
                                      : std::clamp<std::size_t>(
                                            static_cast<std::size_t>(std::llround(
                                                static_cast<double>(config.subjects) * train_total / (train_total + test_total))),
                                            1, config.subjects - 1);
    test_subjects = config.subjects - train_subjects;
  }

  Dataset ds;
  std::size_t index = 0;
  auto emit = [&](Split split, std::size_t per_class, std::size_t subject_offset, std::size_t subject_count) {
    for (std::size_t i = 0; i < per_class; ++i) {
      for (std::size_t c = 0; c < kNumClasses; ++c) {
        const auto label = static_cast<Label>(c);
        const std::size_t within = i * kNumClasses + c;
        const std::string subject = std::to_string(1000 + subject_offset + within % subject_count);
        const SynthClipPlan plan = plan_synth_clip(label, config, seed, index);
        const SynthComponents parts = render_synth_clip(plan, config);
        AudioClip clip;
        clip.sample_rate = config.sample_rate;
        clip.label = label;
        clip.subject_id = subject;
        clip.samples.resize(parts.breath.size());
        for (std::size_t k = 0; k < clip.samples.size(); ++k) {
          // Stored at float precision so WAV persistence is lossless.
          clip.samples[k] = static_cast<float>(parts.breath[k] + parts.tone[k] + parts.crackles[k] + parts.noise[k]);
        }
        char name[64];
        std::snprintf(name, sizeof(name), "%s_synth_%05zu", subject.c_str(), index);
        ds.manifest.entries.push_back({name, label, subject, split, 0.0, config.seconds});
        ds.clips.push_back(std::move(clip));
        ++index;
      }
    }
  };
  emit(Split::Train, config.train_per_class, 0, std::max<std::size_t>(1, train_subjects));
  emit(Split::Test, config.test_per_class, train_subjects, std::max<std::size_t>(1, test_subjects));
  ds.manifest.check_patient_disjoint();
  return ds;
}

void write_dataset(const Dataset& dataset, const fs::path& dir) {
  fs::create_directories(dir);
  std::ofstream split(dir / "split.txt");
  if (!split) throw DataFormatError("cannot write split file in " + dir.string());
  for (std::size_t i = 0; i < dataset.clips.size(); ++i) {
    const auto& e = dataset.manifest.entries[i];
    const auto& clip = dataset.clips[i];
    write_wav(dir / (e.recording + ".wav"), clip.samples, clip.sample_rate);
    std::ofstream ann(dir / (e.recording + ".txt"));
    char row[128];
    std::snprintf(row, sizeof(row), "%.3f\t%.3f\t%d\t%d\n", 0.0, clip.seconds(), has_crackle(e.label) ? 1 : 0,
                  has_wheeze(e.label) ? 1 : 0);
    ann << row;
    split << e.recording << '\t' << split_name(e.split) << '\n';
  }
}

}  // namespace addn
