#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include "addn/audio.hpp"
#include "addn/dataset.hpp"
#include "addn/error.hpp"
#include "addn/wav.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace addn;

namespace {

AudioClip sine_clip(double hz, int rate, std::size_t n, double amplitude = 1.0) {
  AudioClip c;
  c.sample_rate = rate;
  c.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    c.samples[i] = amplitude * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / rate);
  }
  return c;
}

AudioClip ramp_clip(std::size_t n, int rate = 16000) {
  AudioClip c;
  c.sample_rate = rate;
  c.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) c.samples[i] = std::sin(0.001 * static_cast<double>(i * i % 7919));
  return c;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

}  // namespace

TEST_CASE("resample passes equal rates through bitwise") {
  const AudioClip c = ramp_clip(1000);
  const AudioClip r = resample(c, 16000);
  CHECK(r.samples == c.samples);
  CHECK(r.sample_rate == 16000);
}

TEST_CASE("resample length follows the rate ratio") {
  CHECK(resample(ramp_clip(32000, 32000), 16000).samples.size() == 16000);
  CHECK(resample(ramp_clip(11025, 44100), 16000).samples.size() == 4000);
  CHECK(resample(ramp_clip(1000, 4000), 16000).samples.size() == 4000);
  CHECK_THROWS_AS(resample(ramp_clip(10), 0), ContractError);
}

TEST_CASE("a 440 Hz tone keeps its DFT peak through 44.1 kHz to 16 kHz") {
  // 0.25 s at 16 kHz is 4000 samples, so bins are 4 Hz wide and 440 Hz is bin 110.
  const AudioClip r = resample(sine_clip(440.0, 44100, 11025), 16000);
  REQUIRE(r.samples.size() == 4000);
  const auto peak = static_cast<long>(oracle::dft_peak_bin(r.samples));
  CHECK(std::labs(peak - 110) <= 1);
}

TEST_CASE("fix_length tiles, truncates and is idempotent") {
  SUBCASE("4 s doubles") {
    const AudioClip c = ramp_clip(64000);
    const AudioClip f = fix_length(c);
    REQUIRE(f.samples.size() == 128000);
    for (std::size_t i = 0; i < 64000; ++i) {
      REQUIRE(f.samples[i] == c.samples[i]);
      REQUIRE(f.samples[i + 64000] == c.samples[i]);
    }
  }
  SUBCASE("16.2 s keeps the first 8 s") {
    const AudioClip c = ramp_clip(259200);
    const AudioClip f = fix_length(c);
    REQUIRE(f.samples.size() == 128000);
    CHECK(std::equal(f.samples.begin(), f.samples.end(), c.samples.begin()));
  }
  SUBCASE("exactly 8 s is unchanged") {
    const AudioClip c = ramp_clip(128000);
    CHECK(fix_length(c).samples == c.samples);
  }
  SUBCASE("partial final repeat") {
    const AudioClip c = ramp_clip(50000);
    const AudioClip f = fix_length(c);
    REQUIRE(f.samples.size() == 128000);
    CHECK(f.samples[100000] == c.samples[0]);
    CHECK(f.samples[127999] == c.samples[27999]);
    CHECK(fix_length(f).samples == f.samples);
  }
  CHECK_THROWS_AS(fix_length(AudioClip{}), ContractError);
}

TEST_CASE("normalize_amplitude scales to unit peak") {
  AudioClip c = sine_clip(100.0, 16000, 1600, 0.5);
  const AudioClip n = normalize_amplitude(c);
  REQUIRE(n.samples.size() == c.samples.size());
  double peak = 0.0;
  for (double v : n.samples) peak = std::max(peak, std::abs(v));
  CHECK(peak == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(testing::max_abs_diff(normalize_amplitude(n).samples, n.samples) < 1e-12);

  AudioClip scaled = c;
  for (double& v : scaled.samples) v *= 7.25;
  CHECK(testing::max_abs_diff(normalize_amplitude(scaled).samples, n.samples) < 1e-12);

  AudioClip zero;
  zero.samples.assign(100, 0.0);
  CHECK(normalize_amplitude(zero).samples == zero.samples);
}

TEST_CASE("mel spectrogram shape, floor and contract") {
  const MelExtractor ex;
  AudioClip zero;
  zero.samples.assign(128000, 0.0);
  const Spectrogram s = ex(zero);
  CHECK(s.frames() == 249);
  CHECK(s.bands() == 64);
  for (double v : s.values.data()) REQUIRE(v == doctest::Approx(std::log(1e-6)).epsilon(1e-12));

  AudioClip short_clip;
  short_clip.samples.assign(1000, 0.0);
  CHECK_THROWS_AS(ex(short_clip), ContractError);
  AudioClip wrong_rate = zero;
  wrong_rate.sample_rate = 8000;
  CHECK_THROWS_AS(ex(wrong_rate), ContractError);
}

TEST_CASE("mel filterbank and frames match the direct oracle") {
  const MelExtractor ex;
  std::vector<double> centers;
  const auto fb = oracle::mel_filterbank(64, 1024, 16000.0, 0.0, 8000.0, &centers);
  REQUIRE(ex.filterbank().size() == 64);
  for (std::size_t m = 0; m < 64; ++m) {
    REQUIRE(testing::max_abs_diff(ex.filterbank()[m], fb[m]) < 1e-12);
    REQUIRE(ex.band_centers()[m] == doctest::Approx(centers[m]).epsilon(1e-12));
  }

  const AudioClip c = sine_clip(1000.0, 16000, 128000);
  const Spectrogram s = ex(c);
  for (std::size_t frame : {0u, 17u, 248u}) {
    const auto expect = oracle::log_mel_frame(c.samples, frame * 512, 1024, fb, 1e-6);
    std::vector<double> got(s.values.data().begin() + frame * 64, s.values.data().begin() + (frame + 1) * 64);
    CHECK(testing::max_abs_diff(got, expect) < 1e-8);
  }

  std::size_t nearest = 0;
  for (std::size_t m = 1; m < 64; ++m) {
    if (std::abs(centers[m] - 1000.0) < std::abs(centers[nearest] - 1000.0)) nearest = m;
  }
  const auto row = s.values.data().subspan(100 * 64, 64);
  const auto argmax = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
  CHECK(argmax == nearest);
}

TEST_CASE("preprocess always yields 249x64") {
  const MelExtractor ex;
  for (std::size_t n : {3200u, 64000u, 259200u}) {
    AudioClip c = ramp_clip(n, 44100);
    CHECK(preprocess(c, ex).values.shape() == Shape{249, 64});
  }
}

TEST_CASE("annotation rows parse and malformed rows name the line") {
  std::istringstream ok("0.0\t2.5\t1\t0\n\n2.5\t4.0\t0\t1\n");
  const auto rows = parse_annotations(ok, "a.txt");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].crackle);
  CHECK_FALSE(rows[0].wheeze);
  CHECK(rows[1].end_s == 4.0);

  auto line_of = [](const std::string& text) -> std::size_t {
    std::istringstream in(text);
    try {
      parse_annotations(in, "bad.txt");
    } catch (const ParseError& e) {
      CHECK(e.file() == "bad.txt");
      return e.line();
    }
    return 0;
  };
  CHECK(line_of("0.0\t1.0\t0\t0\n1.0\t2.0\t0\n") == 2);
  CHECK(line_of("x\t1.0\t0\t0\n") == 1);
  CHECK(line_of("0.0\t1.0\t0\t0\n\n2.0\t1.0\t0\t0\n") == 3);
  CHECK(line_of("0.0\t1.0\t2\t0\n") == 1);
}

TEST_CASE("label mapping from flags") {
  CHECK(label_from_flags(false, false) == Label::Normal);
  CHECK(label_from_flags(true, false) == Label::Crackle);
  CHECK(label_from_flags(false, true) == Label::Wheeze);
  CHECK(label_from_flags(true, true) == Label::Both);
  CHECK(subject_from_recording("101_1b1_Al_sc_Meditron", "f") == "101");
}

TEST_CASE("load_icbhi fixtures") {
  testing::TempDir dir("icbhi");
  std::vector<double> ten_s(40000);
  for (std::size_t i = 0; i < ten_s.size(); ++i) ten_s[i] = 0.5 * std::sin(0.01 * static_cast<double>(i));
  write_wav(dir / "101_1b1_Al_sc_Meditron.wav", ten_s, 4000);
  write_text(dir / "101_1b1_Al_sc_Meditron.txt", "0.0\t2.5\t1\t0\n");

  SUBCASE("one crackle cycle from a 10 s recording") {
    write_text(dir / "split.txt", "101_1b1_Al_sc_Meditron\ttrain\n");
    const Dataset ds = load_icbhi(dir.path(), dir / "split.txt");
    REQUIRE(ds.clips.size() == 1);
    CHECK(ds.clips[0].label == Label::Crackle);
    CHECK(ds.clips[0].sample_rate == 4000);
    REQUIRE(ds.clips[0].samples.size() == 10000);
    CHECK(ds.clips[0].samples[0] == doctest::Approx(ten_s[0]).epsilon(1e-7));
    CHECK(ds.clips[0].samples[9999] == doctest::Approx(ten_s[9999]).epsilon(1e-6));
    CHECK(ds.clips[0].subject_id == "101");
    CHECK(ds.manifest.entries[0].split == Split::Train);
  }
  SUBCASE("shared patient prefix gives one subject, and crossing splits is rejected") {
    write_wav(dir / "101_2b2_Ar_mc_LittC2SE.wav", ten_s, 4000);
    write_text(dir / "101_2b2_Ar_mc_LittC2SE.txt", "1.0\t3.0\t0\t1\n");
    write_text(dir / "split.txt", "101_1b1_Al_sc_Meditron\ttest\n101_2b2_Ar_mc_LittC2SE\ttest\n");
    const Dataset ds = load_icbhi(dir.path(), dir / "split.txt");
    REQUIRE(ds.clips.size() == 2);
    CHECK(ds.clips[0].subject_id == ds.clips[1].subject_id);
    CHECK(ds.manifest.count(Split::Test) == 2);

    write_text(dir / "split.txt", "101_1b1_Al_sc_Meditron\ttrain\n101_2b2_Ar_mc_LittC2SE\ttest\n");
    CHECK_THROWS_AS(load_icbhi(dir.path(), dir / "split.txt"), DataFormatError);
  }
  SUBCASE("malformed row") {
    write_text(dir / "101_1b1_Al_sc_Meditron.txt", "0.0\t2.5\t1\n");
    write_text(dir / "split.txt", "101_1b1_Al_sc_Meditron\ttrain\n");
    try {
      load_icbhi(dir.path(), dir / "split.txt");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 1);
      CHECK(std::string(e.what()).find("101_1b1_Al_sc_Meditron.txt") != std::string::npos);
    }
  }
  SUBCASE("missing WAV") {
    write_text(dir / "102_1b1_Al_sc_Meditron.txt", "0.0\t1.0\t0\t0\n");
    write_text(dir / "split.txt", "101_1b1_Al_sc_Meditron\ttrain\n102_1b1_Al_sc_Meditron\ttest\n");
    CHECK_THROWS_AS(load_icbhi(dir.path(), dir / "split.txt"), MissingFileError);
  }
}

TEST_CASE("WAV roundtrip is exact for float32-representable samples") {
  testing::TempDir dir("wav");
  std::vector<double> s = {0.0, 0.5, -0.25, 1.0, -1.0, 0.125};
  write_wav(dir / "x.wav", s, 22050);
  const WavData w = read_wav(dir / "x.wav");
  CHECK(w.sample_rate == 22050);
  CHECK(w.samples == s);
  CHECK_THROWS_AS(read_wav(dir / "absent.wav"), MissingFileError);
  write_text(dir / "junk.wav", "definitely not audio");
  CHECK_THROWS_AS(read_wav(dir / "junk.wav"), DataFormatError);
}

TEST_CASE("synthetic dataset counts, determinism and splits") {
  SynthConfig cfg;
  cfg.train_per_class = 25;
  cfg.test_per_class = 0;
  cfg.subjects = 10;
  cfg.seconds = 0.5;
  const Dataset ds = synth_dataset(cfg, 7);
  REQUIRE(ds.manifest.entries.size() == 100);
  std::array<int, 4> per_label{};
  for (const auto& e : ds.manifest.entries) ++per_label[static_cast<int>(e.label)];
  CHECK(per_label == std::array<int, 4>{25, 25, 25, 25});

  const Dataset again = synth_dataset(cfg, 7);
  bool identical = true;
  for (std::size_t i = 0; i < ds.clips.size(); ++i) identical = identical && ds.clips[i].samples == again.clips[i].samples;
  CHECK(identical);
  CHECK(synth_dataset(cfg, 8).clips[0].samples != ds.clips[0].samples);

  cfg.train_per_class = 6;
  cfg.test_per_class = 3;
  const Dataset split = synth_dataset(cfg, 7);
  CHECK(split.manifest.count(Split::Train) == 24);
  CHECK(split.manifest.count(Split::Test) == 12);
  std::set<std::string> train_subjects, test_subjects;
  for (const auto& e : split.manifest.entries) (e.split == Split::Train ? train_subjects : test_subjects).insert(e.subject_id);
  for (const auto& s : test_subjects) CHECK(train_subjects.count(s) == 0);

  cfg.train_per_class = 0;
  cfg.test_per_class = 0;
  CHECK_THROWS_AS(synth_dataset(cfg, 7), ContractError);
}

TEST_CASE("the clean wheeze tone peaks at its drawn frequency") {
  const SynthConfig cfg;
  for (std::uint64_t index : {0u, 5u, 11u}) {
    const SynthClipPlan plan = plan_synth_clip(Label::Wheeze, cfg, 3, index);
    REQUIRE(plan.wheeze_hz >= 200.0);
    REQUIRE(plan.wheeze_hz <= 800.0);
    const SynthComponents parts = render_synth_clip(plan, cfg);
    // 4000 samples at 16 kHz: 4 Hz bins.
    const std::vector<double> head(parts.tone.begin(), parts.tone.begin() + 4000);
    const double expected_bin = plan.wheeze_hz / 4.0;
    CHECK(std::abs(static_cast<double>(oracle::dft_peak_bin(head)) - expected_bin) <= 1.0);
  }
  const SynthComponents normal = render_synth_clip(plan_synth_clip(Label::Normal, cfg, 3, 1), cfg);
  CHECK(std::all_of(normal.tone.begin(), normal.tone.end(), [](double v) { return v == 0.0; }));
}

TEST_CASE("a written synthetic dataset reloads through the ICBHI loader") {
  testing::TempDir dir("synthio");
  SynthConfig cfg;
  cfg.train_per_class = 2;
  cfg.test_per_class = 1;
  cfg.subjects = 4;
  cfg.seconds = 0.25;
  const Dataset ds = synth_dataset(cfg, 11);
  write_dataset(ds, dir.path());
  const Dataset back = load_icbhi(dir.path(), dir / "split.txt");
  REQUIRE(back.clips.size() == ds.clips.size());
  std::multiset<int> a, b;
  for (const auto& e : ds.manifest.entries) a.insert(static_cast<int>(e.label) * 2 + (e.split == Split::Test));
  for (const auto& e : back.manifest.entries) b.insert(static_cast<int>(e.label) * 2 + (e.split == Split::Test));
  CHECK(a == b);
}
