#pragma once

#include <filesystem>
#include <span>
#include <vector>

namespace addn {

struct WavData {
  std::vector<double> samples;  // mono, nominally in [-1, 1]
  int sample_rate = 0;
};

/// Decodes RIFF/WAVE with PCM 16/24/32-bit or IEEE float 32/64-bit samples.
/// Multi-channel audio is averaged to mono. Throws MissingFileError or
/// DataFormatError.
WavData read_wav(const std::filesystem::path& path);

/// Writes mono 32-bit IEEE float WAV.
void write_wav(const std::filesystem::path& path, std::span<const double> samples, int sample_rate);

}  // namespace addn
