#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "forge/subtitle.hpp"

namespace forge {

inline constexpr int kPipelineSampleRate = 16000;

bool is_standard_sample_rate(int hz) noexcept;

// Mono signed 16-bit PCM. Immutable once built.
class AudioBuffer {
 public:
  AudioBuffer() = default;
  // Throws std::invalid_argument if sample_rate_hz <= 0.
  AudioBuffer(int sample_rate_hz, std::vector<std::int16_t> samples);

  int sample_rate_hz() const noexcept { return sample_rate_hz_; }
  std::span<const std::int16_t> samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }

  // floor(len * 1000 / rate)
  TimeMs duration() const noexcept;

  friend bool operator==(const AudioBuffer&, const AudioBuffer&) = default;

 private:
  int sample_rate_hz_ = kPipelineSampleRate;
  std::vector<std::int16_t> samples_;
};

// RIFF/WAVE, PCM 16-bit, mono or stereo. Stereo is downmixed by averaging
// (rounded half away from zero). Throws UnsupportedFormat, CorruptFile, IoError.
AudioBuffer decode_wav(std::span<const std::uint8_t> bytes);
AudioBuffer read_wav(const std::filesystem::path& path);

// Canonical 44-byte header, PCM 16-bit mono.
std::vector<std::uint8_t> encode_wav(const AudioBuffer& buffer);
void write_wav(const AudioBuffer& buffer, const std::filesystem::path& path);

// Header fields without decoding samples.
struct WavInfo {
  int sample_rate_hz = 0;
  int channels = 0;
  int bits_per_sample = 0;
  std::uint32_t data_bytes = 0;
};
WavInfo probe_wav(const std::filesystem::path& path);

// Linear interpolation; output length = round(len * target / source).
AudioBuffer resample_linear(const AudioBuffer& buffer, int target_hz);

// Samples [floor(start*rate/1000), floor(end*rate/1000)); end == duration
// reaches the last sample so slicing [0, duration) returns the whole buffer.
// Throws OutOfRange unless 0 <= start < end <= duration.
AudioBuffer slice_ms(const AudioBuffer& buffer, TimeMs start, TimeMs end);

struct EnergyTrack {
  int frame_ms = 0;
  int hop_ms = 0;
  std::vector<double> energies;  // RMS per frame, frame i starts at i*hop_ms

  // Center of frame i in milliseconds.
  TimeMs frame_center(std::size_t i) const noexcept {
    return TimeMs{static_cast<std::int64_t>(i) * hop_ms + frame_ms / 2};
  }
};

inline constexpr int kEnergyFrameMs = 20;
inline constexpr int kEnergyHopMs = 10;

// Requires frame_ms >= hop_ms >= 1 (std::invalid_argument otherwise).
EnergyTrack rms_frames(const AudioBuffer& buffer, int frame_ms, int hop_ms);

// Quietest point near `around`, searched among frame centers inside
// [around - window, around + window] clipped to [0, duration]. Candidates
// tied at the minimum form runs of adjacent frames; the run closest to
// `around` wins (earlier on a tie). If `around` already lies in that run it
// is returned unchanged, otherwise the middle of the run, so a boundary
// inside speech lands in the middle of the pause rather than at its edge. Returns `around` when no frame center lies in the window.
TimeMs find_low_energy_point(const EnergyTrack& track, TimeMs duration, TimeMs around, TimeMs window);
TimeMs find_low_energy_point(const AudioBuffer& buffer, TimeMs around, TimeMs window);

}  // namespace forge
