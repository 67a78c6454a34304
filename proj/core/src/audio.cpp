#include "forge/audio.hpp"

#include <algorithm>
#include <optional>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string_view>

#include "forge/error.hpp"
#include "forge/file_io.hpp"

namespace forge {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t le16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

std::uint32_t le32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) | (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

bool tag_is(std::span<const std::uint8_t> b, std::size_t at, std::string_view tag) {
  return std::memcmp(b.data() + at, tag.data(), 4) == 0;
}

std::int16_t clamp16(double v) {
  v = std::round(v);
  v = std::clamp(v, double{std::numeric_limits<std::int16_t>::min()},
                 double{std::numeric_limits<std::int16_t>::max()});
  return static_cast<std::int16_t>(v);
}

// Mean of two samples, rounded half away from zero.
std::int16_t average(std::int16_t a, std::int16_t b) {
  const int sum = int{a} + int{b};
  return static_cast<std::int16_t>(sum >= 0 ? (sum + 1) / 2 : (sum - 1) / 2);
}

struct ParsedHeader {
  WavInfo info;
  std::size_t data_offset = 0;
};

ParsedHeader parse_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || !tag_is(bytes, 0, "RIFF") || !tag_is(bytes, 8, "WAVE")) {
    throw UnsupportedFormat("not a RIFF/WAVE file");
  }
  ParsedHeader h;
  bool have_fmt = false;
  std::uint16_t format = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t chunk_size = le32(bytes, pos + 4);
    const std::size_t body = pos + 8;
    if (tag_is(bytes, pos, "fmt ")) {
      if (chunk_size < 16 || body + chunk_size > bytes.size()) throw CorruptFile("truncated fmt chunk");
      format = le16(bytes, body);
      h.info.channels = le16(bytes, body + 2);
      h.info.sample_rate_hz = static_cast<int>(le32(bytes, body + 4));
      h.info.bits_per_sample = le16(bytes, body + 14);
      if (format == kFormatExtensible) {
        if (chunk_size < 40) throw CorruptFile("truncated WAVE_FORMAT_EXTENSIBLE header");
        format = le16(bytes, body + 24);  // first two bytes of the subformat GUID
      }
      have_fmt = true;
    } else if (tag_is(bytes, pos, "data")) {
      if (!have_fmt) throw CorruptFile("data chunk before fmt chunk");
      if (format != kFormatPcm) throw UnsupportedFormat("WAV is not PCM (format " + std::to_string(format) + ")");
      if (h.info.bits_per_sample != 16) {
        throw UnsupportedFormat("only 16-bit PCM is supported, got " + std::to_string(h.info.bits_per_sample));
      }
      if (h.info.channels != 1 && h.info.channels != 2) {
        throw UnsupportedFormat("only mono or stereo is supported, got " + std::to_string(h.info.channels));
      }
      if (h.info.sample_rate_hz <= 0) throw CorruptFile("sample rate is zero");
      if (body + chunk_size > bytes.size()) throw CorruptFile("data chunk is truncated");
      if (chunk_size % (2u * static_cast<unsigned>(h.info.channels)) != 0) {
        throw CorruptFile("data chunk is not a whole number of frames");
      }
      h.info.data_bytes = chunk_size;
      h.data_offset = body;
      return h;
    }
    pos = body + chunk_size + (chunk_size & 1u);
  }
  throw CorruptFile(have_fmt ? "missing data chunk" : "missing fmt chunk");
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  const std::string raw = read_file(path);
  return {raw.begin(), raw.end()};
}

}  // namespace

bool is_standard_sample_rate(int hz) noexcept {
  return hz == 8000 || hz == 16000 || hz == 22050 || hz == 44100 || hz == 48000;
}

AudioBuffer::AudioBuffer(int sample_rate_hz, std::vector<std::int16_t> samples)
    : sample_rate_hz_(sample_rate_hz), samples_(std::move(samples)) {
  if (sample_rate_hz <= 0) throw std::invalid_argument("sample rate must be positive");
}

TimeMs AudioBuffer::duration() const noexcept {
  return TimeMs{static_cast<std::int64_t>(samples_.size()) * 1000 / sample_rate_hz_};
}

AudioBuffer decode_wav(std::span<const std::uint8_t> bytes) {
  const ParsedHeader h = parse_header(bytes);
  const auto data = bytes.subspan(h.data_offset, h.info.data_bytes);
  std::vector<std::int16_t> samples;
  if (h.info.channels == 1) {
    samples.resize(data.size() / 2);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      samples[i] = static_cast<std::int16_t>(le16(data, 2 * i));
    }
  } else {
    samples.resize(data.size() / 4);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      samples[i] = average(static_cast<std::int16_t>(le16(data, 4 * i)),
                           static_cast<std::int16_t>(le16(data, 4 * i + 2)));
    }
  }
  return AudioBuffer(h.info.sample_rate_hz, std::move(samples));
}

AudioBuffer read_wav(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  try {
    return decode_wav(bytes);
  } catch (const Error& e) {
    // keep the error kind, add the file name
    if (dynamic_cast<const UnsupportedFormat*>(&e)) throw UnsupportedFormat(path.string() + ": " + e.what());
    throw CorruptFile(path.string() + ": " + e.what());
  }
}

WavInfo probe_wav(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  return parse_header(bytes).info;
}

std::vector<std::uint8_t> encode_wav(const AudioBuffer& buffer) {
  const auto samples = buffer.samples();
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  const auto rate = static_cast<std::uint32_t>(buffer.sample_rate_hz());
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put32(out, 36 + data_bytes);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put32(out, 16);
  put16(out, kFormatPcm);
  put16(out, 1);         // channels
  put32(out, rate);
  put32(out, rate * 2);  // byte rate
  put16(out, 2);         // block align
  put16(out, 16);        // bits per sample
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put32(out, data_bytes);
  for (std::int16_t s : samples) put16(out, static_cast<std::uint16_t>(s));
  return out;
}

void write_wav(const AudioBuffer& buffer, const std::filesystem::path& path) {
  const auto bytes = encode_wav(buffer);
  write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

AudioBuffer resample_linear(const AudioBuffer& buffer, int target_hz) {
  if (target_hz <= 0) throw std::invalid_argument("target sample rate must be positive");
  const int source_hz = buffer.sample_rate_hz();
  if (target_hz == source_hz) return buffer;
  const auto in = buffer.samples();
  if (in.empty()) return AudioBuffer(target_hz, {});

  const std::int64_t len = static_cast<std::int64_t>(in.size());
  const std::int64_t out_len = (2 * len * target_hz + source_hz) / (2 * std::int64_t{source_hz});
  std::vector<std::int16_t> out(static_cast<std::size_t>(out_len));
  for (std::int64_t i = 0; i < out_len; ++i) {
    const std::int64_t num = i * source_hz;
    const std::int64_t idx = num / target_hz;
    const double frac = static_cast<double>(num % target_hz) / target_hz;
    const double a = in[static_cast<std::size_t>(std::min(idx, len - 1))];
    const double b = in[static_cast<std::size_t>(std::min(idx + 1, len - 1))];
    out[static_cast<std::size_t>(i)] = clamp16(a + (b - a) * frac);
  }
  return AudioBuffer(target_hz, std::move(out));
}

AudioBuffer slice_ms(const AudioBuffer& buffer, TimeMs start, TimeMs end) {
  const TimeMs duration = buffer.duration();
  if (start.count() < 0 || start >= end || end > duration) {
    throw OutOfRange("slice [" + std::to_string(start.count()) + ", " + std::to_string(end.count()) +
                     ") ms outside buffer of " + std::to_string(duration.count()) + " ms");
  }
  const std::int64_t rate = buffer.sample_rate_hz();
  const auto first = static_cast<std::size_t>(start.count() * rate / 1000);
  const auto last = end == duration ? buffer.size() : static_cast<std::size_t>(end.count() * rate / 1000);
  const auto all = buffer.samples();
  return AudioBuffer(buffer.sample_rate_hz(), std::vector<std::int16_t>(all.begin() + static_cast<std::ptrdiff_t>(first),
                                                                        all.begin() + static_cast<std::ptrdiff_t>(last)));
}

EnergyTrack rms_frames(const AudioBuffer& buffer, int frame_ms, int hop_ms) {
  if (hop_ms < 1 || frame_ms < hop_ms) throw std::invalid_argument("require frame_ms >= hop_ms >= 1");
  EnergyTrack track{frame_ms, hop_ms, {}};
  const std::int64_t duration = buffer.duration().count();
  if (duration < frame_ms) return track;

  const std::int64_t rate = buffer.sample_rate_hz();
  const auto x = buffer.samples();
  // Exact integer prefix sums of x^2; at most 2^30 per sample.
  std::vector<std::int64_t> prefix(x.size() + 1, 0);
  for (std::size_t i = 0; i < x.size(); ++i) prefix[i + 1] = prefix[i] + std::int64_t{x[i]} * x[i];

  const std::int64_t frames = 1 + (duration - frame_ms) / hop_ms;
  const std::int64_t frame_len = frame_ms * rate / 1000;
  track.energies.resize(static_cast<std::size_t>(frames), 0.0);
  if (frame_len == 0) return track;
  for (std::int64_t i = 0; i < frames; ++i) {
    const std::int64_t begin = i * hop_ms * rate / 1000;
    const std::int64_t sum = prefix[static_cast<std::size_t>(begin + frame_len)] - prefix[static_cast<std::size_t>(begin)];
    track.energies[static_cast<std::size_t>(i)] = std::sqrt(static_cast<double>(sum) / static_cast<double>(frame_len));
  }
  return track;
}

TimeMs find_low_energy_point(const EnergyTrack& track, TimeMs duration, TimeMs around, TimeMs window) {
  const TimeMs lo = std::max(TimeMs{0}, around - window);
  const TimeMs hi = std::min(duration, around + window);

  // Candidate frame index range [first, last] with centers inside [lo, hi].
  const std::int64_t half = track.frame_ms / 2;
  const std::int64_t hop = track.hop_ms;
  const std::int64_t count = static_cast<std::int64_t>(track.energies.size());
  std::int64_t first = std::max<std::int64_t>(0, (lo.count() - half + hop - 1) / hop);
  if (lo.count() - half < 0) first = 0;
  std::int64_t last = hi.count() - half < 0 ? -1 : (hi.count() - half) / hop;
  last = std::min(last, count - 1);
  if (first > last) return around;

  const auto begin = track.energies.begin();
  const double min_energy = *std::min_element(begin + first, begin + last + 1);

  struct Run {
    std::int64_t first, last;
  };
  std::optional<Run> best;
  std::int64_t best_distance = 0;
  bool best_contains = false;
  for (std::int64_t i = first; i <= last; ++i) {
    if (track.energies[static_cast<std::size_t>(i)] != min_energy) continue;
    Run run{i, i};
    while (run.last + 1 <= last && track.energies[static_cast<std::size_t>(run.last + 1)] == min_energy) ++run.last;
    i = run.last;

    const std::int64_t c0 = track.frame_center(static_cast<std::size_t>(run.first)).count();
    const std::int64_t c1 = track.frame_center(static_cast<std::size_t>(run.last)).count();
    // the run's frames cover [c0 - half, c1 + half]
    const bool contains = around.count() >= c0 - half && around.count() <= c1 + half;
    const std::int64_t distance = contains ? 0 : std::min(std::abs(c0 - around.count()), std::abs(c1 - around.count()));
    if (!best || distance < best_distance) {
      best = run;
      best_distance = distance;
      best_contains = contains;
    }
  }

  if (best_contains) return around;
  const std::int64_t mid = best->first + (best->last - best->first) / 2;
  return track.frame_center(static_cast<std::size_t>(mid));
}

TimeMs find_low_energy_point(const AudioBuffer& buffer, TimeMs around, TimeMs window) {
  return find_low_energy_point(rms_frames(buffer, kEnergyFrameMs, kEnergyHopMs), buffer.duration(), around, window);
}

}  // namespace forge
