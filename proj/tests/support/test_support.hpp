#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "forge/alignment.hpp"
#include "forge/audio.hpp"
#include "forge/corpus.hpp"
#include "forge/subtitle.hpp"

namespace forge::test {

// The two-cue sample used throughout the tests.
inline constexpr char kSampleSrt[] =
    "1\n"
    "00:00:15,761 --> 00:00:17,129\n"
    "오늘 제가 얘기할 주제는요\n"
    "\n"
    "2\n"
    "00:00:17,129 --> 00:00:20,337\n"
    "예술가가 되자. 지금 당장! 입니다.\n";

std::filesystem::path fixture_dir();

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

// Piecewise signal: each part is `ms` long, a sine of `hz` at `amplitude`
// (amplitude 0 is silence).
struct Part {
  int ms = 0;
  int amplitude = 0;
  double hz = 440.0;
};
AudioBuffer make_signal(const std::vector<Part>& parts, int rate = kPipelineSampleRate);

// Tone [0,900), silence [900,1100), tone [1100,2000).
AudioBuffer gap_fixture();

AudioBuffer random_audio(std::mt19937_64& rng, std::size_t max_len, int rate);

// Random text with Hangul, Latin letters, digits and single spaces; no
// leading/trailing space, never empty.
std::string random_text(std::mt19937_64& rng, std::size_t max_words = 5);
// Text that survives normalization unchanged (no punctuation, no brackets).
std::string random_plain_text(std::mt19937_64& rng, std::size_t max_words = 5);

SubtitleDocument random_document(std::mt19937_64& rng, std::size_t max_segments = 12);
SyncMap random_sync_map(std::mt19937_64& rng, std::size_t max_entries = 12);
CorpusManifest random_manifest(std::mt19937_64& rng, std::size_t max_fragments = 12);

// A project on disk. Each source is tone bursts separated by silence with an
// SRT whose cue edges sit inside the silences; the shared mock table echoes
// every cue's text except the `corrupted` cue numbers, which get unrelated
// text.
struct SyntheticSource {
  std::string source_id;
  int cues = 10;
  std::set<int> corrupted;
};

struct SyntheticProject {
  std::filesystem::path config;
  std::filesystem::path out_dir;
  std::filesystem::path mock_table;
};

SyntheticProject make_synthetic_project(const std::filesystem::path& dir, const std::vector<SyntheticSource>& sources,
                                        int parallelism = 4);

// Reference text of cue `cue` of `source_id` as written in the SRT.
std::string synthetic_cue_text(const std::string& source_id, int cue);

}  // namespace forge::test
