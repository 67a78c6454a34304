#include "test_support.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "forge/asr_backend.hpp"
#include "forge/unicode.hpp"

namespace forge::test {
namespace fs = std::filesystem;

fs::path fixture_dir() { return FORGE_TEST_FIXTURE_DIR; }

TempDir::TempDir() {
  std::string templ = (fs::temp_directory_path() / "forge-test-XXXXXX").string();
  if (::mkdtemp(templ.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
  path_ = templ;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

AudioBuffer make_signal(const std::vector<Part>& parts, int rate) {
  std::vector<std::int16_t> samples;
  for (const Part& p : parts) {
    const auto n = static_cast<std::size_t>(std::int64_t{p.ms} * rate / 1000);
    for (std::size_t i = 0; i < n; ++i) {
      const double v = p.amplitude * std::sin(2.0 * std::numbers::pi * p.hz * static_cast<double>(i) / rate);
      samples.push_back(static_cast<std::int16_t>(std::lround(v)));
    }
  }
  return AudioBuffer(rate, std::move(samples));
}

AudioBuffer gap_fixture() { return make_signal({{900, 12000, 440.0}, {200, 0}, {900, 12000, 440.0}}); }

AudioBuffer random_audio(std::mt19937_64& rng, std::size_t max_len, int rate) {
  std::uniform_int_distribution<std::size_t> len(0, max_len);
  std::uniform_int_distribution<int> sample(-32768, 32767);
  std::vector<std::int16_t> s(len(rng));
  for (auto& v : s) v = static_cast<std::int16_t>(sample(rng));
  return AudioBuffer(rate, std::move(s));
}

namespace {

const std::vector<std::string> kWords{"오늘", "제가", "얘기할", "주제는요", "예술가가", "되자", "지금", "당장",
                                      "입니다", "감사합니다", "speech", "corpus", "TEDx", "2019", "한국어",
                                      "음성", "말뭉치", "café", "ünïcode", "데이터"};
const std::vector<std::string> kPunct{"", "", "", ".", ",", "!", "?", "…", "「", "」", "(박수)", "[음악]"};

std::string pick(std::mt19937_64& rng, const std::vector<std::string>& v) {
  return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

std::string join_words(std::mt19937_64& rng, std::size_t max_words, bool punct) {
  const std::size_t n = std::uniform_int_distribution<std::size_t>(1, max_words)(rng);
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (!out.empty()) out += ' ';
    out += pick(rng, kWords);
    if (punct) out += pick(rng, kPunct);
  }
  return out;
}

}  // namespace

std::string random_text(std::mt19937_64& rng, std::size_t max_words) { return join_words(rng, max_words, true); }

std::string random_plain_text(std::mt19937_64& rng, std::size_t max_words) {
  return join_words(rng, max_words, false);
}

SubtitleDocument random_document(std::mt19937_64& rng, std::size_t max_segments) {
  SubtitleDocument doc;
  const std::size_t n = std::uniform_int_distribution<std::size_t>(0, max_segments)(rng);
  std::int64_t t = std::uniform_int_distribution<std::int64_t>(0, 100'000)(rng);
  if (std::uniform_int_distribution<int>(0, 9)(rng) == 0) t = kMaxSrtTime.count() - 1'000'000;  // near the limit
  for (std::size_t i = 0; i < n; ++i) {
    SubtitleSegment s;
    s.index = std::uniform_int_distribution<int>(0, 3)(rng) == 0 ? std::uniform_int_distribution<int>(1, 99999)(rng)
                                                                   : static_cast<int>(i + 1);
    t += std::uniform_int_distribution<std::int64_t>(0, 5000)(rng);
    s.start = TimeMs(t);
    s.end = TimeMs(t + std::uniform_int_distribution<std::int64_t>(1, 8000)(rng));
    s.raw_text = random_text(rng);
    doc.segments.push_back(std::move(s));
  }
  return doc;
}

SyncMap random_sync_map(std::mt19937_64& rng, std::size_t max_entries) {
  SyncMap m;
  m.source_id = pick(rng, kWords) + "-" + std::to_string(rng() % 1000);
  m.audio_ref = "audio.wav";
  const std::size_t n = std::uniform_int_distribution<std::size_t>(0, max_entries)(rng);
  std::vector<int> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<int>(i * 3 + 1);
  std::shuffle(ids.begin(), ids.end(), rng);
  std::int64_t t = std::uniform_int_distribution<std::int64_t>(0, 2000)(rng);
  for (std::size_t i = 0; i < n; ++i) {
    SyncEntry e;
    e.id = ids[i];
    e.begin = TimeMs(t);
    t += std::uniform_int_distribution<std::int64_t>(1, 9000)(rng);
    e.end = TimeMs(t);
    t += std::uniform_int_distribution<std::int64_t>(0, 800)(rng);
    e.text = random_plain_text(rng);
    e.status = static_cast<EntryStatus>(rng() % 3);
    e.origin = static_cast<EntryOrigin>(rng() % 3);
    m.entries.push_back(std::move(e));
  }
  return m;
}

CorpusManifest random_manifest(std::mt19937_64& rng, std::size_t max_fragments) {
  std::vector<FragmentRecord> frags;
  const std::size_t n = std::uniform_int_distribution<std::size_t>(0, max_fragments)(rng);
  const std::string source = "src" + std::to_string(rng() % 100);
  for (std::size_t i = 0; i < n; ++i) {
    FragmentRecord f;
    f.fragment_id = fragment_id(source, static_cast<int>(i + 1));
    f.audio_path = source + "/" + f.fragment_id + ".wav";
    f.text = random_plain_text(rng);
    f.duration_ms = std::uniform_int_distribution<std::int64_t>(1, 30'000)(rng);
    frags.push_back(std::move(f));
  }
  return make_manifest(pick(rng, kWords), rng() % 2 ? "CC BY-NC-ND 4.0" : "", std::move(frags));
}

std::string synthetic_cue_text(const std::string& source_id, int cue) {
  static const std::vector<std::string> sentences{
      "오늘 제가 얘기할 주제는요", "예술가가 되자. 지금 당장! 입니다.", "(박수) 감사합니다, 여러분.",
      "한국어 음성 말뭉치를 만듭니다", "자막과 음성을 맞춰 봅시다!", "이 문장은 검증을 통과해야 합니다",
      "[음악] 소리 없이 조용한 구간", "말하는 속도가 빠르면 어렵죠?", "데이터는 곧 힘입니다.",
      "마지막 문장까지 들어 주셔서 고맙습니다"};
  std::size_t h = std::hash<std::string>{}(source_id);
  return sentences[(h + static_cast<std::size_t>(cue)) % sentences.size()] + " " + std::to_string(cue);
}

SyntheticProject make_synthetic_project(const fs::path& dir, const std::vector<SyntheticSource>& sources,
                                        int parallelism) {
  SyntheticProject project;
  project.out_dir = dir / "out";
  project.mock_table = dir / "mock_table.json";
  project.config = dir / "forge.json";
  std::map<std::string, std::string> table;
  nlohmann::ordered_json source_list = nlohmann::ordered_json::array();

  for (const auto& src : sources) {
    // Per-source amplitude offset so that sources never share a fingerprint.
    int salt = 0;
    for (const unsigned char c : src.source_id) salt = (salt * 31 + c) % 997;
    std::vector<Part> parts{{300, 0}};
    SubtitleDocument doc;
    std::int64_t t = 300;
    for (int k = 1; k <= src.cues; ++k) {
      const int tone_ms = 600 + 70 * (k % 7);
      parts.push_back({tone_ms, 9000 + 500 * (k % 5) + salt, 220.0 + 35.0 * k});
      parts.push_back({400, 0});
      doc.segments.push_back({k, TimeMs(t - 100), TimeMs(t + tone_ms + 100), synthetic_cue_text(src.source_id, k)});
      t += tone_ms + 400;
    }
    const AudioBuffer audio = make_signal(parts);
    const fs::path audio_path = dir / (src.source_id + ".wav");
    const fs::path srt_path = dir / (src.source_id + ".srt");
    write_wav(audio, audio_path);
    write_text(srt_path, serialize_srt(doc));

    // Keyed on the snapped boundaries, which is what validation will slice.
    const SyncMap snapped = snap_boundaries(build_sync_map(doc, "audio.wav"), audio, 250);
    for (const auto& e : snapped.entries) {
      const std::string key = audio_fingerprint(slice_ms(audio, e.begin, e.end));
      table[key] = src.corrupted.count(e.id) ? "전혀 관계없는 엉뚱한 인식 결과 xyz" : synthetic_cue_text(src.source_id, e.id);
    }
    nlohmann::ordered_json s;
    s["source_id"] = src.source_id;
    s["media"] = audio_path.filename().string();
    s["subtitle"] = srt_path.filename().string();
    source_list.push_back(std::move(s));
  }
  write_text(project.mock_table, serialize_mock_table(table));

  nlohmann::ordered_json cfg;
  cfg["version"] = 1;
  cfg["out_dir"] = "out";
  cfg["corpus_name"] = "synthetic";
  cfg["license"] = "CC0";
  cfg["snap_window_ms"] = 250;
  cfg["validation"] = {{"cer_threshold", 0.25}, {"min_duration_ms", 500}, {"max_duration_ms", 30000},
                       {"language_code", "ko-KR"}};
  cfg["backend"] = {{"type", "mock"}, {"table", "mock_table.json"}};
  cfg["parallelism"] = parallelism;
  cfg["sources"] = source_list;
  write_text(project.config, cfg.dump(2) + "\n");
  return project;
}

}  // namespace forge::test
