#include "forge/yield_table.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "json.hpp"

#include "forge/error.hpp"
#include "forge/file_io.hpp"

namespace forge {
namespace {

constexpr std::size_t kFixtureColumns = 9;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// One CSV record on one line; "" inside quotes is a literal quote.
std::vector<std::string> split_csv(std::string_view line, const std::string& where) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back().push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back().push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back().push_back(c);
    }
  }
  if (quoted) throw SchemaError(where, "unterminated quoted field");
  for (auto& f : fields) f = std::string(trim(f));
  return fields;
}

std::int64_t parse_int(std::string_view s, const std::string& where) {
  std::string digits;
  for (char c : s) {
    if (c != ',') digits.push_back(c);
  }
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || digits.empty() || v < 0) {
    throw SchemaError(where, "expected a non-negative integer, got '" + std::string(s) + "'");
  }
  return v;
}

// "M:SS" or "H:MM:SS" -> milliseconds
std::int64_t parse_clock(std::string_view s, const std::string& where) {
  std::vector<std::int64_t> parts;
  std::size_t pos = 0;
  while (true) {
    const std::size_t colon = s.find(':', pos);
    const std::string_view part = s.substr(pos, colon == std::string_view::npos ? std::string_view::npos : colon - pos);
    parts.push_back(parse_int(part, where));
    if (colon == std::string_view::npos) break;
    pos = colon + 1;
  }
  if (parts.size() < 2 || parts.size() > 3) throw SchemaError(where, "expected M:SS or H:MM:SS");
  std::int64_t seconds = 0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0 && parts[i] >= 60) throw SchemaError(where, "minutes/seconds must be < 60");
    seconds = seconds * 60 + parts[i];
  }
  return seconds * 1000;
}

std::optional<double> parse_pct(std::string_view s, const std::string& where) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.back() == '%') s.remove_suffix(1);
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw SchemaError(where, "bad percentage");
  return v;
}

}  // namespace

YieldReport compute_yield(std::string source_id, SourceStats source, SourceStats corpus) {
  if (source.segments < 0 || source.duration_ms < 0 || corpus.segments < 0 || corpus.duration_ms < 0) {
    throw std::invalid_argument("yield inputs must be non-negative");
  }
  if (source.duration_ms == 0) throw ZeroSourceDuration("source '" + source_id + "' has zero duration");
  if (corpus.segments > source.segments || corpus.duration_ms > source.duration_ms) {
    throw std::invalid_argument("corpus of '" + source_id + "' exceeds its source");
  }
  YieldReport r;
  r.source_id = std::move(source_id);
  r.n_source_segments = source.segments;
  r.source_duration_ms = source.duration_ms;
  r.n_corpus_segments = corpus.segments;
  r.corpus_duration_ms = corpus.duration_ms;
  r.yield_duration_pct = 100.0 * static_cast<double>(corpus.duration_ms) / static_cast<double>(source.duration_ms);
  r.yield_count_pct = source.segments == 0
                          ? 0.0
                          : 100.0 * static_cast<double>(corpus.segments) / static_cast<double>(source.segments);
  return r;
}

YieldSummary aggregate_stats(const std::vector<YieldReport>& reports, SourceStats source_total,
                             SourceStats corpus_total) {
  if (reports.empty()) throw EmptyInput("no yield reports to aggregate");
  YieldSummary s;
  s.count = reports.size();
  s.total = compute_yield("Total", source_total, corpus_total);
  const auto n = static_cast<double>(s.count);
  s.avg_source_segments = static_cast<double>(source_total.segments) / n;
  s.avg_source_duration_ms = static_cast<double>(source_total.duration_ms) / n;
  s.avg_corpus_segments = static_cast<double>(corpus_total.segments) / n;
  s.avg_corpus_duration_ms = static_cast<double>(corpus_total.duration_ms) / n;
  return s;
}

YieldSummary aggregate_stats(const std::vector<YieldReport>& reports) {
  if (reports.empty()) throw EmptyInput("no yield reports to aggregate");
  SourceStats src;
  SourceStats cor;
  for (const auto& r : reports) {
    src.segments += r.n_source_segments;
    src.duration_ms += r.source_duration_ms;
    cor.segments += r.n_corpus_segments;
    cor.duration_ms += r.corpus_duration_ms;
  }
  return aggregate_stats(reports, src, cor);
}

std::vector<YieldReport> TableFixture::reports() const {
  std::vector<YieldReport> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(compute_yield(row.title, row.source, row.corpus));
  return out;
}

TableFixture parse_table_fixture(std::string_view csv) {
  TableFixture fx;
  bool header_seen = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < csv.size()) {
    std::size_t nl = csv.find('\n', pos);
    if (nl == std::string_view::npos) nl = csv.size();
    const std::string_view line = trim(csv.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const std::string where = "line " + std::to_string(line_no);
    const auto f = split_csv(line, where);
    if (f.size() != kFixtureColumns) {
      throw SchemaError(where, "expected " + std::to_string(kFixtureColumns) + " columns, got " + std::to_string(f.size()));
    }
    if (!header_seen) {
      if (f[0] != "title" || f[4] != "src_segments") throw SchemaError(where, "missing header row");
      header_seen = true;
      continue;
    }
    TableRow row;
    row.title = f[0];
    row.gender = f[1];
    row.year = f[2];
    row.location = f[3];
    row.source = {parse_int(f[4], where), parse_clock(f[5], where)};
    row.corpus = {parse_int(f[6], where), parse_clock(f[7], where)};
    row.printed_yield_pct = parse_pct(f[8], where);
    if (row.title == "Total") {
      fx.printed_total = std::move(row);
    } else {
      fx.rows.push_back(std::move(row));
    }
  }
  if (!header_seen) throw SchemaError("line 1", "empty fixture");
  return fx;
}

TableFixture load_table_fixture(const std::filesystem::path& path) { return parse_table_fixture(read_file(path)); }

std::string format_duration(double ms) {
  const auto total = static_cast<std::int64_t>(std::floor(ms / 1000.0 + 0.5));
  const std::int64_t h = total / 3600;
  const std::int64_t m = total / 60 % 60;
  const std::int64_t s = total % 60;
  char buf[32];
  if (h > 0) {
    std::snprintf(buf, sizeof buf, "%lld:%02lld:%02lld", static_cast<long long>(h), static_cast<long long>(m),
                  static_cast<long long>(s));
  } else {
    std::snprintf(buf, sizeof buf, "%lld:%02lld", static_cast<long long>(m), static_cast<long long>(s));
  }
  return buf;
}

std::string format_count(std::int64_t n) {
  std::string digits = std::to_string(n < 0 ? -n : n);
  std::string out;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i > 0 && (digits.size() - i) % 3 == 0) out.push_back(',');
    out.push_back(digits[i]);
  }
  return n < 0 ? "-" + out : out;
}

std::string format_pct(double pct) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", pct);
  return buf;
}

std::string format_yield_table(const std::vector<YieldReport>& reports, const YieldSummary& summary) {
  auto join = [](std::initializer_list<std::string> cols) {
    std::string line;
    for (const auto& c : cols) {
      if (!line.empty()) line += "  ";
      line += c;
    }
    return line + "\n";
  };
  char avg_segments[32];
  char avg_corpus_segments[32];
  std::snprintf(avg_segments, sizeof avg_segments, "%.1f", summary.avg_source_segments);
  std::snprintf(avg_corpus_segments, sizeof avg_corpus_segments, "%.1f", summary.avg_corpus_segments);

  std::string out = join({"source", "segments", "duration", "corpus_segments", "corpus_duration", "yield"});
  for (const auto& r : reports) {
    out += join({r.source_id, format_count(r.n_source_segments), format_duration(static_cast<double>(r.source_duration_ms)),
                 format_count(r.n_corpus_segments), format_duration(static_cast<double>(r.corpus_duration_ms)),
                 format_pct(r.yield_duration_pct)});
  }
  const YieldReport& t = summary.total;
  out += join({"Total", format_count(t.n_source_segments), format_duration(static_cast<double>(t.source_duration_ms)),
               format_count(t.n_corpus_segments), format_duration(static_cast<double>(t.corpus_duration_ms)),
               format_pct(t.yield_duration_pct)});
  out += join({"Average", avg_segments, format_duration(summary.avg_source_duration_ms), avg_corpus_segments,
               format_duration(summary.avg_corpus_duration_ms), format_pct(t.yield_duration_pct)});
  out += "count yield " + format_pct(t.yield_count_pct) + ", duration yield " + format_pct(t.yield_duration_pct) + "\n";
  return out;
}

std::string save_yield_reports(const std::vector<YieldReport>& reports) {
  nlohmann::ordered_json doc;
  doc["version"] = 1;
  doc["sources"] = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    nlohmann::ordered_json j;
    j["source_id"] = r.source_id;
    j["n_source_segments"] = r.n_source_segments;
    j["source_duration_ms"] = r.source_duration_ms;
    j["n_corpus_segments"] = r.n_corpus_segments;
    j["corpus_duration_ms"] = r.corpus_duration_ms;
    j["yield_duration_pct"] = r.yield_duration_pct;
    j["yield_count_pct"] = r.yield_count_pct;
    doc["sources"].push_back(std::move(j));
  }
  return doc.dump(2) + "\n";
}

std::vector<YieldReport> load_yield_reports(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("", e.what());
  }
  if (!doc.is_object() || !doc.contains("sources") || !doc["sources"].is_array()) {
    throw SchemaError("/sources", "expected an array of yield reports");
  }
  std::vector<YieldReport> out;
  for (std::size_t i = 0; i < doc["sources"].size(); ++i) {
    const auto& j = doc["sources"][i];
    try {
      // recompute rather than trust stored percentages
      out.push_back(compute_yield(j.at("source_id").get<std::string>(),
                                  {j.at("n_source_segments").get<std::int64_t>(), j.at("source_duration_ms").get<std::int64_t>()},
                                  {j.at("n_corpus_segments").get<std::int64_t>(), j.at("corpus_duration_ms").get<std::int64_t>()}));
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError("/sources/" + std::to_string(i), e.what());
    }
  }
  return out;
}

}  // namespace forge
