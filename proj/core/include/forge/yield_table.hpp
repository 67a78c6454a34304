#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace forge {

struct SourceStats {
  std::int64_t segments = 0;
  std::int64_t duration_ms = 0;
};

// Per-source survival of segments through validation. Percentages are kept
// unrounded; rounding happens only when formatting.
struct YieldReport {
  std::string source_id;
  std::int64_t n_source_segments = 0;
  std::int64_t source_duration_ms = 0;
  std::int64_t n_corpus_segments = 0;
  std::int64_t corpus_duration_ms = 0;
  double yield_duration_pct = 0.0;
  double yield_count_pct = 0.0;

  friend bool operator==(const YieldReport&, const YieldReport&) = default;
};

// Throws ZeroSourceDuration, std::invalid_argument for negative inputs or a
// corpus larger than its source.
YieldReport compute_yield(std::string source_id, SourceStats source, SourceStats corpus);

struct YieldSummary {
  std::size_t count = 0;
  YieldReport total;  // sums, with yields recomputed from them
  double avg_source_segments = 0.0;
  double avg_source_duration_ms = 0.0;
  double avg_corpus_segments = 0.0;
  double avg_corpus_duration_ms = 0.0;
};

// Totals are sums, averages are totals / count. Throws EmptyInput.
YieldSummary aggregate_stats(const std::vector<YieldReport>& reports);
// Same, but with totals supplied by the caller (e.g. a published Total row).
YieldSummary aggregate_stats(const std::vector<YieldReport>& reports, SourceStats source_total,
                             SourceStats corpus_total);

// One row of the published per-talk table.
struct TableRow {
  std::string title;
  std::string gender;
  std::string year;
  std::string location;
  SourceStats source;
  SourceStats corpus;
  std::optional<double> printed_yield_pct;
};

// The 41-talk summary table shipped as CSV. A row titled "Total" is the
// published summary line and is kept apart from the talks.
struct TableFixture {
  std::vector<TableRow> rows;
  std::optional<TableRow> printed_total;

  std::vector<YieldReport> reports() const;
};

// Columns: title,gender,year,location,src_segments,src_duration,
// corpus_segments,corpus_duration,yield_pct. Lines starting with '#' are
// comments. Durations are M:SS or H:MM:SS. Throws SchemaError ("line N").
TableFixture parse_table_fixture(std::string_view csv);
TableFixture load_table_fixture(const std::filesystem::path& path);

// "M:SS" below one hour, "H:MM:SS" above; rounds to the nearest second.
std::string format_duration(double ms);
// 11704 -> "11,704"
std::string format_count(std::int64_t n);
// 26.41 -> "26.4%"
std::string format_pct(double pct);

// Per-source rows, then Total and Average rows; columns separated by two
// spaces.
std::string format_yield_table(const std::vector<YieldReport>& reports, const YieldSummary& summary);

std::string save_yield_reports(const std::vector<YieldReport>& reports);
// Throws SchemaError.
std::vector<YieldReport> load_yield_reports(std::string_view json);

}  // namespace forge
