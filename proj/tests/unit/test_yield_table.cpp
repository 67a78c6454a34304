#include <cmath>
#include <sstream>

#include "doctest.h"

#include "forge/error.hpp"
#include "forge/yield_table.hpp"
#include "test_support.hpp"

using namespace forge;

namespace {

// Independent reading of "M:SS" / "H:MM:SS" for cross-checking the parser.
long long clock_seconds(const std::string& s) {
  long long total = 0;
  std::stringstream in(s);
  std::string part;
  while (std::getline(in, part, ':')) total = total * 60 + std::stoll(part);
  return total;
}

struct RawRow {
  std::string title;
  long long src_segments = 0, src_seconds = 0, cor_segments = 0, cor_seconds = 0;
};

// Naive comma split; the shipped fixture never quotes commas inside a field
// except in titles, which this reader skips by counting from the right.
std::vector<RawRow> raw_rows(const std::string& csv) {
  std::vector<RawRow> rows;
  std::stringstream in(csv);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<std::string> f;
    std::size_t end = line.size();
    for (int k = 0; k < 8; ++k) {
      const std::size_t comma = line.rfind(',', end - 1);
      f.insert(f.begin(), line.substr(comma + 1, end - comma - 1));
      end = comma;
    }
    RawRow r;
    r.title = line.substr(0, end);
    r.src_segments = std::stoll(f[3]);
    r.src_seconds = clock_seconds(f[4]);
    r.cor_segments = std::stoll(f[5]);
    r.cor_seconds = clock_seconds(f[6]);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace

TEST_CASE("published table fixture") {
  const auto path = test::fixture_dir() / "tedxkr_table1.csv";
  const TableFixture fx = load_table_fixture(path);
  const auto raw = raw_rows(test::read_text(path));
  REQUIRE(raw.size() == 42);
  REQUIRE(raw.back().title == "Total");
  REQUIRE(fx.rows.size() == 41);
  REQUIRE(fx.printed_total.has_value());

  SUBCASE("parser agrees with an independent reader") {
    for (std::size_t i = 0; i < fx.rows.size(); ++i) {
      CAPTURE(i);
      CHECK(fx.rows[i].source.segments == raw[i].src_segments);
      CHECK(fx.rows[i].source.duration_ms == raw[i].src_seconds * 1000);
      CHECK(fx.rows[i].corpus.segments == raw[i].cor_segments);
      CHECK(fx.rows[i].corpus.duration_ms == raw[i].cor_seconds * 1000);
    }
  }

  SUBCASE("row sums against the printed Total") {
    long long seg = 0, sec = 0, cseg = 0, csec = 0;
    for (std::size_t i = 0; i + 1 < raw.size(); ++i) {
      seg += raw[i].src_segments;
      sec += raw[i].src_seconds;
      cseg += raw[i].cor_segments;
      csec += raw[i].cor_seconds;
    }
    // The segment column sums exactly; the printed duration totals differ from
    // the row sums by a couple of seconds of rounding.
    CHECK(seg == 11704);
    CHECK(seg == fx.printed_total->source.segments);
    CHECK(cseg == fx.printed_total->corpus.segments);
    CHECK(std::llabs(sec - clock_seconds("11:56:11")) <= 5);
    CHECK(std::llabs(csec - clock_seconds("2:48:10")) <= 5);
  }

  SUBCASE("summary from the printed Total row") {
    const YieldSummary s = aggregate_stats(fx.reports(), fx.printed_total->source, fx.printed_total->corpus);
    CHECK(s.count == 41);
    CHECK(s.total.n_source_segments == 11704);
    CHECK(format_duration(static_cast<double>(s.total.source_duration_ms)) == "11:56:11");
    CHECK(s.total.n_corpus_segments == 3091);
    CHECK(format_duration(static_cast<double>(s.total.corpus_duration_ms)) == "2:48:10");
    CHECK(s.total.yield_count_pct == doctest::Approx(100.0 * 3091 / 11704));
    CHECK(std::abs(s.total.yield_count_pct - 26.4) <= 0.1);
    CHECK(std::abs(s.total.yield_duration_pct - 23.6) <= 0.5);
    CHECK(s.avg_source_segments == doctest::Approx(11704.0 / 41));
    CHECK(std::abs(s.avg_source_segments - 285.5) < 0.05);
    CHECK(std::abs(s.avg_source_duration_ms / 1000.0 - clock_seconds("17:28")) <= 1.0);
    CHECK(std::abs(s.avg_corpus_segments - 75.4) < 0.05);
    CHECK(std::abs(s.avg_corpus_duration_ms / 1000.0 - clock_seconds("4:06")) <= 1.0);
  }

  SUBCASE("per-row yields match the printed column within a point") {
    const auto reports = fx.reports();
    for (std::size_t i = 0; i < reports.size(); ++i) {
      CAPTURE(fx.rows[i].title);
      REQUIRE(fx.rows[i].printed_yield_pct.has_value());
      CHECK(std::abs(reports[i].yield_duration_pct - *fx.rows[i].printed_yield_pct) <= 1.0);
    }
    CHECK(reports[0].source_id == "Appropriate technology");
    CHECK(reports[0].yield_duration_pct == doctest::Approx(100.0 * 358 / 625));
  }
}

TEST_CASE("compute_yield") {
  const YieldReport r = compute_yield("s", {10, 10000}, {4, 2500});
  CHECK(r.yield_count_pct == doctest::Approx(40.0));
  CHECK(r.yield_duration_pct == doctest::Approx(25.0));
  CHECK(compute_yield("z", {0, 1000}, {0, 0}).yield_count_pct == 0.0);
  CHECK_THROWS_AS(compute_yield("z", {5, 0}, {0, 0}), ZeroSourceDuration);
  CHECK_THROWS_AS(compute_yield("n", {-1, 1000}, {0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(compute_yield("big", {1, 1000}, {2, 500}), std::invalid_argument);
  CHECK_THROWS_AS(compute_yield("big", {1, 1000}, {1, 1001}), std::invalid_argument);
}

TEST_CASE("aggregate_stats") {
  CHECK_THROWS_AS(aggregate_stats({}), EmptyInput);
  SUBCASE("a single source aggregates to itself") {
    const YieldReport r = compute_yield("only", {7, 9000}, {3, 4000});
    const YieldSummary s = aggregate_stats({r});
    CHECK(s.total.n_source_segments == 7);
    CHECK(s.total.yield_duration_pct == r.yield_duration_pct);
    CHECK(s.avg_source_duration_ms == 9000.0);
  }
  SUBCASE("totals are sums and yields come from totals") {
    const YieldSummary s =
        aggregate_stats({compute_yield("a", {10, 1000}, {10, 1000}), compute_yield("b", {30, 3000}, {0, 0})});
    CHECK(s.total.n_source_segments == 40);
    CHECK(s.total.yield_duration_pct == doctest::Approx(25.0));  // not the 50% mean of row yields
    CHECK(s.avg_source_segments == 20.0);
  }
}

TEST_CASE("formatting") {
  CHECK(format_duration(0) == "0:00");
  CHECK(format_duration(625000) == "10:25");
  CHECK(format_duration(59499) == "0:59");
  CHECK(format_duration(59500) == "1:00");
  CHECK(format_duration(42971000) == "11:56:11");
  CHECK(format_count(0) == "0");
  CHECK(format_count(999) == "999");
  CHECK(format_count(11704) == "11,704");
  CHECK(format_count(1234567) == "1,234,567");
  CHECK(format_pct(26.41) == "26.4%");
  CHECK(format_pct(23.48) == "23.5%");

  const auto reports = std::vector{compute_yield("t1", {4, 4000}, {2, 1000})};
  const std::string table = format_yield_table(reports, aggregate_stats(reports));
  CHECK(table.find("t1  4  0:04  2  0:01  25.0%\n") != std::string::npos);
  CHECK(table.find("Total  4  0:04  2  0:01  25.0%\n") != std::string::npos);
  CHECK(table.find("Average  4.0  0:04  2.0  0:01  25.0%\n") != std::string::npos);
}

TEST_CASE("yield report JSON round trip") {
  const std::vector<YieldReport> reports{compute_yield("a", {3, 3000}, {1, 900}),
                                         compute_yield("b", {5, 7000}, {5, 7000})};
  CHECK(load_yield_reports(save_yield_reports(reports)) == reports);
  CHECK(load_yield_reports(save_yield_reports({})).empty());
  CHECK_THROWS_AS(load_yield_reports("{"), SchemaError);
  CHECK_THROWS_AS(load_yield_reports(R"({"reports": 3})"), SchemaError);
}

TEST_CASE("fixture parse errors carry the line") {
  const std::string header = "title,gender,year,location,src_segments,src_duration,corpus_segments,corpus_duration,yield_pct\n";
  try {
    parse_table_fixture(header + "x,M,2010,Seoul,ten,1:00,1,0:30,\n");
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(e.location() == "line 2");
  }
  CHECK_THROWS_AS(parse_table_fixture(header + "x,M,2010,Seoul,1,1:75,1,0:30,\n"), SchemaError);
  CHECK_THROWS_AS(parse_table_fixture(header + "x,M,2010\n"), SchemaError);
  CHECK_THROWS_AS(parse_table_fixture("# only a comment\n"), SchemaError);
  const TableFixture q = parse_table_fixture(header + "\"Hello, world\",F,2011,Busan,\"1,200\",20:00,600,10:00,50%\n");
  REQUIRE(q.rows.size() == 1);
  CHECK(q.rows[0].title == "Hello, world");
  CHECK(q.rows[0].source.segments == 1200);
}
