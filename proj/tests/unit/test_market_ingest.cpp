#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "hydroprice/errors.hpp"
#include "hydroprice/ingest.hpp"

using namespace hydroprice;

namespace {

Timestamp at(int y, unsigned mo, unsigned d, unsigned h, unsigned mi = 0) {
  return Timestamp::from_civil(y, mo, d, h, mi);
}

std::vector<GenerationReading> constant_hour(Timestamp hour, Source s, double mw, int interval) {
  std::vector<GenerationReading> out;
  for (int m = 0; m < 60; m += interval) out.push_back({hour.plus_minutes(m), s, mw, interval});
  return out;
}

}  // namespace

TEST_CASE("compute_mec examples") {
  CHECK(compute_mec(50.0, 3.0, 2.0) == 45.0);
  CHECK(compute_mec(30.0, 0.0, 0.0) == 30.0);
  CHECK(compute_mec(20.0, 5.0, -1.0) == 16.0);
}

TEST_CASE("compute_mec rejects non-finite input with the row index") {
  try {
    compute_mec(NAN, 1.0, 1.0, 17);
    FAIL("expected MalformedRecordError");
  } catch (const MalformedRecordError& e) {
    CHECK(e.row() == 17);
  }
  CHECK_THROWS_AS(compute_mec(1.0, INFINITY, 1.0), MalformedRecordError);
}

TEST_CASE("aggregate_generation examples") {
  const auto h = at(2015, 3, 2, 10);
  SUBCASE("four 15-minute readings of 100 MW") {
    auto e = aggregate_generation(constant_hour(h, Source::wind, 100.0, 15));
    REQUIRE(e.size() == 1);
    CHECK(e[0].mwh == doctest::Approx(100.0).epsilon(1e-15));
    CHECK_FALSE(e[0].partial);
  }
  SUBCASE("twelve 5-minute readings of 60 MW") {
    auto e = aggregate_generation(constant_hour(h, Source::hydro, 60.0, 5));
    REQUIRE(e.size() == 1);
    CHECK(e[0].mwh == doctest::Approx(60.0).epsilon(1e-15));
  }
  SUBCASE("100 MW for 30 minutes then 200 MW for 30 minutes") {
    std::vector<GenerationReading> r;
    for (int m = 0; m < 30; m += 15) r.push_back({h.plus_minutes(m), Source::solar, 100.0, 15});
    for (int m = 30; m < 60; m += 15) r.push_back({h.plus_minutes(m), Source::solar, 200.0, 15});
    // Hand-summed power x duration.
    double oracle = 0.0;
    for (const auto& x : r) oracle += x.power_mw * x.interval_minutes / 60.0;
    auto e = aggregate_generation(r);
    REQUIRE(e.size() == 1);
    CHECK(e[0].mwh == doctest::Approx(oracle).epsilon(1e-15));
    CHECK(oracle == 150.0);
  }
}

TEST_CASE("aggregation matches a hand-summed oracle on random readings") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> mw(0.0, 500.0);
  const int intervals[] = {5, 10, 15, 60};
  std::vector<GenerationReading> readings;
  std::map<std::pair<int, std::int64_t>, double> oracle;
  for (auto src : kAllSources) {
    const int interval = intervals[static_cast<std::size_t>(src)];
    for (int hour = 0; hour < 48; ++hour) {
      const auto h = at(2016, 6, 1, 0).plus_minutes(hour * 60);
      for (int m = 0; m < 60; m += interval) {
        const double p = mw(rng);
        readings.push_back({h.plus_minutes(m), src, p, interval});
        oracle[{static_cast<int>(src), h.minutes()}] += p * interval / 60.0;
      }
    }
  }
  std::shuffle(readings.begin(), readings.end(), rng);
  const auto e = aggregate_generation(readings);
  REQUIRE(e.size() == oracle.size());
  for (const auto& x : e) {
    const double want = oracle.at({static_cast<int>(x.source), x.hour.minutes()});
    CHECK(x.mwh == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("splitting a reading leaves hourly energy unchanged") {
  const auto h = at(2015, 9, 9, 4);
  std::vector<GenerationReading> whole = {{h, Source::hydro, 123.456, 60}};
  std::vector<GenerationReading> split;
  for (int m = 0; m < 60; m += 15) split.push_back({h.plus_minutes(m), Source::hydro, 123.456, 15});
  const double a = aggregate_generation(whole)[0].mwh;
  const double b = aggregate_generation(split)[0].mwh;
  CHECK(std::abs(a - b) <= 1e-12 * std::abs(a));
}

TEST_CASE("partial hours are scaled and flagged") {
  const auto h = at(2015, 1, 5, 8);
  std::vector<GenerationReading> r = {{h, Source::wind, 80.0, 15}, {h.plus_minutes(15), Source::wind, 120.0, 15}};
  IngestReport report;
  const auto e = aggregate_generation(r, &report);
  REQUIRE(e.size() == 1);
  CHECK(e[0].partial);
  CHECK(e[0].covered_minutes == 30.0);
  CHECK(e[0].mwh == doctest::Approx((80.0 * 0.25 + 120.0 * 0.25) * 2.0));
  CHECK(report.flagged_count("partial_coverage_source_hours") == 1);
}

TEST_CASE("readings straddling an hour are split between hours") {
  const auto h = at(2015, 1, 5, 8, 30);
  std::vector<GenerationReading> r = {{h, Source::other, 600.0, 60}};
  const auto e = aggregate_generation(r);
  REQUIRE(e.size() == 2);
  CHECK(e[0].hour.to_string() == "2015-01-05T08:00");
  CHECK(e[0].covered_minutes == 30.0);
  CHECK(e[1].covered_minutes == 30.0);
}

TEST_CASE("overlapping readings within a source are an integrity error") {
  const auto h = at(2015, 4, 1, 12);
  std::vector<GenerationReading> r = {{h, Source::hydro, 10.0, 15}, {h.plus_minutes(10), Source::hydro, 10.0, 15}};
  CHECK_THROWS_AS(aggregate_generation(r), DataIntegrityError);
  // Same times on different sources are fine.
  std::vector<GenerationReading> ok = {{h, Source::hydro, 10.0, 15}, {h, Source::wind, 10.0, 15}};
  CHECK_NOTHROW(aggregate_generation(ok));
}

TEST_CASE("invalid readings are malformed") {
  const auto h = at(2015, 4, 1, 12);
  std::vector<GenerationReading> neg = {{h, Source::hydro, -1.0, 15}};
  CHECK_THROWS_AS(aggregate_generation(neg), MalformedRecordError);
  std::vector<GenerationReading> bad_interval = {{h, Source::hydro, 1.0, 7}};
  CHECK_THROWS_AS(aggregate_generation(bad_interval), MalformedRecordError);
}

TEST_CASE("fall-back hour keeps the first occurrence") {
  const auto h = at(2015, 11, 1, 1);
  auto first = constant_hour(h, Source::hydro, 100.0, 15);
  auto second = constant_hour(h, Source::hydro, 300.0, 15);
  std::vector<GenerationReading> r = first;
  r.insert(r.end(), second.begin(), second.end());
  IngestReport report;
  const auto e = aggregate_generation(r, &report);
  REQUIRE(e.size() == 1);
  CHECK(e[0].mwh == doctest::Approx(100.0));
  CHECK(report.dropped_count("generation_dst_duplicate") == 4);

  std::vector<PriceRow> prices = {{h, 40.0, 1.0, 1.0}, {h, 99.0, 1.0, 1.0}};
  const auto rec = join_hourly(prices, e, &report);
  REQUIRE(rec.size() == 1);
  CHECK(rec[0].mec == 38.0);
  CHECK(report.dropped_count("price_dst_duplicate") == 1);

  // Outside the fall-back hour a repeat is an error.
  std::vector<PriceRow> dup = {{at(2015, 11, 1, 2), 1, 0, 0}, {at(2015, 11, 1, 2), 1, 0, 0}};
  CHECK_THROWS_AS(join_hourly(dup, e), DataIntegrityError);
}

TEST_CASE("join_hourly examples") {
  std::vector<PriceRow> prices;
  for (unsigned h = 0; h < 3; ++h) prices.push_back({at(2015, 2, 2, h), 50.0 + h, 1.0, 0.5});
  std::vector<GenerationReading> readings;
  for (unsigned h = 1; h < 3; ++h)
    for (auto s : kAllSources) {
      auto r = constant_hour(at(2015, 2, 2, h), s, 10.0 * (1 + static_cast<int>(s)), 15);
      readings.insert(readings.end(), r.begin(), r.end());
    }
  const auto gen = aggregate_generation(readings);

  SUBCASE("3 price hours against 2 generation hours") {
    IngestReport report;
    const auto rec = join_hourly(prices, gen, &report);
    REQUIRE(rec.size() == 2);
    CHECK(report.dropped_count("price_hour_without_generation") == 1);
    CHECK(rec[0].timestamp < rec[1].timestamp);
    for (const auto& r : rec) {
      double sum = 0.0;
      for (double v : r.gen_by_source) sum += v;
      CHECK(std::abs(r.total_gen - sum) <= 1e-9 * sum);
      CHECK(r.total_gen > 0.0);
    }
  }
  SUBCASE("empty generation") {
    IngestReport report;
    const auto rec = join_hourly(prices, {}, &report);
    CHECK(rec.empty());
    CHECK(report.dropped_count("price_hour_without_generation") == 3);
  }
  SUBCASE("identical keys keep the count") {
    std::vector<PriceRow> two(prices.begin() + 1, prices.end());
    CHECK(join_hourly(two, gen).size() == 2);
  }
  SUBCASE("mec is reproduced bit-exactly") {
    const auto rec = join_hourly(prices, gen);
    CHECK(rec[0].mec == prices[1].lmp - prices[1].mcc - prices[1].mlc);
  }
  SUBCASE("output is sorted for shuffled input") {
    std::vector<PriceRow> rev(prices.rbegin(), prices.rend());
    const auto rec = join_hourly(rev, gen);
    REQUIRE(rec.size() == 2);
    CHECK(rec[0].timestamp < rec[1].timestamp);
  }
}

TEST_CASE("zero-generation hours are dropped") {
  const auto h = at(2015, 2, 2, 5);
  const auto gen = aggregate_generation(constant_hour(h, Source::hydro, 0.0, 15));
  std::vector<PriceRow> prices = {{h, 10.0, 0.0, 0.0}};
  IngestReport report;
  CHECK(join_hourly(prices, gen, &report).empty());
  CHECK(report.dropped_count("zero_total_generation") == 1);
  CHECK(report.flagged_count("hours_missing_a_source") == 1);
}

TEST_CASE("CSV and JSON-lines readers") {
  SUBCASE("prices CSV with a missing value") {
    std::istringstream in("timestamp,lmp,mcc,mlc\n2015-01-01T00:00,50,3,2\n2015-01-01T01:00,,1,1\n");
    IngestReport report;
    const auto rows = read_prices(in, false, report);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].lmp == 50.0);
    CHECK(report.dropped_count("price_missing_value") == 1);
    CHECK(report.price_rows_read == 2);
  }
  SUBCASE("wrong header") {
    std::istringstream in("time,lmp,mcc,mlc\n");
    IngestReport report;
    CHECK_THROWS_AS(read_prices(in, false, report), MalformedRecordError);
  }
  SUBCASE("bad number carries its line") {
    std::istringstream in("timestamp,lmp,mcc,mlc\n2015-01-01T00:00,50,x,2\n");
    IngestReport report;
    try {
      read_prices(in, false, report);
      FAIL("expected MalformedRecordError");
    } catch (const MalformedRecordError& e) {
      CHECK(e.row() == 2);
    }
  }
  SUBCASE("generation CSV") {
    std::istringstream in(
        "timestamp,source,power_mw,interval_min\n2015-01-01T00:00,Hydro,100,15\n"
        "2015-01-01T00:15,Natural Gas,900,5\n");
    IngestReport report;
    const auto rows = read_generation(in, false, report);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].source == Source::hydro);
    CHECK(rows[1].source == Source::other);
    CHECK(rows[1].interval_minutes == 5);
  }
  SUBCASE("JSON lines") {
    std::istringstream p(R"({"timestamp":"2015-01-01T00:00","lmp":50,"mcc":3,"mlc":2}
{"timestamp":"2015-01-01T01:00","lmp":null,"mcc":3,"mlc":2}
)");
    IngestReport report;
    const auto rows = read_prices(p, true, report);
    REQUIRE(rows.size() == 1);
    CHECK(compute_mec(rows[0].lmp, rows[0].mcc, rows[0].mlc) == 45.0);
    CHECK(report.dropped_count("price_missing_value") == 1);

    std::istringstream g(R"({"timestamp":"2015-01-01T00:00","source":"wind","power_mw":12.5,"interval_min":15})");
    const auto gen = read_generation(g, true, report);
    REQUIRE(gen.size() == 1);
    CHECK(gen[0].source == Source::wind);
    CHECK(gen[0].power_mw == 12.5);
  }
}

TEST_CASE("CSV writers round-trip through the readers") {
  std::vector<PriceRow> prices = {{at(2015, 5, 5, 5), 31.25, -0.5, 0.125}};
  std::vector<GenerationReading> gen = {{at(2015, 5, 5, 5), Source::solar, 3.5, 15}};
  std::stringstream ps, gs;
  write_prices_csv(ps, prices);
  write_generation_csv(gs, gen);
  IngestReport report;
  const auto p2 = read_prices(ps, false, report);
  const auto g2 = read_generation(gs, false, report);
  REQUIRE(p2.size() == 1);
  REQUIRE(g2.size() == 1);
  CHECK(p2[0].lmp == prices[0].lmp);
  CHECK(p2[0].mlc == prices[0].mlc);
  CHECK(g2[0].source == Source::solar);
  CHECK(g2[0].interval_minutes == 15);
}

TEST_CASE("ingest_files reports a missing file by path") {
  try {
    ingest_files("/nonexistent/prices.csv", "/nonexistent/gen.csv");
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("/nonexistent/prices.csv") != std::string::npos);
  }
}
