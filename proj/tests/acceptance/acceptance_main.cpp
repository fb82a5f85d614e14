// Acceptance runner. Each criterion prints one line:
//   PASS <name>: <detail>   |   FAIL <name>: <detail>   |   SKIP <name>: <detail>
// Exit status is 1 if anything failed, 77 if everything selected was skipped,
// 0 otherwise.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hydroprice/calendar_detrend.hpp"
#include "hydroprice/format.hpp"
#include "hydroprice/least_squares.hpp"
#include "hydroprice/quantile.hpp"
#include "hydroprice/report.hpp"
#include "hydroprice/series_metrics.hpp"
#include "hydroprice/study.hpp"
#include "hydroprice/synthetic.hpp"
#include "oracles.hpp"

using namespace hydroprice;
namespace fs = std::filesystem;

namespace {

enum class Status { pass, fail, skip };

struct Outcome {
  Status status;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string num(double v, int digits = 3) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

Outcome verdict(bool ok, std::string detail) { return {ok ? Status::pass : Status::fail, std::move(detail)}; }

const std::vector<Regressor> kJoint = {Regressor::hydro, Regressor::wind, Regressor::solar};

std::vector<HourlyRecord> fixture_records(const SyntheticData& data) {
  const auto hourly = aggregate_generation(data.generation);
  return join_hourly(data.prices, hourly);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------

Outcome ols_oracle() {
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<std::size_t> pick_p(1, 6);
  double worst_coef = 0, worst_se = 0, worst_p = 0, engine_seconds = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t p = pick_p(rng);
    std::uniform_int_distribution<std::size_t> pick_n(p + 3, 200);
    const auto in = oracle::random_instance(rng, pick_n(rng), p);
    const Stopwatch sw;
    const auto f = fit_ols(in.x, in.y);
    engine_seconds += sw.seconds();
    const auto want = oracle::ols_normal_equations(in.x, in.y);
    for (std::size_t j = 0; j < p; ++j) {
      const auto k = static_cast<Eigen::Index>(j);
      worst_coef = std::max(worst_coef, std::abs(f.coefficients(k) - want.coefficients[j]) /
                                            std::max(1.0, std::abs(want.coefficients[j])));
      worst_se = std::max(worst_se, std::abs(f.std_errors(k) - want.std_errors[j]) / std::max(1.0, want.std_errors[j]));
      worst_p = std::max(worst_p, std::abs(f.p_values(k) - want.p_values[j]));
    }
  }
  const bool ok = worst_coef <= 1e-8 && worst_se <= 1e-8 && worst_p <= 1e-9 && engine_seconds < 5.0;
  return verdict(ok, "100 instances, max coef err " + num(worst_coef) + ", max SE err " + num(worst_se) +
                         ", max p err " + num(worst_p) + ", engine time " + num(engine_seconds) + " s");
}

Outcome qr_oracle() {
  std::mt19937_64 rng(20240602);
  std::uniform_int_distribution<std::size_t> pick_p(1, 3);
  double worst = 0, engine_seconds = 0;
  const Stopwatch total;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t p = pick_p(rng);
    std::uniform_int_distribution<std::size_t> pick_n(p + 2, 30);
    const auto in = oracle::random_instance(rng, pick_n(rng), p);
    for (double tau : {0.25, 0.5, 0.9}) {
      const Stopwatch sw;
      const auto f = fit_quantile(in.x, in.y, tau);
      engine_seconds += sw.seconds();
      const double best = oracle::qr_basic_solution_minimum(in.x, in.y, tau);
      worst = std::max(worst, std::abs(f.objective - best) / std::max(1.0, best));
    }
  }
  const double elapsed = total.seconds();
  return verdict(worst <= 1e-6 && elapsed < 30.0,
                 "50 instances x 3 quantiles, max relative objective gap " + num(worst) + ", total " +
                     num(elapsed) + " s (engine " + num(engine_seconds) + " s)");
}

Outcome qr_subgradient() {
  const auto data = synthetic_fixture(5, 8760);
  StudyConfig cfg;
  cfg.bootstrap_replicates = 100;
  cfg.seed = 5;
  const auto bundle = run_study(cfg, data.prices, data.generation);
  std::size_t checked = 0, violations = 0;
  double worst = -INFINITY;
  for (const auto& f : bundle.quantile_fits) {
    if (!f.ok()) {
      ++violations;
      continue;
    }
    const auto [x, y] = design_for(bundle.frame, f.task.spec);
    Eigen::VectorXd b(static_cast<Eigen::Index>(f.result->estimates.size()));
    for (Eigen::Index k = 0; k < b.size(); ++k) b(k) = f.result->estimates[static_cast<std::size_t>(k)];
    const auto check = check_subgradient(x, y, *f.task.tau, b);
    worst = std::max(worst, check.max_excess);
    if (check.max_excess > 0.0) ++violations;
    ++checked;
  }
  return verdict(violations == 0 && checked == 32,
                 num(checked) + " grid fits checked, " + num(violations) + " violations, largest excess over bound " +
                     num(worst));
}

Outcome ewmsd_equivalence() {
  std::mt19937_64 rng(20240604);
  std::normal_distribution<double> z(45.0, 20.0);
  std::vector<double> x(10000);
  for (double& v : x) v = z(rng);

  double worst_direct = 0;
  for (double span : {24.0, 168.0}) {
    const auto got = ewmsd(x, span);
    const auto want = oracle::ewmsd_direct(x, span);
    for (std::size_t i = 0; i < x.size(); ++i) worst_direct = std::max(worst_direct, std::abs(got[i] - want[i]));
  }

  // Shifts that keep every value exactly representable give bit-identical
  // output; arbitrary shifts are held to rounding level.
  std::uniform_int_distribution<int> k(-1000, 1000);
  std::vector<double> ints(10000), shifted(10000);
  for (std::size_t i = 0; i < ints.size(); ++i) {
    ints[i] = k(rng);
    shifted[i] = ints[i] + 4096.0;
  }
  const bool exact_shift = ewmsd(ints, 24) == ewmsd(shifted, 24);

  const auto base = ewmsd(x, 24);
  std::vector<double> moved(x);
  for (double& v : moved) v += 123.456;
  const auto after = ewmsd(moved, 24);
  double worst_shift = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    worst_shift = std::max(worst_shift, std::abs(after[i] - base[i]) / std::max(1.0, base[i]));

  double worst_scale = 0;
  for (double c : {-3.0, 0.01, 250.0}) {
    std::vector<double> scaled(x);
    for (double& v : scaled) v *= c;
    const auto s = ewmsd(scaled, 24);
    for (std::size_t i = 1; i < x.size(); ++i)
      worst_scale = std::max(worst_scale, std::abs(s[i] - std::abs(c) * base[i]) / (std::abs(c) * base[i]));
  }

  const bool ok = worst_direct <= 1e-10 && exact_shift && worst_shift <= 1e-10 && worst_scale <= 1e-12;
  return verdict(ok, "n = 10000, max |stream - direct| " + num(worst_direct) + ", representable shift exact: " +
                         (exact_shift ? "yes" : "no") + ", arbitrary shift rel err " + num(worst_shift) +
                         ", scale rel err " + num(worst_scale));
}

Outcome detrend_orthogonality() {
  const auto data = synthetic_fixture(3, 8760);
  const auto records = fixture_records(data);
  const auto model = fit_detrend(records);
  std::vector<Timestamp> ts;
  std::vector<double> mec;
  for (const auto& r : records) {
    ts.push_back(r.timestamp);
    mec.push_back(r.mec);
  }
  const auto d = detrend(ts, mec, model);

  // The calendar design spans the (hour, season) cells and the weekend
  // indicator, so the residual averages to zero on each of those groups.
  std::map<std::pair<unsigned, int>, std::pair<long double, std::size_t>> cells;
  std::array<std::pair<long double, std::size_t>, 2> weekend{};
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto f = calendar_features(ts[i]);
    const long double dev = static_cast<long double>(d[i]) - model.grand_mean();
    auto& c = cells[{f.hour, static_cast<int>(f.season)}];
    c.first += dev;
    ++c.second;
    auto& w = weekend[f.weekend ? 1 : 0];
    w.first += dev;
    ++w.second;
  }
  double worst_mean = 0;
  for (const auto& [key, c] : cells) worst_mean = std::max(worst_mean, static_cast<double>(std::abs(c.first / c.second)));
  for (const auto& w : weekend) worst_mean = std::max(worst_mean, static_cast<double>(std::abs(w.first / w.second)));

  const auto again = detrend(ts, d, fit_detrend(ts, d));
  double worst_idem = 0;
  for (std::size_t i = 0; i < d.size(); ++i) worst_idem = std::max(worst_idem, std::abs(again[i] - d[i]));

  return verdict(cells.size() == 96 && worst_mean <= 1e-8 && worst_idem <= 1e-8,
                 num(cells.size()) + " hour-season cells + weekday/weekend groups, max |cell mean| " + num(worst_mean) +
                     ", max idempotence gap " + num(worst_idem));
}

Outcome coefficient_recovery() {
  const Stopwatch sw;
  int recovered = 0;
  StudyConfig cfg;
  cfg.quantiles = {};
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto data = synthetic_fixture(seed, 8760);
    const auto bundle = run_study(cfg, data.prices, data.generation);
    const auto* joint = bundle.find(Response::detrended_price, kJoint, std::nullopt);
    if (!joint) continue;
    const double truth[] = {data.truth.beta_hydro, data.truth.beta_wind, data.truth.beta_solar};
    bool all = true;
    for (std::size_t k = 0; k < 3; ++k)
      all = all && std::abs(joint->estimates[k + 1] - truth[k]) <= 3.0 * joint->std_errors[k + 1];
    if (all) ++recovered;
  }
  const double elapsed = sw.seconds();
  return verdict(recovered >= 95 && elapsed < 120.0,
                 num(recovered) + "/100 runs recover hydro, wind and solar within 3 SE, " + num(elapsed) + " s");
}

Outcome real_data_signs() {
  const char* path = std::getenv("HYDROPRICE_REAL_CONFIG");
  if (!path || !*path)
    return {Status::skip, "set HYDROPRICE_REAL_CONFIG to a study config over a 2014-2020 ISO-NE extract"};
  auto cfg = StudyConfig::load(path);
  if (std::find(cfg.quantiles.begin(), cfg.quantiles.end(), 0.9) == cfg.quantiles.end()) {
    cfg.quantiles.push_back(0.9);
    std::sort(cfg.quantiles.begin(), cfg.quantiles.end());
  }
  const auto bundle = run_study(cfg);
  const auto* joint = bundle.find(Response::detrended_price, kJoint, 0.9);
  if (!joint) return {Status::fail, "joint price fit at tau 0.9 failed"};
  const bool ok = joint->estimates[1] < 0 && joint->estimates[2] < 0 && joint->estimates[3] < 0;
  return verdict(ok, "tau 0.9 joint price coefficients hydro " + num(joint->estimates[1]) + ", wind " +
                         num(joint->estimates[2]) + ", solar " + num(joint->estimates[3]));
}

Outcome grid_determinism() {
  const auto root = fs::temp_directory_path() / "hydroprice_acceptance_grid";
  fs::remove_all(root);
  std::string detail;
  bool ok = true;

  // Cardinality and byte-identical bundles on a one-year fixture.
  {
    const auto data = synthetic_fixture(9, 8760);
    StudyConfig cfg;
    cfg.bootstrap_replicates = 200;
    cfg.seed = 9;
    std::array<std::string, 2> dumps;
    for (int run = 0; run < 2; ++run) {
      const auto out = root / ("run" + std::to_string(run));
      const auto bundle = run_study(cfg, data.prices, data.generation);
      ok = ok && bundle.mean_fits.size() == 8 && bundle.quantile_fits.size() == 32 && bundle.failure_count() == 0;
      write_bundle(bundle, out);
      for (const auto& e : fs::directory_iterator(out)) dumps[run] += e.path().filename().string() + "\n" + slurp(e.path());
    }
    const bool same = dumps[0] == dumps[1];
    ok = ok && same;
    detail += std::string("8 + 32 fits, repeat run byte-identical: ") + (same ? "yes" : "no");
  }

  // Full-size run: 61,368 hourly rows, B = 200.
  const auto data = synthetic_fixture(11, 61368);
  const auto records = fixture_records(data);
  const auto prepared = prepare_frame(records, kDefaultEwmsdSpan);
  ok = ok && prepared.frame.size() == 61368;
  {
    const auto [x, y] = design_for(prepared.frame, ModelSpec{Response::detrended_price, kJoint, true});
    const Stopwatch sw;
    fit_quantile(x, y, 0.9);
    const double single = sw.seconds();
    ok = ok && single < 5.0;
    detail += ", single fit on " + num(static_cast<double>(x.rows()), 6) + " x 4 in " + num(single) + " s";
  }
  StudyConfig cfg;
  cfg.bootstrap_replicates = 200;
  const Stopwatch sw;
  const auto bundle = run_study_records(cfg, records, IngestReport{});
  const double full = sw.seconds();
  ok = ok && bundle.fit_count() == 40 && bundle.failure_count() == 0 && full < 600.0;
  detail += ", full grid with B = 200 in " + num(full) + " s, " + num(bundle.failure_count()) + " failures";

  fs::remove_all(root);
  return verdict(ok, detail);
}

Outcome bootstrap_sanity() {
  // SE of the sample median for N(0, 1): 1 / (2 f(0) sqrt(n)).
  const double n = 500;
  const double asymptotic = 1.0 / (2.0 * (1.0 / std::sqrt(2.0 * M_PI)) * std::sqrt(n));
  const Eigen::MatrixXd x = Eigen::MatrixXd::Ones(500, 1);
  int within = 0;
  const Stopwatch sw;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    std::mt19937_64 rng(1000 + trial);
    std::normal_distribution<double> z(0.0, 1.0);
    Eigen::VectorXd y(500);
    for (Eigen::Index i = 0; i < 500; ++i) y(i) = z(rng);
    const auto b = bootstrap_se(x, y, 0.5, 1000, trial, nullptr, 0);
    if (std::abs(b.std_errors(0) / asymptotic - 1.0) <= 0.2) ++within;
  }
  return verdict(within >= 90, num(within) + "/100 trials within 20% of " + num(asymptotic, 4) + ", " +
                                   num(sw.seconds()) + " s");
}

const std::vector<std::pair<std::string, std::function<Outcome()>>>& criteria() {
  static const std::vector<std::pair<std::string, std::function<Outcome()>>> all = {
      {"ols_oracle", ols_oracle},
      {"qr_oracle", qr_oracle},
      {"qr_subgradient", qr_subgradient},
      {"ewmsd_equivalence", ewmsd_equivalence},
      {"detrend_orthogonality", detrend_orthogonality},
      {"coefficient_recovery", coefficient_recovery},
      {"real_data_signs", real_data_signs},
      {"grid_determinism", grid_determinism},
      {"bootstrap_sanity", bootstrap_sanity},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--only" && i + 1 < argc) {
      only.emplace_back(argv[++i]);
    } else if (arg == "--list") {
      for (const auto& [name, fn] : criteria()) std::cout << name << "\n";
      return 0;
    } else {
      std::cerr << "usage: acceptance [--list] [--only <criterion>]...\n";
      return 2;
    }
  }
  for (const auto& name : only) {
    const auto& all = criteria();
    if (std::none_of(all.begin(), all.end(), [&](const auto& c) { return c.first == name; })) {
      std::cerr << "unknown criterion: " << name << "\n";
      return 2;
    }
  }

  std::size_t ran = 0, failed = 0, skipped = 0;
  for (const auto& [name, fn] : criteria()) {
    if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
    ++ran;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {Status::fail, std::string("exception: ") + e.what()};
    }
    const char* tag = o.status == Status::pass ? "PASS" : o.status == Status::fail ? "FAIL" : "SKIP";
    if (o.status == Status::fail) ++failed;
    if (o.status == Status::skip) ++skipped;
    std::cout << tag << " " << name << ": " << o.detail << std::endl;
  }
  if (failed) return 1;
  if (ran > 0 && skipped == ran) return 77;
  return 0;
}
