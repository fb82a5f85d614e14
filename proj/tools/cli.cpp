#include "cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include "hydroprice/calendar_detrend.hpp"
#include "hydroprice/errors.hpp"
#include "hydroprice/ingest.hpp"
#include "hydroprice/report.hpp"
#include "hydroprice/series_metrics.hpp"
#include "hydroprice/study.hpp"
#include "hydroprice/synthetic.hpp"

namespace hydroprice {

namespace {

namespace fs = std::filesystem;

struct Args {
  std::string config;
  std::string prices;
  std::string generation;
  std::string out;
  std::string bundle;
  std::optional<std::uint64_t> seed;
  std::optional<double> span;
  std::optional<std::size_t> replicates;
  std::optional<unsigned> threads;
  std::vector<double> quantiles;
  std::size_t hours = 8760;
  std::optional<double> noise;
};

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory " + dir.string() + ": " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path.string());
  return f;
}

// Input pair from --config or from --prices/--generation.
std::pair<fs::path, fs::path> input_paths(const Args& a) {
  if (!a.config.empty()) {
    const auto cfg = StudyConfig::load(a.config);
    return {cfg.prices, cfg.generation};
  }
  if (a.prices.empty() || a.generation.empty())
    throw ParameterError("need --config or both --prices and --generation");
  return {a.prices, a.generation};
}

int run_ingest(const Args& a, std::ostream& out) {
  const auto [prices, gen] = input_paths(a);
  auto result = ingest_files(prices, gen);
  const fs::path dir = a.out;
  ensure_dir(dir);
  auto hourly = open_out(dir / "hourly.csv");
  write_hourly_csv(hourly, result.records);
  open_out(dir / "ingest_report.json") << result.report.to_json().dump(2) << '\n';
  out << "ingested " << result.records.size() << " hours into " << dir.string() << '\n';
  return 0;
}

int run_detrend(const Args& a, std::ostream& out) {
  const auto [prices, gen] = input_paths(a);
  double span = kDefaultEwmsdSpan;
  if (!a.config.empty()) span = StudyConfig::load(a.config).ewmsd_span;
  if (a.span) span = *a.span;
  auto result = ingest_files(prices, gen);
  const auto prepared = prepare_frame(std::move(result.records), span);
  const fs::path dir = a.out;
  ensure_dir(dir);
  open_out(dir / "detrend_model.json") << prepared.detrend.to_json().dump(2) << '\n';
  auto frame = open_out(dir / "study_frame.csv");
  write_study_frame_csv(frame, prepared.frame);
  open_out(dir / "ingest_report.json") << result.report.to_json().dump(2) << '\n';
  out << "detrended " << prepared.frame.size() << " hours into " << dir.string() << '\n';
  return 0;
}

int run_study_cmd(const Args& a, std::ostream& out, std::ostream& err) {
  if (a.config.empty()) throw ParameterError("study needs --config");
  auto cfg = StudyConfig::load(a.config);
  if (!a.out.empty()) cfg.output_dir = a.out;
  if (cfg.output_dir.empty()) throw ParameterError("no output directory: pass --out or set output_dir");
  if (a.seed) cfg.seed = *a.seed;
  if (a.span) cfg.ewmsd_span = *a.span;
  if (a.replicates) cfg.bootstrap_replicates = *a.replicates;
  if (a.threads) cfg.threads = *a.threads;
  if (!a.quantiles.empty()) cfg.quantiles = a.quantiles;
  cfg.validate();

  const auto bundle = run_study(cfg);
  write_bundle(bundle, cfg.output_dir);
  write_report(bundle, cfg.output_dir);
  for (const auto& f : bundle.mean_fits)
    if (!f.ok()) err << "fit " << f.task.label() << " failed: " << f.error << '\n';
  for (const auto& f : bundle.quantile_fits)
    if (!f.ok()) err << "fit " << f.task.label() << " failed: " << f.error << '\n';
  out << "study: " << bundle.frame.size() << " rows, " << bundle.fit_count() << " fits ("
      << bundle.failure_count() << " failed), written to " << cfg.output_dir.string() << '\n';
  return 0;
}

int run_report(const Args& a, std::ostream& out) {
  const fs::path dir = a.out;
  const fs::path src = a.bundle.empty() ? dir : fs::path(a.bundle);
  const auto bundle = read_bundle(src);
  write_report(bundle, dir);
  out << "report written to " << dir.string() << '\n';
  return 0;
}

int run_fixture(const Args& a, std::ostream& out) {
  FixtureSpec spec;
  if (a.noise) spec.noise_std = *a.noise;
  const std::uint64_t seed = a.seed.value_or(42);
  const auto data = synthetic_fixture(seed, a.hours, spec);
  const fs::path dir = a.out;
  ensure_dir(dir);
  {
    auto f = open_out(dir / "prices.csv");
    write_prices_csv(f, data.prices);
  }
  {
    auto f = open_out(dir / "generation.csv");
    write_generation_csv(f, data.generation);
  }
  nlohmann::json truth = spec.to_json();
  truth["seed"] = seed;
  truth["n_hours"] = data.n_hours;
  open_out(dir / "truth.json") << truth.dump(2) << '\n';

  StudyConfig cfg;
  cfg.prices = "prices.csv";
  cfg.generation = "generation.csv";
  cfg.seed = seed;
  if (a.span) cfg.ewmsd_span = *a.span;
  nlohmann::json cj = cfg.canonical_json();
  open_out(dir / "config.json") << cj.dump(2) << '\n';
  out << "fixture: " << data.n_hours << " hours written to " << dir.string() << '\n';
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hydropower and renewable price-effect study", "hydroprice"};
  app.require_subcommand(1);
  Args a;

  auto add_inputs = [&](CLI::App* sub) {
    sub->add_option("--config", a.config, "Study config JSON");
    sub->add_option("--prices", a.prices, "Price file (.csv or .jsonl)");
    sub->add_option("--generation", a.generation, "Generation file (.csv or .jsonl)");
  };

  auto* ingest = app.add_subcommand("ingest", "Join prices and generation into hourly records");
  add_inputs(ingest);
  ingest->add_option("--out", a.out, "Output directory")->required();

  auto* detrend = app.add_subcommand("detrend", "Fit the calendar model and write the study frame");
  add_inputs(detrend);
  detrend->add_option("--span", a.span, "EWMSD span in hours");
  detrend->add_option("--out", a.out, "Output directory")->required();

  auto* study = app.add_subcommand("study", "Run the full pipeline and write the results bundle");
  study->add_option("--config", a.config, "Study config JSON")->required();
  study->add_option("--out", a.out, "Output directory (overrides config)");
  study->add_option("--seed", a.seed, "Bootstrap seed");
  study->add_option("--span", a.span, "EWMSD span in hours");
  study->add_option("--replicates", a.replicates, "Bootstrap replicates");
  study->add_option("--threads", a.threads, "Worker threads (0: all cores)");
  study->add_option("--quantiles", a.quantiles, "Quantile levels")->delimiter(',');

  auto* report = app.add_subcommand("report", "Re-render tables and figures from a bundle");
  report->add_option("--out", a.out, "Output directory")->required();
  report->add_option("--bundle", a.bundle, "Bundle directory (default: --out)");

  auto* fixture = app.add_subcommand("fixture", "Write a seeded synthetic dataset");
  fixture->add_option("--seed", a.seed, "Generator seed")->required();
  fixture->add_option("--out", a.out, "Output directory")->required();
  fixture->add_option("--hours", a.hours, "Number of hours")->check(CLI::PositiveNumber);
  fixture->add_option("--noise", a.noise, "Noise standard deviation");
  fixture->add_option("--span", a.span, "EWMSD span written to config.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return 1;
  }

  try {
    if (*ingest) return run_ingest(a, out);
    if (*detrend) return run_detrend(a, out);
    if (*study) return run_study_cmd(a, out, err);
    if (*report) return run_report(a, out);
    if (*fixture) return run_fixture(a, out);
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace hydroprice
