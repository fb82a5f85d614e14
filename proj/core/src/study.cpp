#include "hydroprice/study.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "hydroprice/errors.hpp"
#include "hydroprice/format.hpp"
#include "hydroprice/parallel.hpp"
#include "hydroprice/quantile.hpp"
#include "hydroprice/random.hpp"

namespace hydroprice {

namespace {

const std::vector<double>& regressor_column(const StudyFrame& frame, Regressor r) {
  switch (r) {
    case Regressor::hydro: return frame.hydro_pct;
    case Regressor::wind: return frame.wind_pct;
    case Regressor::solar: return frame.solar_pct;
  }
  return frame.hydro_pct;
}

const std::vector<double>& response_column(const StudyFrame& frame, Response r) {
  return r == Response::detrended_price ? frame.detrended_price : frame.detrended_volatility;
}

Response parse_response(const std::string& s) {
  if (s == "price") return Response::detrended_price;
  if (s == "volatility") return Response::detrended_volatility;
  throw DataError("unknown response '" + s + "'");
}

Regressor parse_regressor(const std::string& s) {
  if (s == "hydro") return Regressor::hydro;
  if (s == "wind") return Regressor::wind;
  if (s == "solar") return Regressor::solar;
  throw DataError("unknown regressor '" + s + "'");
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

nlohmann::json stats_json(const DescriptiveStats& s) {
  return {{"n", s.n},       {"min", s.min}, {"max", s.max},           {"median", s.median},
          {"mean", s.mean}, {"std", s.std}, {"degenerate", s.degenerate}};
}

DescriptiveStats stats_from_json(const nlohmann::json& j) {
  DescriptiveStats s;
  s.n = j.at("n").get<std::size_t>();
  s.min = j.at("min").get<double>();
  s.max = j.at("max").get<double>();
  s.median = j.at("median").get<double>();
  s.mean = j.at("mean").get<double>();
  s.std = j.at("std").get<double>();
  s.degenerate = j.at("degenerate").get<bool>();
  return s;
}

nlohmann::json outcome_json(const FitOutcome& o) {
  nlohmann::json j;
  j["task"] = o.task.label();
  j["key"] = o.task.spec.key();
  j["response"] = to_string(o.task.spec.response);
  j["regressors"] = nlohmann::json::array();
  for (auto r : o.task.spec.regressors) j["regressors"].push_back(to_string(r));
  if (o.task.tau) j["tau"] = *o.task.tau;
  if (o.result) {
    j["result"] = o.result->to_json();
  } else {
    j["error"] = o.error;
  }
  return j;
}

FitOutcome outcome_from_json(const nlohmann::json& j) {
  FitOutcome o;
  o.task.spec.response = parse_response(j.at("response").get<std::string>());
  for (const auto& r : j.at("regressors")) o.task.spec.regressors.push_back(parse_regressor(r.get<std::string>()));
  if (j.contains("tau")) o.task.tau = j.at("tau").get<double>();
  if (j.contains("result")) {
    const auto& r = j.at("result");
    RegressionResult res;
    res.spec = o.task.spec;
    res.method = o.task.tau ? FitMethod::quantile(*o.task.tau) : FitMethod::ols();
    res.estimates = r.at("estimates").get<std::vector<double>>();
    res.std_errors = r.at("std_errors").get<std::vector<double>>();
    res.p_values = r.at("p_values").get<std::vector<double>>();
    res.n_obs = r.at("n_obs").get<std::size_t>();
    res.residual_dof = r.at("residual_dof").get<std::size_t>();
    res.objective = r.at("objective").get<double>();
    res.degenerate = r.at("degenerate").get<bool>();
    res.iterations = r.at("iterations").get<int>();
    res.bootstrap_replicates = r.value("bootstrap_replicates", std::size_t{0});
    o.result = std::move(res);
  } else {
    o.error = j.value("error", std::string("unknown failure"));
  }
  return o;
}

std::vector<FitOutcome> run_tasks(const StudyFrame& frame, const std::vector<FitTask>& tasks,
                                  const StudyConfig& config) {
  std::vector<FitOutcome> out(tasks.size());
  const unsigned threads = config.threads == 0 ? default_thread_count() : config.threads;
  parallel_for(tasks.size(), threads, [&](std::size_t i) {
    out[i].task = tasks[i];
    try {
      out[i].result = fit_task(frame, tasks[i], config.bootstrap_replicates, config.seed);
    } catch (const std::exception& e) {
      out[i].error = e.what();
    }
  });
  return out;
}

StudyFrame trim_frame(const StudyFrame& frame, double trim) {
  if (trim >= 1.0) return frame;
  const double lo = empirical_quantile(frame.detrended_price, (1.0 - trim) / 2.0);
  const double hi = empirical_quantile(frame.detrended_price, 1.0 - (1.0 - trim) / 2.0);
  StudyFrame out;
  for (std::size_t i = 0; i < frame.size(); ++i) {
    const double v = frame.detrended_price[i];
    if (v < lo || v > hi) continue;
    out.timestamps.push_back(frame.timestamps[i]);
    out.detrended_price.push_back(v);
    out.detrended_volatility.push_back(frame.detrended_volatility[i]);
    out.hydro_pct.push_back(frame.hydro_pct[i]);
    out.solar_pct.push_back(frame.solar_pct[i]);
    out.wind_pct.push_back(frame.wind_pct[i]);
  }
  return out;
}

}  // namespace

void StudyConfig::validate() const {
  if (!(ewmsd_span >= 2.0)) throw ParameterError("config: ewmsd_span must be >= 2");
  for (std::size_t i = 0; i < quantiles.size(); ++i) {
    if (!(quantiles[i] > 0.0 && quantiles[i] < 1.0))
      throw ParameterError("config: quantiles must lie in (0, 1)");
    if (i > 0 && !(quantiles[i] > quantiles[i - 1]))
      throw ParameterError("config: quantiles must be strictly increasing without duplicates");
  }
  if (bootstrap_replicates < 100) throw ParameterError("config: bootstrap_replicates must be >= 100");
  if (!(trim_fraction > 0.9 && trim_fraction <= 1.0))
    throw ParameterError("config: trim_fraction must lie in (0.9, 1]");
}

StudyConfig StudyConfig::from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  static const std::set<std::string> known = {"prices",       "generation",           "ewmsd_span",
                                              "quantiles",    "bootstrap_replicates", "seed",
                                              "output_dir",   "trim_fraction",        "threads",
                                              "min_rows"};
  if (!j.is_object()) throw ParameterError("config must be a JSON object");
  for (const auto& [k, v] : j.items())
    if (!known.contains(k)) throw ParameterError("config: unknown key '" + k + "'");
  StudyConfig c;
  try {
    auto resolve = [&](const std::string& p) {
      std::filesystem::path path(p);
      return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
    };
    if (j.contains("prices")) c.prices = resolve(j.at("prices").get<std::string>());
    if (j.contains("generation")) c.generation = resolve(j.at("generation").get<std::string>());
    if (j.contains("output_dir")) c.output_dir = resolve(j.at("output_dir").get<std::string>());
    c.ewmsd_span = j.value("ewmsd_span", c.ewmsd_span);
    if (j.contains("quantiles")) c.quantiles = j.at("quantiles").get<std::vector<double>>();
    c.bootstrap_replicates = j.value("bootstrap_replicates", c.bootstrap_replicates);
    c.seed = j.value("seed", c.seed);
    c.trim_fraction = j.value("trim_fraction", c.trim_fraction);
    c.threads = j.value("threads", c.threads);
    c.min_rows = j.value("min_rows", c.min_rows);
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

StudyConfig StudyConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file: " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError("config " + path.string() + ": " + e.what());
  }
  return from_json(j, path.parent_path());
}

nlohmann::json StudyConfig::canonical_json() const {
  return {{"prices", prices.filename().string()},
          {"generation", generation.filename().string()},
          {"ewmsd_span", ewmsd_span},
          {"quantiles", quantiles},
          {"bootstrap_replicates", bootstrap_replicates},
          {"seed", seed},
          {"trim_fraction", trim_fraction},
          {"min_rows", min_rows}};
}

nlohmann::json StudyConfig::to_json() const {
  auto j = canonical_json();
  j["prices"] = prices.string();
  j["generation"] = generation.string();
  j["output_dir"] = output_dir.string();
  j["threads"] = threads;
  return j;
}

std::string FitTask::label() const {
  return spec.key() + (tau ? "@" + format_double(*tau) : "@ols");
}

std::vector<FitTask> model_grid(std::span<const std::vector<Regressor>> specs,
                                std::span<const double> quantiles,
                                std::span<const Response> responses) {
  std::vector<FitTask> tasks;
  for (auto response : responses) {
    for (const auto& regs : specs) {
      ModelSpec spec{response, regs, true};
      if (quantiles.empty()) {
        tasks.push_back(FitTask{spec, std::nullopt});
      } else {
        for (double tau : quantiles) tasks.push_back(FitTask{spec, tau});
      }
    }
  }
  return tasks;
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> design_for(const StudyFrame& frame, const ModelSpec& spec) {
  spec.validate();
  const auto n = static_cast<Eigen::Index>(frame.size());
  const auto p = static_cast<Eigen::Index>(spec.coefficient_count());
  Eigen::MatrixXd x(n, p);
  Eigen::Index c = 0;
  if (spec.include_intercept) x.col(c++).setOnes();
  for (auto r : spec.regressors) {
    const auto& col = regressor_column(frame, r);
    x.col(c++) = Eigen::Map<const Eigen::VectorXd>(col.data(), n);
  }
  const auto& resp = response_column(frame, spec.response);
  return {std::move(x), Eigen::Map<const Eigen::VectorXd>(resp.data(), n)};
}

std::uint64_t task_seed(std::uint64_t seed, const FitTask& task) {
  return mix_seed(seed, fnv1a64(task.label()));
}

RegressionResult fit_task(const StudyFrame& frame, const FitTask& task, std::size_t replicates,
                          std::uint64_t seed) {
  const auto [x, y] = design_for(frame, task.spec);
  RegressionResult res;
  res.spec = task.spec;
  res.n_obs = frame.size();
  res.residual_dof = frame.size() - task.spec.coefficient_count();
  auto to_vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  if (!task.tau) {
    const auto fit = fit_ols(x, y);
    res.method = FitMethod::ols();
    res.estimates = to_vec(fit.coefficients);
    res.std_errors = to_vec(fit.std_errors);
    res.p_values = to_vec(fit.p_values);
    res.objective = fit.rss;
    res.degenerate = (fit.std_errors.array() == 0.0).any();
    return res;
  }
  const double tau = *task.tau;
  const auto fit = fit_quantile(x, y, tau);
  const auto boot = bootstrap_se(x, y, tau, replicates, task_seed(seed, task), &fit.estimates);
  res.method = FitMethod::quantile(tau);
  res.estimates = to_vec(fit.estimates);
  res.std_errors = to_vec(boot.std_errors);
  res.p_values = to_vec(boot.p_values);
  res.objective = fit.objective;
  res.degenerate = boot.degenerate;
  res.iterations = fit.iterations;
  res.bootstrap_replicates = replicates;
  return res;
}

std::size_t ResultsBundle::failure_count() const {
  std::size_t k = 0;
  for (const auto& f : mean_fits) k += f.ok() ? 0 : 1;
  for (const auto& f : quantile_fits) k += f.ok() ? 0 : 1;
  return k;
}

const RegressionResult* ResultsBundle::find(Response response, const std::vector<Regressor>& regressors,
                                            std::optional<double> tau) const {
  const auto& list = tau ? quantile_fits : mean_fits;
  for (const auto& f : list) {
    if (!f.ok() || f.task.spec.response != response || f.task.spec.regressors != regressors) continue;
    if (tau && *f.task.tau != *tau) continue;
    return &*f.result;
  }
  return nullptr;
}

std::vector<const RegressionResult*> ResultsBundle::results(Response response,
                                                            std::optional<double> tau) const {
  std::vector<const RegressionResult*> out;
  const auto& list = tau ? quantile_fits : mean_fits;
  for (const auto& f : list) {
    if (!f.ok() || f.task.spec.response != response) continue;
    if (tau && *f.task.tau != *tau) continue;
    out.push_back(&*f.result);
  }
  return out;
}

nlohmann::json ResultsBundle::to_json() const {
  nlohmann::json j;
  j["stats"] = nlohmann::json::array();
  for (const auto& [name, s] : stats) {
    auto e = stats_json(s);
    e["column"] = name;
    j["stats"].push_back(e);
  }
  j["correlation"]["columns"] = correlation_names;
  j["correlation"]["matrix"] = nlohmann::json::array();
  for (Eigen::Index i = 0; i < correlation.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(correlation.cols()));
    for (Eigen::Index k = 0; k < correlation.cols(); ++k) row[static_cast<std::size_t>(k)] = correlation(i, k);
    j["correlation"]["matrix"].push_back(row);
  }
  j["mean_fits"] = nlohmann::json::array();
  for (const auto& f : mean_fits) j["mean_fits"].push_back(outcome_json(f));
  j["quantile_fits"] = nlohmann::json::array();
  for (const auto& f : quantile_fits) j["quantile_fits"].push_back(outcome_json(f));
  j["provenance"] = provenance;
  j["detrend_model"] = detrend.to_json();
  j["ingest_report"] = ingest.to_json();
  return j;
}

ResultsBundle ResultsBundle::from_json(const nlohmann::json& j) {
  ResultsBundle b;
  try {
    for (const auto& e : j.at("stats")) b.stats.emplace_back(e.at("column").get<std::string>(), stats_from_json(e));
    b.correlation_names = j.at("correlation").at("columns").get<std::vector<std::string>>();
    const auto& m = j.at("correlation").at("matrix");
    const auto k = static_cast<Eigen::Index>(b.correlation_names.size());
    b.correlation.resize(k, k);
    for (Eigen::Index r = 0; r < k; ++r)
      for (Eigen::Index c = 0; c < k; ++c) b.correlation(r, c) = m.at(r).at(c).get<double>();
    for (const auto& f : j.at("mean_fits")) b.mean_fits.push_back(outcome_from_json(f));
    for (const auto& f : j.at("quantile_fits")) b.quantile_fits.push_back(outcome_from_json(f));
    b.provenance = j.at("provenance");
    b.detrend = DetrendModel::from_json(j.at("detrend_model"));
    const auto& ir = j.at("ingest_report");
    b.ingest.price_rows_read = ir.at("price_rows_read").get<std::size_t>();
    b.ingest.generation_readings_read = ir.at("generation_readings_read").get<std::size_t>();
    b.ingest.hourly_records = ir.at("hourly_records").get<std::size_t>();
    for (const auto& [k2, v] : ir.at("dropped").items()) b.ingest.dropped[k2] = v.get<std::size_t>();
    for (const auto& [k2, v] : ir.at("flagged").items()) b.ingest.flagged[k2] = v.get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad results bundle: ") + e.what());
  }
  return b;
}

PreparedFrame prepare_frame(std::vector<HourlyRecord> records, double span) {
  PreparedFrame p;
  p.detrend = fit_detrend(records);
  std::vector<Timestamp> ts(records.size());
  std::vector<double> mec(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    ts[i] = records[i].timestamp;
    mec[i] = records[i].mec;
  }
  const auto detrended = detrend(ts, mec, p.detrend);
  p.frame = build_study_frame(records, detrended, span);
  p.records = std::move(records);
  return p;
}

ResultsBundle run_study_records(const StudyConfig& config, std::vector<HourlyRecord> records,
                                IngestReport report) {
  config.validate();
  if (records.size() < config.min_rows)
    throw InsufficientDataError("only " + std::to_string(records.size()) +
                                " hourly rows after joining; need at least " +
                                std::to_string(config.min_rows));

  auto prepared = prepare_frame(std::move(records), config.ewmsd_span);

  ResultsBundle b;
  b.ingest = std::move(report);
  b.detrend = prepared.detrend;
  b.frame = std::move(prepared.frame);

  b.stats = descriptive_stats(b.frame);
  for (auto src : {Source::hydro, Source::solar, Source::wind}) {
    std::vector<double> mwh;
    mwh.reserve(prepared.records.size());
    for (const auto& r : prepared.records) mwh.push_back(r.gen(src));
    b.stats.emplace_back(std::string(to_string(src)) + "_mwh", descriptive_stats(mwh));
  }

  b.correlation_names = {"hydro_pct", "solar_pct", "wind_pct", "detrended_price", "detrended_volatility"};
  std::vector<std::vector<double>> cols;
  for (const auto& name : b.correlation_names) cols.push_back(b.frame.column(name));
  b.correlation = correlation_matrix(cols);

  const StudyFrame fit_frame = trim_frame(b.frame, config.trim_fraction);

  std::vector<std::vector<Regressor>> specs;
  for (const auto& s : standard_model_specs(Response::detrended_price)) specs.push_back(s.regressors);
  const std::vector<Response> responses = {Response::detrended_price, Response::detrended_volatility};

  b.mean_fits = run_tasks(fit_frame, model_grid(specs, {}, responses), config);
  b.quantile_fits = run_tasks(fit_frame, model_grid(specs, config.quantiles, responses), config);

  const auto canonical = config.canonical_json();
  nlohmann::json prov;
  prov["config"] = canonical;
  prov["config_hash"] = hex64(fnv1a64(canonical.dump()));
  prov["rows"] = {{"hourly_records", b.frame.size()}, {"fitted_rows", fit_frame.size()}};
  prov["ingest"] = b.ingest.to_json();
  prov["fits"] = {{"mean", b.mean_fits.size()},
                  {"quantile", b.quantile_fits.size()},
                  {"failed", b.failure_count()}};
  nlohmann::json failures = nlohmann::json::array();
  for (const auto* list : {&b.mean_fits, &b.quantile_fits})
    for (const auto& f : *list)
      if (!f.ok()) failures.push_back({{"task", f.task.label()}, {"error", f.error}});
  prov["failures"] = failures;
  prov["detrend"] = {{"grand_mean", b.detrend.grand_mean()}, {"residual_dof", b.detrend.residual_dof()}};
  b.provenance = prov;
  return b;
}

ResultsBundle run_study(const StudyConfig& config, std::span<const PriceRow> prices,
                        std::span<const GenerationReading> generation) {
  IngestReport report;
  report.price_rows_read = prices.size();
  report.generation_readings_read = generation.size();
  const auto hourly = aggregate_generation(generation, &report);
  auto records = join_hourly(prices, hourly, &report);
  return run_study_records(config, std::move(records), std::move(report));
}

ResultsBundle run_study(const StudyConfig& config) {
  config.validate();
  auto ingested = ingest_files(config.prices, config.generation);
  return run_study_records(config, std::move(ingested.records), std::move(ingested.report));
}

}  // namespace hydroprice
