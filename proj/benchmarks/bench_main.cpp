#include <benchmark/benchmark.h>

#include <random>

#include "hydroprice/least_squares.hpp"
#include "hydroprice/quantile.hpp"
#include "hydroprice/series_metrics.hpp"

using namespace hydroprice;

namespace {

// Intercept plus three share-like regressors with a heavy-tailed response,
// roughly the shape of seven years of hourly data.
struct Problem {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
};

Problem make_problem(Eigen::Index n, Eigen::Index p) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> z(0.0, 1.0);
  std::student_t_distribution<double> t(3.0);
  Problem pr{Eigen::MatrixXd(n, p), Eigen::VectorXd(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    pr.x(i, 0) = 1.0;
    double mean = 40.0;
    for (Eigen::Index j = 1; j < p; ++j) {
      pr.x(i, j) = 10.0 + 3.0 * z(rng);
      mean -= 0.5 * pr.x(i, j);
    }
    pr.y(i) = mean + 8.0 * t(rng);
  }
  return pr;
}

void BM_FitQuantile(benchmark::State& state) {
  const auto pr = make_problem(state.range(0), 4);
  for (auto _ : state) benchmark::DoNotOptimize(fit_quantile(pr.x, pr.y, 0.9).objective);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FitQuantile)->Arg(8760)->Arg(61368)->Unit(benchmark::kMillisecond);

void BM_FitOls(benchmark::State& state) {
  const auto pr = make_problem(state.range(0), 4);
  for (auto _ : state) benchmark::DoNotOptimize(fit_ols(pr.x, pr.y).rss);
}
BENCHMARK(BM_FitOls)->Arg(61368)->Unit(benchmark::kMillisecond);

void BM_Ewmsd(benchmark::State& state) {
  const auto pr = make_problem(state.range(0), 1);
  const std::vector<double> series(pr.y.data(), pr.y.data() + pr.y.size());
  for (auto _ : state) benchmark::DoNotOptimize(ewmsd(series, 24.0).back());
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Ewmsd)->Arg(61368)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
