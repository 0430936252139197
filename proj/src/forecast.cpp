#include "flumn/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "flumn/distributions.hpp"
#include "flumn/model.hpp"

namespace flumn {

ForecastResult predict_next(const ChainTrace& trace, const ObservationPanel& panel,
                            const RegionGraph& graph, const ModelVariant& variant) {
  panel.validate();
  graph.validate();
  if (trace.samples.empty())
    throw ValidationError("forecast needs a non-empty trace");
  const PhaseGrid& grid0 = trace.samples.front().phases;
  if (grid0.n_regions != panel.n_regions() || grid0.n_steps != panel.n_days() - 1)
    throw ValidationError("trace shape does not match the panel");
  if (graph.n_regions != panel.n_regions())
    throw ValidationError("graph and panel disagree on the number of regions");

  const int P = variant.phases;
  const int R = panel.n_regions();
  const int last = grid0.n_steps - 1;
  const int dow_next = panel.date(panel.n_days()).day_of_week();

  ForecastResult out;
  out.date = panel.date(panel.n_days());
  out.phase_dist.assign(static_cast<size_t>(R), {});
  out.y_hat.assign(static_cast<size_t>(R), 0.0);

  std::vector<double> growth_mean(static_cast<size_t>(R), 0.0);
  double probs[kMaxPhases];
  for (const ModelState& s : trace.samples) {
    for (int r = 0; r < R; ++r) {
      // One-step propagation: own current label is the predecessor, sampled
      // neighbour labels stand in for tomorrow's, no successor term.
      const int zp = s.phases.at(r, last);
      for (int c = 0; c < P; ++c) probs[c] = s.trans.temporal.at(zp, c);
      if (variant.spatial) {
        for (int j : graph.neighbors[static_cast<size_t>(r)]) {
          const int zj = s.phases.at(j, last);
          for (int c = 0; c < P; ++c) probs[c] += s.trans.spatial.at(zj, c);
        }
      }
      double mx = -std::numeric_limits<double>::infinity();
      for (int c = 0; c < P; ++c) mx = std::max(mx, probs[c]);
      double norm = 0.0;
      for (int c = 0; c < P; ++c) {
        probs[c] = std::exp(probs[c] - mx);
        norm += probs[c];
      }
      double mean_growth = 0.0;
      for (int c = 0; c < P; ++c) {
        probs[c] /= norm;
        out.phase_dist[static_cast<size_t>(r)][static_cast<size_t>(c)] += probs[c];
        mean_growth += probs[c] * emission_mean(c, dow_next, s.daily, s.dyn, variant);
      }
      growth_mean[static_cast<size_t>(r)] += mean_growth;
    }
  }

  const double inv = 1.0 / static_cast<double>(trace.samples.size());
  for (int r = 0; r < R; ++r) {
    for (int c = 0; c < P; ++c)
      out.phase_dist[static_cast<size_t>(r)][static_cast<size_t>(c)] *= inv;
    const double y_last = static_cast<double>(panel.count(r, panel.n_days() - 1));
    out.y_hat[static_cast<size_t>(r)] =
        std::max(0.0, y_last * (1.0 + growth_mean[static_cast<size_t>(r)] * inv));
  }
  return out;
}

ForecastScan forecast_scan(const ObservationPanel& panel, const RegionGraph& graph,
                           const HyperPriors& hyper, const ModelVariant& variant,
                           const DetectorConfig& config, int first_target,
                           std::uint64_t seed) {
  panel.validate();
  config.validate();
  if (first_target < 2 || first_target >= panel.n_days())
    throw ValidationError("first forecast target must lie in [2, n_days)");

  const int R = panel.n_regions();
  ForecastScan scan;
  scan.first_target = first_target;
  scan.y_hat.assign(static_cast<size_t>(R), {});
  scan.realized.assign(static_cast<size_t>(R), {});

  std::optional<ModelState> warm;
  for (int target = first_target; target < panel.n_days(); ++target) {
    const ObservationPanel head = panel.prefix(target);
    const GrowthSeries growth = compute_growth(head, config.growth_floor);
    const ChainTrace trace = run_chain_on_growth(
        growth, graph, hyper, variant,
        config.chain_config(mix_seed(seed, static_cast<std::uint64_t>(target))), warm);
    const ForecastResult fc = predict_next(trace, head, graph, variant);
    for (int r = 0; r < R; ++r) {
      scan.y_hat[static_cast<size_t>(r)].push_back(fc.y_hat[static_cast<size_t>(r)]);
      scan.realized[static_cast<size_t>(r)].push_back(
          static_cast<double>(panel.count(r, target)));
    }
    warm = trace.final_state;
  }
  return scan;
}

// --- autoregression baseline -----------------------------------------------------

ArModel fit_ar(std::span<const double> series, int order) {
  if (order < 1) throw ValidationError("autoregression order must be >= 1");
  const int n = static_cast<int>(series.size());
  if (n <= order + 1)
    throw ValidationError("autoregression needs more than order+1 points");
  const int rows = n - order;
  const int cols = order + 1;

  Eigen::MatrixXd X(rows, cols);
  Eigen::VectorXd y(rows);
  for (int i = 0; i < rows; ++i) {
    const int t = order + i;
    y(i) = series[static_cast<size_t>(t)];
    X(i, 0) = 1.0;
    for (int j = 0; j < order; ++j)
      X(i, 1 + j) = series[static_cast<size_t>(t - 1 - j)];
  }

  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(X);
  const Eigen::VectorXd beta = cod.solve(y);
  const double resid_norm = (X * beta - y).norm();
  const double scale = std::max(1.0, y.norm());
  if (cod.rank() < cols && resid_norm > 1e-8 * scale)
    throw ValidationError(
        "degenerate autoregression fit: design is rank-deficient with no exact solution");

  ArModel model;
  model.order = order;
  model.intercept = beta(0);
  model.coef.resize(static_cast<size_t>(order));
  for (int j = 0; j < order; ++j) model.coef[static_cast<size_t>(j)] = beta(1 + j);
  model.resid_var = resid_norm * resid_norm / static_cast<double>(rows);
  return model;
}

double ar_predict(const ArModel& model, std::span<const double> history) {
  if (static_cast<int>(history.size()) < model.order)
    throw ValidationError("autoregression history shorter than the order");
  double y = model.intercept;
  for (int j = 0; j < model.order; ++j)
    y += model.coef[static_cast<size_t>(j)] *
         history[history.size() - 1 - static_cast<size_t>(j)];
  return std::max(0.0, y);
}

IliMap fit_ili_map(std::span<const double> counts, std::span<const double> target) {
  if (counts.size() != target.size())
    throw ValidationError("count and target series must have equal length");
  const size_t n = counts.size();
  if (n < 4) throw ValidationError("log-log fit needs at least 4 pairs");
  std::vector<double> lx(n), ly(n);
  for (size_t i = 0; i < n; ++i) {
    if (!(counts[i] > 0.0) || !(target[i] > 0.0))
      throw ValidationError("log-log fit needs strictly positive values");
    lx[i] = std::log(counts[i]);
    ly[i] = std::log(target[i]);
  }
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 1e-12))
    throw ValidationError("log-log fit needs non-constant counts");
  IliMap map;
  map.slope = sxy / sxx;
  map.intercept = my - map.slope * mx;
  double ssr = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double e = ly[i] - (map.intercept + map.slope * lx[i]);
    ssr += e * e;
  }
  map.resid_se = std::sqrt(ssr / static_cast<double>(n - 2));
  return map;
}

double ili_apply(const IliMap& map, double count) {
  if (!(count > 0.0)) throw ValidationError("log-log map needs a positive count");
  return std::exp(map.intercept + map.slope * std::log(count));
}

EvalMetrics evaluate(std::span<const double> predicted, std::span<const double> actual) {
  if (predicted.size() != actual.size())
    throw ValidationError("predicted and actual series must have equal length");
  const auto n = predicted.size();
  if (n < 3) throw ValidationError("evaluation needs at least 3 points");
  double mp = 0.0, ma = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mp += predicted[i];
    ma += actual[i];
  }
  mp /= static_cast<double>(n);
  ma /= static_cast<double>(n);
  double spp = 0.0, saa = 0.0, spa = 0.0, se = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double dp = predicted[i] - mp;
    const double da = actual[i] - ma;
    spp += dp * dp;
    saa += da * da;
    spa += dp * da;
    se += (predicted[i] - actual[i]) * (predicted[i] - actual[i]);
  }
  if (!(spp > 0.0) || !(saa > 0.0))
    throw ValidationError("correlation is undefined for constant series");
  EvalMetrics m;
  m.correlation = spa / std::sqrt(spp * saa);
  m.rmse_raw = std::sqrt(se / static_cast<double>(n));
  const double sd_actual = std::sqrt(saa / static_cast<double>(n - 1));
  m.rmse = m.rmse_raw / sd_actual;
  return m;
}

DicResult compute_dic(const ChainTrace& trace, const GrowthSeries& growth,
                      const RegionGraph& graph, const ModelVariant& variant) {
  if (trace.samples.size() < 10)
    throw ValidationError("model comparison needs at least 10 retained samples");
  growth.validate();
  graph.validate();

  auto deviance = [&](const ModelState& s) {
    return -2.0 * (emission_log_likelihood(growth, s.phases, s.daily, s.dyn, variant) +
                   pseudo_log_likelihood(s.phases, graph, s.trans, variant));
  };

  double dbar = 0.0;
  double d_min = std::numeric_limits<double>::infinity();
  for (const ModelState& s : trace.samples) {
    const double d = deviance(s);
    dbar += d;
    d_min = std::min(d_min, d);
  }
  dbar /= static_cast<double>(trace.samples.size());

  // Plug-in at the best retained sample (joint posterior-mode estimate)
  // rather than at averaged parameters with a per-cell modal lattice.  NE
  // and SE share one emission law, so the posterior is exchangeable over
  // calm-cell labelings (whole runs flip, and chains even settle into
  // alternating calm labels with the matching anti-persistent weights);
  // averaging parameters across such modes produces a state no labeling is
  // coherent with, and the plug-in deviance explodes.  The mode plug-in is
  // invariant to the labeling and keeps p_d >= 0 by construction.
  DicResult out;
  out.dbar = dbar;
  out.d_hat = d_min;
  out.p_d = out.dbar - out.d_hat;
  out.dic = out.dbar + out.p_d;
  return out;
}

}  // namespace flumn
