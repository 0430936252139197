#pragma once

#include <span>
#include <vector>

#include "flumn/detection.hpp"
#include "flumn/sampler.hpp"
#include "flumn/types.hpp"

namespace flumn {

// One-step-ahead phase distribution and count point forecast per region.
struct ForecastResult {
  Date date;  // day being forecast (one past the fitted panel)
  std::vector<std::array<double, kMaxPhases>> phase_dist;
  std::vector<double> y_hat;
};

// Propagates each retained sample one step through the fitted phase
// conditional (own current label as predecessor, sampled neighbour labels as
// the same-day surrogate, no successor term) and averages the implied growth
// means: y_hat = max(Y_T * (1 + E[delta]), 0).
ForecastResult predict_next(const ChainTrace& trace, const ObservationPanel& panel,
                            const RegionGraph& graph, const ModelVariant& variant);

// Sequential one-step forecasts for days first_target..T-1: for each target
// day t the chain is fit (warm-started) on days 0..t-1 and predict_next is
// read off.  Evaluation pairs y_hat with the realised counts.
struct ForecastScan {
  int first_target = 0;
  std::vector<std::vector<double>> y_hat;     // [region][k]
  std::vector<std::vector<double>> realized;  // same shape
};

ForecastScan forecast_scan(const ObservationPanel& panel, const RegionGraph& graph,
                           const HyperPriors& hyper, const ModelVariant& variant,
                           const DetectorConfig& config, int first_target,
                           std::uint64_t seed);

// Autoregression fit by least squares: y_t ~ intercept + sum_j coef[j] *
// y_{t-1-j}.  Rank-deficient designs are solved minimum-norm; if no exact
// fit exists there either, the coefficients are unidentifiable and a
// ValidationError (degenerate fit) is raised.  Requires
// series length > order + 1 and order >= 1.
struct ArModel {
  int order = 0;
  double intercept = 0.0;
  std::vector<double> coef;   // coef[j] multiplies lag j+1
  double resid_var = 0.0;     // mean squared fit residual
};

ArModel fit_ar(std::span<const double> series, int order);
// One-step prediction from the most recent history (history.size() >= order;
// history in time order, newest last).  Counts cannot go negative, so the
// linear predictor is clamped at 0.
double ar_predict(const ArModel& model, std::span<const double> history);

// Log-log bridge from counts to a clinical burden series:
// log(target) = intercept + slope * log(count), fit by ordinary least
// squares.  Requires equal lengths >= 4, strictly positive values (the logs
// must exist), and non-constant counts.
struct IliMap {
  double intercept = 0.0;
  double slope = 0.0;
  double resid_se = 0.0;  // residual standard error, sqrt(SSR / (n - 2))
};

IliMap fit_ili_map(std::span<const double> counts, std::span<const double> target);
double ili_apply(const IliMap& map, double count);

// Pearson correlation plus RMSE standardised by the actual series' standard
// deviation (rmse_raw keeps the unstandardised value).  Requires equal
// lengths >= 3 and non-constant series.
struct EvalMetrics {
  double correlation = 0.0;
  double rmse = 0.0;      // raw RMSE / sd(actual)
  double rmse_raw = 0.0;
};

EvalMetrics evaluate(std::span<const double> predicted, std::span<const double> actual);

// Deviance information criterion over a chain's retained samples, with
// deviance D = -2 (emission log-likelihood + pseudo-log-likelihood).  The
// plug-in deviance d_hat is taken at the minimum-deviance retained sample (a
// joint posterior-mode estimate): the calm labels NE/SE are exchangeable, so
// averaged parameters plus a modal lattice are not a coherent state, while
// the mode plug-in is labeling-invariant.  dic = dbar + pd, pd = dbar - d_hat.
struct DicResult {
  double dic = 0.0;
  double dbar = 0.0;
  double d_hat = 0.0;
  double p_d = 0.0;
};

DicResult compute_dic(const ChainTrace& trace, const GrowthSeries& growth,
                      const RegionGraph& graph, const ModelVariant& variant);

}  // namespace flumn
