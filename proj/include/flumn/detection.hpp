#pragma once

#include <optional>
#include <span>
#include <vector>

#include "flumn/sampler.hpp"
#include "flumn/types.hpp"

namespace flumn {

struct DetectorConfig {
  int sweeps = 200;        // retained sweeps per day
  int warm_up = 60;        // discarded sweeps per day
  double threshold = 0.5;  // epidemic-probability alarm level
  int peak_window = 7;     // centered moving-average window (odd)
  bool adapt = true;
  double growth_floor = 1.0;  // denominator floor of the growth transform
  // Before each day's chain, the transition weights are re-anchored to
  // non-epidemic persistence by this many MH sweeps against an all-NE
  // reference field.  Without the anchor the calm labels NE and SE are
  // interchangeable and their competition alone pushes the epidemic
  // probability above 1/2 on data that carries no epidemic signal at all.
  int anchor_sweeps = 50;
  // Weight of the all-NE initial state in the reported marginals: day t's
  // distribution is shrunk toward NE with weight anchor_weight /
  // (anchor_weight + t), vanishing as observations accumulate.  The first
  // filtered days otherwise reflect the diffuse parameter priors, which
  // place most mass on the three epidemic phases.
  double anchor_weight = 1.0;

  void validate() const;
  ChainConfig chain_config(std::uint64_t seed) const;
};

// Canonical label of cell (r, s) under the NE/SE exchangeability: the two
// calm phases share one emission law, so sampler labelings that differ only
// by which calm label occupies a calm run are the same posterior mode (label
// switching).  The convention that names the phases resolves it: SE is the
// calm phase reached from a rising epidemic, so a calm run whose predecessor
// is not RE reads as NE.
int canonical_phase(const PhaseGrid& z, const ModelVariant& variant, int r, int s);

// Posterior phase state of every region at panel day `day`, using counts up
// to and including that day only.
struct DayFilterResult {
  int day = 0;
  std::vector<std::array<double, kMaxPhases>> phase_dist;  // per region
  std::vector<double> epidemic_prob;  // 1 - P(NE)
  std::vector<int> map_phase;
  ModelState final_state;  // warm-start handle for the next day
};

// Fits the chain to panel days 0..day (day >= 1) and reads off the phase
// marginals of the final growth step.  warm, when given, is the previous
// day's final state (its lattice is extended by repeating the last column).
DayFilterResult filter_day(const ObservationPanel& panel, const RegionGraph& graph,
                           const HyperPriors& hyper, const ModelVariant& variant,
                           const DetectorConfig& config, int day, std::uint64_t seed,
                           const ModelState* warm = nullptr);

struct AlarmRecord {
  int region = 0;
  std::optional<int> alarm_day;  // first day whose epidemic probability
                                 // strictly exceeds the threshold
  int peak_day = 0;              // smoothed-count argmax
  std::optional<int> lead_days;  // alarm_day - peak_day (negative: early)
};

struct DetectionScan {
  std::vector<std::vector<double>> epidemic_prob;               // [region][day]
  std::vector<std::vector<std::array<double, kMaxPhases>>> phase_dist;
  std::vector<AlarmRecord> alarms;
  int first_day = 1;  // day index of column 0
};

// Sequential warm-started filtering over days 1..T-1 plus alarm extraction.
DetectionScan alarm_scan(const ObservationPanel& panel, const RegionGraph& graph,
                         const HyperPriors& hyper, const ModelVariant& variant,
                         const DetectorConfig& config, std::uint64_t seed);

// Index of the maximum of the centered moving average (window odd, >= 1,
// <= series length; edge windows are truncated).  Earliest index on ties.
int find_peak(std::span<const double> series, int window);
int find_peak_counts(std::span<const std::int64_t> series, int window);

// Memory-less baseline: a region alarms the first day its count strictly
// exceeds that region's mean count in the reference panel (>= 28 days).
std::vector<AlarmRecord> average_baseline(const ObservationPanel& panel,
                                          const ObservationPanel& reference,
                                          int peak_window);

}  // namespace flumn
