#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "flumn/dates.hpp"

namespace flumn {

// Phase labels.  In the four-phase model: 0 = NE (non-epidemic),
// 1 = RE (rising epidemic), 2 = SE (stationary epidemic),
// 3 = DE (declining epidemic).  The two-phase variant uses 0 = NE,
// 1 = E (epidemic).
inline constexpr int kNe = 0;
inline constexpr int kRe = 1;
inline constexpr int kSe = 2;
inline constexpr int kDe = 3;
inline constexpr int kMaxPhases = 4;

// Which structural pieces of the model are active.
struct ModelVariant {
  std::string name = "flumn";
  int phases = 4;           // 2 or 4
  bool spatial = true;      // neighbour terms in the phase conditional
  bool daily_effect = true; // day-of-week mean/variance in the emissions

  static ModelVariant flu_mn();    // "flumn": 4 phases, spatial, daily effect
  static ModelVariant time_hmm();  // "timehmm": spatial terms disabled
  static ModelVariant two_phase(); // "twophase": NE/E only
  static ModelVariant flu_mn_r();  // "flumn-r": daily effect disabled
  // Accepts the four names above; throws ValidationError otherwise.
  static ModelVariant from_name(const std::string& name);

  // Dynamic phases carry a drift and their own variance on top of the
  // daily baseline; static phases use the baseline alone.
  bool is_dynamic(int z) const;
  // Open support interval of the drift for a dynamic phase.
  double drift_lo(int z) const;
  double drift_hi(int z) const;
  const char* phase_name(int z) const;
  void validate() const;

  friend bool operator==(const ModelVariant&, const ModelVariant&) = default;
};

// Undirected region adjacency.  Regions are dense indices 0..n_regions-1.
struct RegionGraph {
  int n_regions = 0;
  std::vector<std::vector<int>> neighbors;  // sorted, deduplicated

  static RegionGraph edgeless(int n_regions);
  static RegionGraph from_pairs(int n_regions,
                                const std::vector<std::pair<int, int>>& edges);
  // Unordered unique edges (a < b).
  std::vector<std::pair<int, int>> edge_list() const;
  void validate() const;
};

// Daily counts for a fixed set of regions over a contiguous date range.
struct ObservationPanel {
  std::vector<std::string> regions;
  Date start_date;
  std::vector<std::int64_t> counts;  // region-major: counts[r * n_days + t]

  int n_regions() const { return static_cast<int>(regions.size()); }
  int n_days() const {
    return regions.empty() ? 0 : static_cast<int>(counts.size() / regions.size());
  }
  std::int64_t count(int r, int t) const;
  std::int64_t& count(int r, int t);
  Date date(int t) const { return start_date.plus_days(t); }
  // Day-of-week slot (1..7, 1 = Sunday) of panel day t.
  int day_of_week(int t) const { return date(t).day_of_week(); }
  // First `days` days of the panel.
  ObservationPanel prefix(int days) const;
  void validate() const;
};

// Relative daily growth derived from a panel: delta(r, s) is the change of
// region r's count from day s to day s+1, divided by the (floored) day-s
// count.  A panel with T days yields T-1 growth steps; step s inherits the
// day-of-week of panel day s+1 (the day whose count realised the change).
struct GrowthSeries {
  int n_regions = 0;
  int n_steps = 0;
  std::vector<double> deltas;    // region-major: deltas[r * n_steps + s]
  std::vector<int> day_of_week;  // per step, 1..7

  double delta(int r, int s) const;
  double& delta(int r, int s);
  int dow(int s) const;
  void validate() const;
};

// Day-of-week baseline: slot k (1..7, stored at index k-1) has mean level
// mean[k-1] and variance var[k-1].  When the daily effect is disabled the
// means are all zero and the seven variance slots carry one shared value.
struct DailyEffect {
  std::array<double, 7> mean{};
  std::array<double, 7> var{};

  friend bool operator==(const DailyEffect&, const DailyEffect&) = default;
};

// Dense square matrix over phase labels (up to 4x4; the two-phase variant
// uses the top-left 2x2 block).
struct PhaseMatrix {
  int n = kMaxPhases;
  std::array<double, kMaxPhases * kMaxPhases> v{};

  double at(int i, int j) const { return v[static_cast<size_t>(i) * kMaxPhases + j]; }
  double& at(int i, int j) { return v[static_cast<size_t>(i) * kMaxPhases + j]; }

  friend bool operator==(const PhaseMatrix&, const PhaseMatrix&) = default;
};

// Interaction weights of the phase field: `temporal.at(a, b)` rewards
// yesterday's phase a followed by today's phase b in the same region;
// `spatial.at(a, b)` rewards a neighbour in phase a alongside own phase b
// on the same day.
struct TransitionField {
  PhaseMatrix temporal;
  PhaseMatrix spatial;

  friend bool operator==(const TransitionField&, const TransitionField&) = default;
};

// Drift and extra variance of the dynamic phases, indexed by phase label.
// Entries for static phases are ignored.
struct EpidemicDynamics {
  std::array<double, kMaxPhases> drift{};
  std::array<double, kMaxPhases> var{};

  friend bool operator==(const EpidemicDynamics&, const EpidemicDynamics&) = default;
};

// Fixed hyper-parameters of the priors.
struct HyperPriors {
  // Daily mean L_k ~ Normal(daily_mean_center[k-1], daily_mean_var[k-1]).
  std::array<double, 7> daily_mean_center{};
  std::array<double, 7> daily_mean_var{};
  // Daily variance: scaled inverse chi-squared (dof, scale).
  std::array<double, 7> daily_var_dof{};
  std::array<double, 7> daily_var_scale{};
  // Shared Gaussian variance of every temporal / spatial interaction entry.
  double transition_var = 10.0;
  double spatial_var = 10.0;
  // Dynamic-phase variance prior, per phase label.
  std::array<double, kMaxPhases> epidemic_var_dof{};
  std::array<double, kMaxPhases> epidemic_var_scale{};
  // Pooled observation variance prior when the daily effect is disabled.
  double static_var_dof = 4.0;
  double static_var_scale = 0.05;

  static HyperPriors defaults();
  void validate() const;
};

// Latent phase lattice: one label per (region, growth step).
struct PhaseGrid {
  int n_regions = 0;
  int n_steps = 0;
  std::vector<std::int8_t> z;  // region-major

  static PhaseGrid filled(int n_regions, int n_steps, int phase);
  int at(int r, int s) const;
  void set(int r, int s, int phase);
  void validate(int phases) const;

  friend bool operator==(const PhaseGrid&, const PhaseGrid&) = default;
};

// Full parameter + latent state of one sampler iterate.
struct ModelState {
  PhaseGrid phases;
  DailyEffect daily;
  TransitionField trans;
  EpidemicDynamics dyn;

  void validate(const ModelVariant& variant) const;

  friend bool operator==(const ModelState&, const ModelState&) = default;
};

}  // namespace flumn
