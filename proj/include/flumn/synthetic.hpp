#pragma once

#include <vector>

#include "flumn/sampler.hpp"
#include "flumn/types.hpp"

namespace flumn {

// Scripted wave schedule: region r is NE until onset[r], then spends
// dwell_re / dwell_se / dwell_de steps in RE / SE / DE and returns to NE.
// With period > 0 the pattern repeats every `period` steps after onset.
struct WaveSpec {
  std::vector<int> onset;  // per region, in growth steps
  int dwell_re = 8;
  int dwell_se = 5;
  int dwell_de = 7;
  int period = 0;  // 0: single wave
};

struct ScenarioSpec {
  int n_regions = 2;
  int n_days = 30;
  Date start_date{2009, 1, 4};
  RegionGraph graph;                       // defaults to edgeless(n_regions)
  ModelVariant variant = ModelVariant::flu_mn();
  DailyEffect daily;                       // generating values
  TransitionField trans;
  EpidemicDynamics dyn;
  std::vector<std::int64_t> initial_counts;  // per region, day 0

  enum class PhaseMode { Field, Wave };
  PhaseMode mode = PhaseMode::Field;
  // Field mode: sequential conditional sweeps used to draw the lattice from
  // the interaction field (approximate generative scheme; adequate for test
  // panels).
  int field_sweeps = 3;
  WaveSpec wave;  // Wave mode only

  std::uint64_t seed = 1;

  void validate() const;
};

struct SyntheticData {
  ObservationPanel panel;  // reconstructed integer counts
  PhaseGrid phases;        // generating lattice
  GrowthSeries growth;     // sampled growth before count quantisation
};

// Draws a lattice (scripted or field-sampled), draws growth from the phase
// emissions, and reconstructs counts as Y_t = max(round(Y_{t-1}(1+delta)), 0)
// (capped at 4.5e15 to keep the arithmetic in safe integer range).  The
// sampled growth is returned alongside because count reconstruction censors
// growth below -1 (a count cannot lose more than 100% in a day).
SyntheticData generate_panel(const ScenarioSpec& spec);

// Exhaustive posterior of the phase lattice given growth and fixed
// parameters: enumerates every configuration, scores temporal-chain terms,
// one spatial term per undirected edge per day, and emissions, normalises,
// and returns per-cell marginals [(r*n_steps+s)*phases+z].  Throws
// ValidationError when phases^(regions*steps) exceeds 65536 states.
std::vector<double> brute_force_posterior(const GrowthSeries& growth,
                                          const RegionGraph& graph,
                                          const TransitionField& field,
                                          const DailyEffect& daily,
                                          const EpidemicDynamics& dyn,
                                          const ModelVariant& variant);

struct RecoveryReport {
  struct ParamCover {
    std::string name;
    double truth = 0.0;
    int covered = 0;  // runs whose central 95% interval contains truth
  };
  int runs = 0;
  std::vector<ParamCover> coverage;      // drifts, dynamic variances, daily means
  // Per run: per-cell modal phase vs the generating lattice, both read on
  // canonical labels (the calm labels NE/SE are exchangeable; see
  // canonical_phase), so the score is invariant to calm-label switching.
  std::vector<double> map_agreement;
  std::vector<double> acceptance_temporal;  // post burn-in, per run
  std::vector<double> acceptance_spatial;
  double mean_map_agreement = 0.0;
};

// Repeated generate-then-fit study across seeds (seed base + 1..runs).  The
// chain consumes the sampled growth directly: count reconstruction censors
// growth at -1, which at epidemic-scale variances would bias the drift
// estimates irrecoverably; recovery is a statement about the sampler, so it
// is evaluated on the model's own data space.
RecoveryReport recovery_report(const ScenarioSpec& scenario, int runs,
                               const HyperPriors& hyper, const ChainConfig& config);

}  // namespace flumn
