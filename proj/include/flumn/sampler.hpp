#pragma once

#include <optional>
#include <string>
#include <vector>

#include "flumn/common.hpp"
#include "flumn/model.hpp"
#include "flumn/types.hpp"

namespace flumn {

struct ChainConfig {
  int iterations = 1000;  // total sweeps
  int burn_in = 500;      // discarded sweeps (< iterations)
  int thinning = 1;       // keep every thinning-th post-burn-in iterate
  std::uint64_t seed = 1;
  // Initial random-walk scales of the interaction-weight proposals.  The
  // drift update is an exact conjugate draw, so step_drift exists only for
  // config-file stability and is unused.
  double step_temporal = 0.5;
  double step_spatial = 0.5;
  double step_drift = 0.5;
  // Adapt the proposal scales toward 35% acceptance during burn-in only.
  bool adapt = true;

  void validate() const;
  int retained() const { return (iterations - burn_in + thinning - 1) / thinning; }
};

struct AcceptanceStats {
  long long temporal_accepted = 0;
  long long temporal_attempted = 0;
  long long spatial_accepted = 0;
  long long spatial_attempted = 0;

  double temporal_rate() const;
  double spatial_rate() const;
  void add(const AcceptanceStats& o);
};

struct ChainTrace {
  ModelVariant variant;
  ChainConfig config;
  std::vector<ModelState> samples;   // post burn-in, thinned
  std::vector<double> log_density;   // joint log density after every sweep
  ModelState final_state;            // last iterate (warm-start handle)
  AcceptanceStats accept_post;       // tallied after burn-in only
  AcceptanceStats accept_all;
  double final_step_temporal = 0.0;
  double final_step_spatial = 0.0;
};

// Starting point: all-NE lattice, zero interaction weights, and parameters
// drawn from their priors (daily means from their Gaussians, variances from
// their scaled inverse chi-squared laws, drifts uniformly over their open
// supports).  Deterministic given rng_seed.
ModelState init_state(const GrowthSeries& growth, const RegionGraph& graph,
                      const HyperPriors& hyper, const ModelVariant& variant,
                      std::uint64_t rng_seed);

// --- Single-block sweeps (one full Gibbs iteration applies them in the
// --- order: phases, daily mean, daily variance, interaction weights,
// --- epidemic variance, drift).

// Systematic raster scan of the lattice; each cell redrawn from its full
// conditional.  If rb_accum is non-null, the conditional probability vector
// of every visit is accumulated into rb_accum[(r * n_steps + s) * phases + z]
// (Rao-Blackwellised marginal tallies).
void sweep_phases(ModelState& state, const GrowthSeries& growth,
                  const RegionGraph& graph, const ModelVariant& variant,
                  Rng& rng, double* rb_accum = nullptr);

// Conjugate Gaussian update of each daily mean slot (requires the daily
// effect; slots with no static observations fall back to the prior).
void sweep_daily_mean(ModelState& state, const GrowthSeries& growth,
                      const HyperPriors& hyper, const ModelVariant& variant,
                      Rng& rng);

// Conjugate scaled-inverse-chi-squared update of the daily variances, or of
// the single pooled variance when the daily effect is off.
void sweep_daily_variance(ModelState& state, const GrowthSeries& growth,
                          const HyperPriors& hyper, const ModelVariant& variant,
                          Rng& rng);

// Random-walk Metropolis pass over every temporal entry then every spatial
// entry, each against prior x pseudo-likelihood.  Spatial entries are swept
// in every variant (with no spatial terms the move targets the bare prior),
// which keeps seeded traces aligned across variants.
void sweep_transition_fields(ModelState& state, const RegionGraph& graph,
                             const HyperPriors& hyper, const ModelVariant& variant,
                             double step_temporal, double step_spatial,
                             Rng& rng, AcceptanceStats& stats);

// Conjugate update of each dynamic phase's extra variance.
void sweep_epidemic_variance(ModelState& state, const GrowthSeries& growth,
                             const HyperPriors& hyper, const ModelVariant& variant,
                             Rng& rng);

// Exact truncated-Gaussian conjugate update of each dynamic phase's drift
// (precision-weighted by the heteroscedastic daily variances, truncated to
// the phase's support; prior-only cells fall back to a uniform draw).
void sweep_drift(ModelState& state, const GrowthSeries& growth,
                 const ModelVariant& variant, Rng& rng);

// Full Gibbs run on a count panel (growth derived internally) or directly
// on a growth series.  warm_start, when given, must match the growth's
// shape or be extendable to it by repeating its last lattice column.
ChainTrace run_chain(const ObservationPanel& panel, const RegionGraph& graph,
                     const HyperPriors& hyper, const ModelVariant& variant,
                     const ChainConfig& config);
ChainTrace run_chain_on_growth(const GrowthSeries& growth, const RegionGraph& graph,
                               const HyperPriors& hyper, const ModelVariant& variant,
                               const ChainConfig& config,
                               const std::optional<ModelState>& warm_start = {});

struct PosteriorSummary {
  struct Param {
    std::string name;
    double mean = 0.0;
    double sd = 0.0;
    double lo = 0.0;  // 2.5th percentile
    double hi = 0.0;  // 97.5th percentile
  };
  std::vector<Param> params;
  int n_regions = 0;
  int n_steps = 0;
  int phases = 0;
  // Per-cell phase frequencies over retained samples, [(r*n_steps+s)*phases+z];
  // each cell sums to 1.
  std::vector<double> phase_marginals;

  const Param& find(const std::string& name) const;  // throws if absent
  double marginal(int r, int s, int z) const;
  int map_phase(int r, int s) const;  // argmax, lowest label on ties
};

PosteriorSummary summarize(const ChainTrace& trace);

struct ChainDiagnostics {
  double ess_log_density = 0.0;
  double acceptance_temporal = 0.0;  // post burn-in
  double acceptance_spatial = 0.0;
  std::vector<std::string> flags;
};

// Effective sample size of the post-burn-in log-density trace (initial
// positive autocorrelation sum) plus acceptance-rate checks.  When
// adaptation was disabled, rates outside [0.15, 0.6] are flagged.
ChainDiagnostics chain_diagnostics(const ChainTrace& trace);

namespace detail {

// Cells grouped by identical conditional context (previous/next/own label
// plus the neighbour-phase histogram); lets a Metropolis proposal evaluate
// the full pseudo-likelihood as a sum over distinct contexts.
struct PhaseContextTally {
  struct Context {
    std::int8_t zprev = -1;  // -1: no predecessor
    std::int8_t znext = -1;  // -1: no successor
    std::int8_t zown = 0;
    std::array<std::uint16_t, kMaxPhases> ncount{};  // neighbour histogram
  };
  std::vector<Context> contexts;
  std::vector<int> multiplicity;
  int phases = 4;

  static PhaseContextTally build(const PhaseGrid& z, const RegionGraph& graph,
                                 const ModelVariant& variant);
  double pseudo_log_likelihood(const TransitionField& field) const;
};

// One random-walk Metropolis update of a single interaction entry (temporal
// if `temporal`, else spatial) at row a, column b.  cur_pl must hold the
// tally's pseudo-likelihood at the current field and is updated on accept.
// Returns whether the proposal was accepted.
bool mh_update_entry(TransitionField& field, bool temporal, int a, int b,
                     const PhaseContextTally& tally, const HyperPriors& hyper,
                     double step, Rng& rng, double& cur_pl);

}  // namespace detail

}  // namespace flumn
