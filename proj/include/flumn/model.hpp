#pragma once

#include "flumn/types.hpp"

namespace flumn {

// Relative growth from a count panel.  Denominators are floored at
// floor_value (> 0) so zero counts cannot divide out.  Requires >= 2 days.
GrowthSeries compute_growth(const ObservationPanel& panel, double floor_value = 1.0);

// Unnormalised log score of each candidate phase for cell (r, s) given the
// rest of the lattice: temporal term from the previous step (if any),
// temporal term into the next step (if any), spatial terms from same-day
// neighbours (if the variant keeps them).  Writes variant.phases values.
void phase_logits(const PhaseGrid& z, const RegionGraph& graph,
                  const TransitionField& field, const ModelVariant& variant,
                  int r, int s, double* out);

// Softmax of phase_logits plus the emission log-density of the observed
// growth at (r, s); probs sums to 1.
void phase_conditional(const PhaseGrid& z, const GrowthSeries& growth,
                       const RegionGraph& graph, const TransitionField& field,
                       const DailyEffect& daily, const EpidemicDynamics& dyn,
                       const ModelVariant& variant, int r, int s, double* probs);

// Emission law of growth delta in phase zl on day-of-week slot dow:
// static phases draw Normal(L_dow, d2_dow); dynamic phases draw
// Normal(drift_z + L_dow, var_z + d2_dow).
double emission_mean(int zl, int dow, const DailyEffect& daily,
                     const EpidemicDynamics& dyn, const ModelVariant& variant);
double emission_var(int zl, int dow, const DailyEffect& daily,
                    const EpidemicDynamics& dyn, const ModelVariant& variant);
double emission_logpdf(double delta, int zl, int dow, const DailyEffect& daily,
                       const EpidemicDynamics& dyn, const ModelVariant& variant);

// Sum over cells of the log of the full phase conditional (the quantity the
// interaction-weight updates target, and the phase part of joint_log_density).
double pseudo_log_likelihood(const PhaseGrid& z, const RegionGraph& graph,
                             const TransitionField& field, const ModelVariant& variant);

// Sum over cells of emission_logpdf at the lattice's labels.
double emission_log_likelihood(const GrowthSeries& growth, const PhaseGrid& z,
                               const DailyEffect& daily, const EpidemicDynamics& dyn,
                               const ModelVariant& variant);

// Log prior of all parameters (daily means/variances when the daily effect
// is on, otherwise the pooled variance; every temporal and spatial entry;
// dynamic drifts and variances).
double log_prior(const ModelState& state, const HyperPriors& hyper,
                 const ModelVariant& variant);

// Monitoring quantity: log prior + pseudo-likelihood + emission likelihood.
double joint_log_density(const ModelState& state, const GrowthSeries& growth,
                         const RegionGraph& graph, const HyperPriors& hyper,
                         const ModelVariant& variant);

// Unnormalised log measure of the phase lattice whose single-site
// conditionals are exactly phase_logits' softmax when the spatial matrix is
// symmetric: temporal terms along each region's chain plus one spatial term
// per undirected edge per day, plus emissions (added by callers that need
// them).  Used by the exhaustive-enumeration reference.
double phase_field_energy(const PhaseGrid& z, const RegionGraph& graph,
                          const TransitionField& field, const ModelVariant& variant);

}  // namespace flumn
