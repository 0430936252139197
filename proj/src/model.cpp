#include "flumn/model.hpp"

#include <cmath>
#include <span>

#include "flumn/distributions.hpp"

namespace flumn {

GrowthSeries compute_growth(const ObservationPanel& panel, double floor_value) {
  panel.validate();
  if (!(floor_value > 0.0))
    throw ValidationError("growth floor must be positive");
  if (panel.n_days() < 2)
    throw ValidationError("growth needs at least two days of counts");
  GrowthSeries g;
  g.n_regions = panel.n_regions();
  g.n_steps = panel.n_days() - 1;
  g.deltas.resize(static_cast<size_t>(g.n_regions) * static_cast<size_t>(g.n_steps));
  g.day_of_week.resize(static_cast<size_t>(g.n_steps));
  for (int s = 0; s < g.n_steps; ++s)
    g.day_of_week[static_cast<size_t>(s)] = panel.day_of_week(s + 1);
  for (int r = 0; r < g.n_regions; ++r) {
    for (int s = 0; s < g.n_steps; ++s) {
      const double prev = std::max(static_cast<double>(panel.count(r, s)), floor_value);
      g.delta(r, s) = (static_cast<double>(panel.count(r, s + 1)) -
                       static_cast<double>(panel.count(r, s))) / prev;
    }
  }
  return g;
}

void phase_logits(const PhaseGrid& z, const RegionGraph& graph,
                  const TransitionField& field, const ModelVariant& variant,
                  int r, int s, double* out) {
  const int P = variant.phases;
  for (int c = 0; c < P; ++c) out[c] = 0.0;
  if (s > 0) {
    const int zp = z.at(r, s - 1);
    for (int c = 0; c < P; ++c) out[c] += field.temporal.at(zp, c);
  }
  if (s + 1 < z.n_steps) {
    const int zn = z.at(r, s + 1);
    for (int c = 0; c < P; ++c) out[c] += field.temporal.at(c, zn);
  }
  if (variant.spatial) {
    for (int j : graph.neighbors[static_cast<size_t>(r)]) {
      const int zj = z.at(j, s);
      for (int c = 0; c < P; ++c) out[c] += field.spatial.at(zj, c);
    }
  }
}

void phase_conditional(const PhaseGrid& z, const GrowthSeries& growth,
                       const RegionGraph& graph, const TransitionField& field,
                       const DailyEffect& daily, const EpidemicDynamics& dyn,
                       const ModelVariant& variant, int r, int s, double* probs) {
  const int P = variant.phases;
  phase_logits(z, graph, field, variant, r, s, probs);
  const double d = growth.delta(r, s);
  const int k = growth.dow(s);
  for (int c = 0; c < P; ++c)
    probs[c] += emission_logpdf(d, c, k, daily, dyn, variant);
  const double lse = log_sum_exp(std::span<const double>(probs, static_cast<size_t>(P)));
  for (int c = 0; c < P; ++c) probs[c] = std::exp(probs[c] - lse);
}

double emission_mean(int zl, int dow, const DailyEffect& daily,
                     const EpidemicDynamics& dyn, const ModelVariant& variant) {
  const double base = daily.mean[static_cast<size_t>(dow - 1)];
  return variant.is_dynamic(zl) ? dyn.drift[static_cast<size_t>(zl)] + base : base;
}

double emission_var(int zl, int dow, const DailyEffect& daily,
                    const EpidemicDynamics& dyn, const ModelVariant& variant) {
  const double base = daily.var[static_cast<size_t>(dow - 1)];
  return variant.is_dynamic(zl) ? dyn.var[static_cast<size_t>(zl)] + base : base;
}

double emission_logpdf(double delta, int zl, int dow, const DailyEffect& daily,
                       const EpidemicDynamics& dyn, const ModelVariant& variant) {
  if (dow < 1 || dow > 7) throw ValidationError("day-of-week slot out of range");
  return normal_logpdf(delta, emission_mean(zl, dow, daily, dyn, variant),
                       emission_var(zl, dow, daily, dyn, variant));
}

double pseudo_log_likelihood(const PhaseGrid& z, const RegionGraph& graph,
                             const TransitionField& field, const ModelVariant& variant) {
  const int P = variant.phases;
  double total = 0.0;
  double logits[kMaxPhases];
  for (int r = 0; r < z.n_regions; ++r) {
    for (int s = 0; s < z.n_steps; ++s) {
      phase_logits(z, graph, field, variant, r, s, logits);
      const double lse =
          log_sum_exp(std::span<const double>(logits, static_cast<size_t>(P)));
      total += logits[z.at(r, s)] - lse;
    }
  }
  return total;
}

double emission_log_likelihood(const GrowthSeries& growth, const PhaseGrid& z,
                               const DailyEffect& daily, const EpidemicDynamics& dyn,
                               const ModelVariant& variant) {
  if (z.n_regions != growth.n_regions || z.n_steps != growth.n_steps)
    throw ValidationError("lattice and growth shapes disagree");
  double total = 0.0;
  for (int r = 0; r < z.n_regions; ++r)
    for (int s = 0; s < z.n_steps; ++s)
      total += emission_logpdf(growth.delta(r, s), z.at(r, s), growth.dow(s),
                               daily, dyn, variant);
  return total;
}

double log_prior(const ModelState& state, const HyperPriors& hyper,
                 const ModelVariant& variant) {
  hyper.validate();
  double total = 0.0;
  if (variant.daily_effect) {
    for (int k = 0; k < 7; ++k) {
      const auto ki = static_cast<size_t>(k);
      total += normal_logpdf(state.daily.mean[ki], hyper.daily_mean_center[ki],
                             hyper.daily_mean_var[ki]);
      total += inv_chi2_logpdf(state.daily.var[ki], hyper.daily_var_dof[ki],
                               hyper.daily_var_scale[ki]);
    }
  } else {
    total += inv_chi2_logpdf(state.daily.var[0], hyper.static_var_dof,
                             hyper.static_var_scale);
  }
  const int P = variant.phases;
  for (int a = 0; a < P; ++a) {
    for (int b = 0; b < P; ++b) {
      total += normal_logpdf(state.trans.temporal.at(a, b), 0.0, hyper.transition_var);
      total += normal_logpdf(state.trans.spatial.at(a, b), 0.0, hyper.spatial_var);
    }
  }
  for (int zl = 0; zl < P; ++zl) {
    if (!variant.is_dynamic(zl)) continue;
    const auto zi = static_cast<size_t>(zl);
    // Uniform drift prior: constant density 1/width inside the support.
    total -= std::log(variant.drift_hi(zl) - variant.drift_lo(zl));
    total += inv_chi2_logpdf(state.dyn.var[zi], hyper.epidemic_var_dof[zi],
                             hyper.epidemic_var_scale[zi]);
  }
  return total;
}

double joint_log_density(const ModelState& state, const GrowthSeries& growth,
                         const RegionGraph& graph, const HyperPriors& hyper,
                         const ModelVariant& variant) {
  return log_prior(state, hyper, variant) +
         pseudo_log_likelihood(state.phases, graph, state.trans, variant) +
         emission_log_likelihood(growth, state.phases, state.daily, state.dyn, variant);
}

double phase_field_energy(const PhaseGrid& z, const RegionGraph& graph,
                          const TransitionField& field, const ModelVariant& variant) {
  double total = 0.0;
  for (int r = 0; r < z.n_regions; ++r)
    for (int s = 1; s < z.n_steps; ++s)
      total += field.temporal.at(z.at(r, s - 1), z.at(r, s));
  if (variant.spatial) {
    for (const auto& [a, b] : graph.edge_list())
      for (int s = 0; s < z.n_steps; ++s)
        total += field.spatial.at(z.at(a, s), z.at(b, s));
  }
  return total;
}

}  // namespace flumn
