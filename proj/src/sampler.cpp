#include "flumn/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

#include "flumn/distributions.hpp"

namespace flumn {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kTargetAcceptance = 0.35;
constexpr double kMinStep = 1e-3;
constexpr double kMaxStep = 5.0;

// Per-sweep emission lookup: log N(d | mean, var) = log_norm - (d-mean)^2 * half_prec.
struct EmissionTable {
  int phases = 0;
  // [z * 7 + (dow-1)]
  std::array<double, kMaxPhases * 7> mean{}, half_prec{}, log_norm{};

  static EmissionTable build(const DailyEffect& daily, const EpidemicDynamics& dyn,
                             const ModelVariant& variant) {
    EmissionTable t;
    t.phases = variant.phases;
    for (int z = 0; z < variant.phases; ++z) {
      for (int k = 1; k <= 7; ++k) {
        const double m = emission_mean(z, k, daily, dyn, variant);
        const double v = emission_var(z, k, daily, dyn, variant);
        if (!(v > 0.0)) throw ValidationError("emission variance must be positive");
        const auto idx = static_cast<size_t>(z * 7 + k - 1);
        t.mean[idx] = m;
        t.half_prec[idx] = 0.5 / v;
        t.log_norm[idx] = -0.5 * (kLog2Pi + std::log(v));
      }
    }
    return t;
  }

  double logpdf(double d, int z, int dow) const {
    const auto idx = static_cast<size_t>(z * 7 + dow - 1);
    const double r = d - mean[idx];
    return log_norm[idx] - r * r * half_prec[idx];
  }
};

int draw_categorical(Rng& rng, const double* probs, int n) {
  const double u = uniform01(rng);
  double acc = 0.0;
  for (int c = 0; c < n; ++c) {
    acc += probs[c];
    if (u < acc) return c;
  }
  return n - 1;
}

double draw_normal(Rng& rng, double mean, double sd) {
  return std::normal_distribution<double>(mean, sd)(rng);
}

struct CellStats {
  double n = 0.0;
  double sum = 0.0;   // residual sum
  double sum2 = 0.0;  // residual square sum
};

}  // namespace

// --- config / stats -----------------------------------------------------------

void ChainConfig::validate() const {
  if (iterations < 1) throw ValidationError("chain needs at least one iteration");
  if (burn_in < 0 || burn_in >= iterations)
    throw ValidationError("burn-in must lie in [0, iterations)");
  if (thinning < 1) throw ValidationError("thinning must be >= 1");
  if (!(step_temporal > 0.0) || !(step_spatial > 0.0) || !(step_drift > 0.0))
    throw ValidationError("proposal steps must be positive");
}

double AcceptanceStats::temporal_rate() const {
  return temporal_attempted == 0
             ? 0.0
             : static_cast<double>(temporal_accepted) / static_cast<double>(temporal_attempted);
}

double AcceptanceStats::spatial_rate() const {
  return spatial_attempted == 0
             ? 0.0
             : static_cast<double>(spatial_accepted) / static_cast<double>(spatial_attempted);
}

void AcceptanceStats::add(const AcceptanceStats& o) {
  temporal_accepted += o.temporal_accepted;
  temporal_attempted += o.temporal_attempted;
  spatial_accepted += o.spatial_accepted;
  spatial_attempted += o.spatial_attempted;
}

// --- initial state ---------------------------------------------------------------

ModelState init_state(const GrowthSeries& growth, const RegionGraph& graph,
                      const HyperPriors& hyper, const ModelVariant& variant,
                      std::uint64_t rng_seed) {
  growth.validate();
  graph.validate();
  if (graph.n_regions != growth.n_regions)
    throw ValidationError("graph and growth series disagree on the region count");
  hyper.validate();
  variant.validate();
  Rng rng(rng_seed);
  ModelState state;
  state.phases = PhaseGrid::filled(growth.n_regions, growth.n_steps, kNe);
  if (variant.daily_effect) {
    for (int k = 0; k < 7; ++k) {
      const auto ki = static_cast<size_t>(k);
      state.daily.mean[ki] = draw_normal(rng, hyper.daily_mean_center[ki],
                                         std::sqrt(hyper.daily_mean_var[ki]));
      state.daily.var[ki] =
          inv_chi2_sample(rng, hyper.daily_var_dof[ki], hyper.daily_var_scale[ki]);
    }
  } else {
    state.daily.mean.fill(0.0);
    state.daily.var.fill(
        inv_chi2_sample(rng, hyper.static_var_dof, hyper.static_var_scale));
  }
  for (int z = 0; z < variant.phases; ++z) {
    if (!variant.is_dynamic(z)) continue;
    const auto zi = static_cast<size_t>(z);
    state.dyn.var[zi] =
        inv_chi2_sample(rng, hyper.epidemic_var_dof[zi], hyper.epidemic_var_scale[zi]);
    double u = uniform01(rng);
    if (u == 0.0) u = 0.5;  // keep the drift strictly inside its open support
    state.dyn.drift[zi] =
        variant.drift_lo(z) + u * (variant.drift_hi(z) - variant.drift_lo(z));
  }
  return state;
}

// --- phase sweep -------------------------------------------------------------------

void sweep_phases(ModelState& state, const GrowthSeries& growth,
                  const RegionGraph& graph, const ModelVariant& variant,
                  Rng& rng, double* rb_accum) {
  const int P = variant.phases;
  const int S = growth.n_steps;
  const EmissionTable emis = EmissionTable::build(state.daily, state.dyn, variant);
  double logits[kMaxPhases];
  double probs[kMaxPhases];
  for (int r = 0; r < growth.n_regions; ++r) {
    for (int s = 0; s < S; ++s) {
      phase_logits(state.phases, graph, state.trans, variant, r, s, logits);
      const double d = growth.delta(r, s);
      const int k = growth.dow(s);
      double mx = -std::numeric_limits<double>::infinity();
      for (int c = 0; c < P; ++c) {
        logits[c] += emis.logpdf(d, c, k);
        mx = std::max(mx, logits[c]);
      }
      double norm = 0.0;
      for (int c = 0; c < P; ++c) {
        probs[c] = std::exp(logits[c] - mx);
        norm += probs[c];
      }
      for (int c = 0; c < P; ++c) probs[c] /= norm;
      if (rb_accum != nullptr) {
        double* cell = rb_accum + (static_cast<size_t>(r) * static_cast<size_t>(S) +
                                   static_cast<size_t>(s)) * static_cast<size_t>(P);
        for (int c = 0; c < P; ++c) cell[c] += probs[c];
      }
      state.phases.set(r, s, draw_categorical(rng, probs, P));
    }
  }
}

// --- daily baseline sweeps ------------------------------------------------------------

void sweep_daily_mean(ModelState& state, const GrowthSeries& growth,
                      const HyperPriors& hyper, const ModelVariant& variant,
                      Rng& rng) {
  if (!variant.daily_effect)
    throw ValidationError("daily mean sweep requires the daily effect");
  // Static cells only: dynamic phases carry the daily mean inside their own
  // location term, so they inform L through the drift update instead.
  std::array<CellStats, 7> stats{};
  for (int r = 0; r < growth.n_regions; ++r) {
    for (int s = 0; s < growth.n_steps; ++s) {
      const int z = state.phases.at(r, s);
      if (variant.is_dynamic(z)) continue;
      auto& st = stats[static_cast<size_t>(growth.dow(s) - 1)];
      st.n += 1.0;
      st.sum += growth.delta(r, s);
    }
  }
  for (int k = 0; k < 7; ++k) {
    const auto ki = static_cast<size_t>(k);
    const double d2 = state.daily.var[ki];
    const double prior_prec = 1.0 / hyper.daily_mean_var[ki];
    const double prec = stats[ki].n / d2 + prior_prec;
    const double mean =
        (stats[ki].sum / d2 + hyper.daily_mean_center[ki] * prior_prec) / prec;
    state.daily.mean[ki] = draw_normal(rng, mean, std::sqrt(1.0 / prec));
  }
}

void sweep_daily_variance(ModelState& state, const GrowthSeries& growth,
                          const HyperPriors& hyper, const ModelVariant& variant,
                          Rng& rng) {
  if (variant.daily_effect) {
    std::array<CellStats, 7> stats{};
    for (int r = 0; r < growth.n_regions; ++r) {
      for (int s = 0; s < growth.n_steps; ++s) {
        const int z = state.phases.at(r, s);
        if (variant.is_dynamic(z)) continue;
        const auto ki = static_cast<size_t>(growth.dow(s) - 1);
        const double resid = growth.delta(r, s) - state.daily.mean[ki];
        stats[ki].n += 1.0;
        stats[ki].sum2 += resid * resid;
      }
    }
    for (int k = 0; k < 7; ++k) {
      const auto ki = static_cast<size_t>(k);
      const double dof = hyper.daily_var_dof[ki] + stats[ki].n;
      const double scale =
          (hyper.daily_var_dof[ki] * hyper.daily_var_scale[ki] + stats[ki].sum2) / dof;
      state.daily.var[ki] = inv_chi2_sample(rng, dof, scale);
    }
    return;
  }
  // Pooled variance: one scaled-inverse-chi-squared draw shared by all slots.
  CellStats pooled;
  for (int r = 0; r < growth.n_regions; ++r) {
    for (int s = 0; s < growth.n_steps; ++s) {
      if (variant.is_dynamic(state.phases.at(r, s))) continue;
      const double resid = growth.delta(r, s);
      pooled.n += 1.0;
      pooled.sum2 += resid * resid;
    }
  }
  const double dof = hyper.static_var_dof + pooled.n;
  const double scale =
      (hyper.static_var_dof * hyper.static_var_scale + pooled.sum2) / dof;
  state.daily.var.fill(inv_chi2_sample(rng, dof, scale));
}

// --- interaction-weight sweeps ----------------------------------------------------------

namespace detail {

namespace {

struct ContextLess {
  bool operator()(const PhaseContextTally::Context& a,
                  const PhaseContextTally::Context& b) const {
    return std::tie(a.zprev, a.znext, a.zown, a.ncount) <
           std::tie(b.zprev, b.znext, b.zown, b.ncount);
  }
};

}  // namespace

PhaseContextTally PhaseContextTally::build(const PhaseGrid& z, const RegionGraph& graph,
                                           const ModelVariant& variant) {
  std::map<Context, int, ContextLess> grouped;
  const int S = z.n_steps;
  for (int r = 0; r < z.n_regions; ++r) {
    for (int s = 0; s < S; ++s) {
      Context c;
      c.zprev = s > 0 ? static_cast<std::int8_t>(z.at(r, s - 1)) : std::int8_t{-1};
      c.znext = s + 1 < S ? static_cast<std::int8_t>(z.at(r, s + 1)) : std::int8_t{-1};
      c.zown = static_cast<std::int8_t>(z.at(r, s));
      if (variant.spatial) {
        for (int j : graph.neighbors[static_cast<size_t>(r)])
          ++c.ncount[static_cast<size_t>(z.at(j, s))];
      }
      ++grouped[c];
    }
  }
  PhaseContextTally t;
  t.phases = variant.phases;
  t.contexts.reserve(grouped.size());
  t.multiplicity.reserve(grouped.size());
  for (const auto& [ctx, n] : grouped) {
    t.contexts.push_back(ctx);
    t.multiplicity.push_back(n);
  }
  return t;
}

double PhaseContextTally::pseudo_log_likelihood(const TransitionField& field) const {
  const int P = phases;
  double total = 0.0;
  double score[kMaxPhases];
  for (size_t i = 0; i < contexts.size(); ++i) {
    const Context& c = contexts[i];
    double mx = -std::numeric_limits<double>::infinity();
    for (int cand = 0; cand < P; ++cand) {
      double v = 0.0;
      if (c.zprev >= 0) v += field.temporal.at(c.zprev, cand);
      if (c.znext >= 0) v += field.temporal.at(cand, c.znext);
      for (int p = 0; p < P; ++p)
        if (c.ncount[static_cast<size_t>(p)] != 0)
          v += c.ncount[static_cast<size_t>(p)] * field.spatial.at(p, cand);
      score[cand] = v;
      mx = std::max(mx, v);
    }
    double norm = 0.0;
    for (int cand = 0; cand < P; ++cand) norm += std::exp(score[cand] - mx);
    total += multiplicity[i] * (score[c.zown] - mx - std::log(norm));
  }
  return total;
}

bool mh_update_entry(TransitionField& field, bool temporal, int a, int b,
                     const PhaseContextTally& tally, const HyperPriors& hyper,
                     double step, Rng& rng, double& cur_pl) {
  PhaseMatrix& mat = temporal ? field.temporal : field.spatial;
  const double prior_var = temporal ? hyper.transition_var : hyper.spatial_var;
  const double old_value = mat.at(a, b);
  const double proposal = old_value + step * draw_normal(rng, 0.0, 1.0);
  const double u = uniform01(rng);
  mat.at(a, b) = proposal;
  const double new_pl = tally.pseudo_log_likelihood(field);
  const double log_alpha = new_pl - cur_pl +
                           normal_logpdf(proposal, 0.0, prior_var) -
                           normal_logpdf(old_value, 0.0, prior_var);
  if (std::log(u) < log_alpha) {
    cur_pl = new_pl;
    return true;
  }
  mat.at(a, b) = old_value;
  return false;
}

}  // namespace detail

void sweep_transition_fields(ModelState& state, const RegionGraph& graph,
                             const HyperPriors& hyper, const ModelVariant& variant,
                             double step_temporal, double step_spatial,
                             Rng& rng, AcceptanceStats& stats) {
  const auto tally = detail::PhaseContextTally::build(state.phases, graph, variant);
  double cur_pl = tally.pseudo_log_likelihood(state.trans);
  const int P = variant.phases;
  for (int a = 0; a < P; ++a) {
    for (int b = 0; b < P; ++b) {
      ++stats.temporal_attempted;
      if (detail::mh_update_entry(state.trans, true, a, b, tally, hyper,
                                  step_temporal, rng, cur_pl))
        ++stats.temporal_accepted;
    }
  }
  for (int a = 0; a < P; ++a) {
    for (int b = 0; b < P; ++b) {
      ++stats.spatial_attempted;
      if (detail::mh_update_entry(state.trans, false, a, b, tally, hyper,
                                  step_spatial, rng, cur_pl))
        ++stats.spatial_accepted;
    }
  }
}

// --- epidemic dynamics sweeps --------------------------------------------------------------

void sweep_epidemic_variance(ModelState& state, const GrowthSeries& growth,
                             const HyperPriors& hyper, const ModelVariant& variant,
                             Rng& rng) {
  for (int z = 0; z < variant.phases; ++z) {
    if (!variant.is_dynamic(z)) continue;
    const auto zi = static_cast<size_t>(z);
    CellStats st;
    for (int r = 0; r < growth.n_regions; ++r) {
      for (int s = 0; s < growth.n_steps; ++s) {
        if (state.phases.at(r, s) != z) continue;
        const double resid = growth.delta(r, s) - state.dyn.drift[zi] -
                             state.daily.mean[static_cast<size_t>(growth.dow(s) - 1)];
        st.n += 1.0;
        st.sum2 += resid * resid;
      }
    }
    const double dof = hyper.epidemic_var_dof[zi] + st.n;
    const double scale =
        (hyper.epidemic_var_dof[zi] * hyper.epidemic_var_scale[zi] + st.sum2) / dof;
    state.dyn.var[zi] = inv_chi2_sample(rng, dof, scale);
  }
}

void sweep_drift(ModelState& state, const GrowthSeries& growth,
                 const ModelVariant& variant, Rng& rng) {
  for (int z = 0; z < variant.phases; ++z) {
    if (!variant.is_dynamic(z)) continue;
    const auto zi = static_cast<size_t>(z);
    const double lo = variant.drift_lo(z);
    const double hi = variant.drift_hi(z);
    double prec = 0.0;
    double weighted = 0.0;
    for (int r = 0; r < growth.n_regions; ++r) {
      for (int s = 0; s < growth.n_steps; ++s) {
        if (state.phases.at(r, s) != z) continue;
        const auto ki = static_cast<size_t>(growth.dow(s) - 1);
        const double w = 1.0 / (state.dyn.var[zi] + state.daily.var[ki]);
        prec += w;
        weighted += w * (growth.delta(r, s) - state.daily.mean[ki]);
      }
    }
    if (prec <= 0.0) {
      // No cells in this phase: draw from the flat prior.
      state.dyn.drift[zi] = lo + uniform01(rng) * (hi - lo);
      if (state.dyn.drift[zi] <= lo) state.dyn.drift[zi] = std::nextafter(lo, hi);
      if (state.dyn.drift[zi] >= hi) state.dyn.drift[zi] = std::nextafter(hi, lo);
      continue;
    }
    state.dyn.drift[zi] =
        trunc_normal_sample(rng, weighted / prec, std::sqrt(1.0 / prec), lo, hi);
  }
}

// --- full chain ----------------------------------------------------------------------------

namespace {

ModelState prepare_warm_start(const ModelState& warm, const GrowthSeries& growth,
                              const ModelVariant& variant) {
  ModelState state = warm;
  if (state.phases.n_regions != growth.n_regions)
    throw ValidationError("warm start region count mismatch");
  if (state.phases.n_steps > growth.n_steps)
    throw ValidationError("warm start has more steps than the data");
  if (state.phases.n_steps < growth.n_steps) {
    PhaseGrid extended = PhaseGrid::filled(growth.n_regions, growth.n_steps, kNe);
    for (int r = 0; r < growth.n_regions; ++r) {
      for (int s = 0; s < growth.n_steps; ++s) {
        const int src = std::min(s, state.phases.n_steps - 1);
        extended.set(r, s, state.phases.at(r, src));
      }
    }
    state.phases = extended;
  }
  state.validate(variant);
  return state;
}

}  // namespace

ChainTrace run_chain_on_growth(const GrowthSeries& growth, const RegionGraph& graph,
                               const HyperPriors& hyper, const ModelVariant& variant,
                               const ChainConfig& config,
                               const std::optional<ModelState>& warm_start) {
  growth.validate();
  graph.validate();
  hyper.validate();
  variant.validate();
  config.validate();
  if (graph.n_regions != growth.n_regions)
    throw ValidationError("graph and growth disagree on the number of regions");

  ChainTrace trace;
  trace.variant = variant;
  trace.config = config;
  trace.samples.reserve(static_cast<size_t>(config.retained()));
  trace.log_density.reserve(static_cast<size_t>(config.iterations));

  ModelState state =
      warm_start.has_value()
          ? prepare_warm_start(*warm_start, growth, variant)
          : init_state(growth, graph, hyper, variant, mix_seed(config.seed, 0));
  Rng rng(mix_seed(config.seed, 1));
  double step_t = config.step_temporal;
  double step_s = config.step_spatial;

  for (int iter = 0; iter < config.iterations; ++iter) {
    const bool warm_phase = iter < config.burn_in;
    sweep_phases(state, growth, graph, variant, rng);
    if (variant.daily_effect) sweep_daily_mean(state, growth, hyper, variant, rng);
    sweep_daily_variance(state, growth, hyper, variant, rng);
    AcceptanceStats sweep_stats;
    sweep_transition_fields(state, graph, hyper, variant, step_t, step_s, rng,
                            sweep_stats);
    sweep_epidemic_variance(state, growth, hyper, variant, rng);
    sweep_drift(state, growth, variant, rng);

    trace.accept_all.add(sweep_stats);
    if (!warm_phase) trace.accept_post.add(sweep_stats);
    if (config.adapt && warm_phase) {
      // Robbins-Monro drift of the log step toward the target acceptance.
      const double gain = 1.0 / std::pow(iter + 1.0, 0.6);
      step_t = std::clamp(
          step_t * std::exp(gain * (sweep_stats.temporal_rate() - kTargetAcceptance)),
          kMinStep, kMaxStep);
      step_s = std::clamp(
          step_s * std::exp(gain * (sweep_stats.spatial_rate() - kTargetAcceptance)),
          kMinStep, kMaxStep);
    }
    trace.log_density.push_back(
        joint_log_density(state, growth, graph, hyper, variant));
    if (!warm_phase && (iter - config.burn_in) % config.thinning == 0)
      trace.samples.push_back(state);
  }
  trace.final_state = state;
  trace.final_step_temporal = step_t;
  trace.final_step_spatial = step_s;
  return trace;
}

ChainTrace run_chain(const ObservationPanel& panel, const RegionGraph& graph,
                     const HyperPriors& hyper, const ModelVariant& variant,
                     const ChainConfig& config) {
  return run_chain_on_growth(compute_growth(panel), graph, hyper, variant, config);
}

// --- summaries -------------------------------------------------------------------------------

namespace {

PosteriorSummary::Param make_param(const std::string& name, std::vector<double>& draws) {
  PosteriorSummary::Param p;
  p.name = name;
  const auto n = draws.size();
  double mean = 0.0;
  for (double v : draws) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : draws) var += (v - mean) * (v - mean);
  var = n > 1 ? var / static_cast<double>(n - 1) : 0.0;
  std::sort(draws.begin(), draws.end());
  auto quantile = [&](double q) {
    const double h = q * static_cast<double>(n - 1);
    const auto lo = static_cast<size_t>(h);
    const size_t hi = std::min(lo + 1, n - 1);
    const double w = h - static_cast<double>(lo);
    return draws[lo] * (1.0 - w) + draws[hi] * w;
  };
  p.mean = mean;
  p.sd = std::sqrt(var);
  p.lo = quantile(0.025);
  p.hi = quantile(0.975);
  return p;
}

}  // namespace

PosteriorSummary summarize(const ChainTrace& trace) {
  if (trace.samples.empty())
    throw ValidationError("cannot summarise an empty trace");
  const ModelVariant& variant = trace.variant;
  const int P = variant.phases;
  const auto n = trace.samples.size();
  const PhaseGrid& grid0 = trace.samples.front().phases;

  PosteriorSummary out;
  out.n_regions = grid0.n_regions;
  out.n_steps = grid0.n_steps;
  out.phases = P;

  std::vector<double> draws(n);
  auto collect = [&](const std::string& name, auto getter) {
    for (size_t i = 0; i < n; ++i) draws[i] = getter(trace.samples[i]);
    out.params.push_back(make_param(name, draws));
  };

  if (variant.daily_effect) {
    for (int k = 1; k <= 7; ++k) {
      collect("daily_mean_" + std::to_string(k),
              [k](const ModelState& s) { return s.daily.mean[static_cast<size_t>(k - 1)]; });
    }
    for (int k = 1; k <= 7; ++k) {
      collect("daily_var_" + std::to_string(k),
              [k](const ModelState& s) { return s.daily.var[static_cast<size_t>(k - 1)]; });
    }
  } else {
    collect("pooled_var", [](const ModelState& s) { return s.daily.var[0]; });
  }
  for (int z = 0; z < P; ++z) {
    if (!variant.is_dynamic(z)) continue;
    const std::string zn = variant.phase_name(z);
    collect("drift_" + zn,
            [z](const ModelState& s) { return s.dyn.drift[static_cast<size_t>(z)]; });
    collect("epidemic_var_" + zn,
            [z](const ModelState& s) { return s.dyn.var[static_cast<size_t>(z)]; });
  }
  for (int a = 0; a < P; ++a) {
    for (int b = 0; b < P; ++b) {
      const std::string ab =
          std::string(variant.phase_name(a)) + "_" + variant.phase_name(b);
      collect("temporal_" + ab,
              [a, b](const ModelState& s) { return s.trans.temporal.at(a, b); });
    }
  }
  for (int a = 0; a < P; ++a) {
    for (int b = 0; b < P; ++b) {
      const std::string ab =
          std::string(variant.phase_name(a)) + "_" + variant.phase_name(b);
      collect("spatial_" + ab,
              [a, b](const ModelState& s) { return s.trans.spatial.at(a, b); });
    }
  }

  out.phase_marginals.assign(static_cast<size_t>(out.n_regions) *
                                 static_cast<size_t>(out.n_steps) * static_cast<size_t>(P),
                             0.0);
  for (const ModelState& s : trace.samples) {
    for (int r = 0; r < out.n_regions; ++r)
      for (int t = 0; t < out.n_steps; ++t)
        out.phase_marginals[(static_cast<size_t>(r) * static_cast<size_t>(out.n_steps) +
                             static_cast<size_t>(t)) * static_cast<size_t>(P) +
                            static_cast<size_t>(s.phases.at(r, t))] += 1.0;
  }
  for (double& v : out.phase_marginals) v /= static_cast<double>(n);
  return out;
}

const PosteriorSummary::Param& PosteriorSummary::find(const std::string& name) const {
  for (const auto& p : params)
    if (p.name == name) return p;
  throw ValidationError("no posterior parameter named '" + name + "'");
}

double PosteriorSummary::marginal(int r, int s, int z) const {
  return phase_marginals[(static_cast<size_t>(r) * static_cast<size_t>(n_steps) +
                          static_cast<size_t>(s)) * static_cast<size_t>(phases) +
                         static_cast<size_t>(z)];
}

int PosteriorSummary::map_phase(int r, int s) const {
  int best = 0;
  for (int z = 1; z < phases; ++z)
    if (marginal(r, s, z) > marginal(r, s, best)) best = z;
  return best;
}

// --- diagnostics ------------------------------------------------------------------------------

ChainDiagnostics chain_diagnostics(const ChainTrace& trace) {
  if (trace.log_density.empty())
    throw ValidationError("cannot diagnose an empty trace");
  const auto& ld = trace.log_density;
  const size_t start = std::min(static_cast<size_t>(trace.config.burn_in), ld.size() - 1);
  const size_t n = ld.size() - start;

  ChainDiagnostics diag;
  diag.acceptance_temporal = trace.accept_post.temporal_rate();
  diag.acceptance_spatial = trace.accept_post.spatial_rate();

  double mean = 0.0;
  for (size_t i = start; i < ld.size(); ++i) mean += ld[i];
  mean /= static_cast<double>(n);
  double c0 = 0.0;
  for (size_t i = start; i < ld.size(); ++i) c0 += (ld[i] - mean) * (ld[i] - mean);
  c0 /= static_cast<double>(n);
  if (c0 <= 0.0 || n < 3) {
    diag.ess_log_density = static_cast<double>(n);
  } else {
    double acf_sum = 0.0;
    for (size_t k = 1; k < n; ++k) {
      double ck = 0.0;
      for (size_t i = start; i + k < ld.size(); ++i)
        ck += (ld[i] - mean) * (ld[i + k] - mean);
      ck /= static_cast<double>(n);
      const double rho = ck / c0;
      if (rho <= 0.0) break;
      acf_sum += rho;
    }
    diag.ess_log_density = static_cast<double>(n) / (1.0 + 2.0 * acf_sum);
  }

  if (!trace.config.adapt && trace.accept_post.temporal_attempted > 0) {
    if (diag.acceptance_temporal < 0.15 || diag.acceptance_temporal > 0.6)
      diag.flags.push_back("temporal proposal acceptance outside [0.15, 0.6]");
    if (diag.acceptance_spatial < 0.15 || diag.acceptance_spatial > 0.6)
      diag.flags.push_back("spatial proposal acceptance outside [0.15, 0.6]");
  }
  return diag;
}

}  // namespace flumn
