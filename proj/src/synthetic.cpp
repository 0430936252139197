#include "flumn/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <span>

#include "flumn/detection.hpp"
#include "flumn/distributions.hpp"
#include "flumn/model.hpp"

namespace flumn {

namespace {

constexpr double kMaxCount = 4.5e15;  // keeps round-tripping in exact int64 range

int wave_phase(const WaveSpec& wave, int region, int step) {
  const int onset = wave.onset[static_cast<size_t>(region)];
  if (step < onset) return kNe;
  int pos = step - onset;
  if (wave.period > 0) pos %= wave.period;
  if (pos < wave.dwell_re) return kRe;
  pos -= wave.dwell_re;
  if (pos < wave.dwell_se) return kSe;
  pos -= wave.dwell_se;
  if (pos < wave.dwell_de) return kDe;
  return kNe;
}

PhaseGrid draw_phase_lattice(const ScenarioSpec& spec, int n_steps, Rng& rng) {
  PhaseGrid grid = PhaseGrid::filled(spec.n_regions, n_steps, kNe);
  if (spec.mode == ScenarioSpec::PhaseMode::Wave) {
    for (int r = 0; r < spec.n_regions; ++r)
      for (int s = 0; s < n_steps; ++s) grid.set(r, s, wave_phase(spec.wave, r, s));
    return grid;
  }
  // Field mode: a few systematic conditional sweeps through the interaction
  // field (no emissions) -- an approximate draw from the lattice prior.
  const int P = spec.variant.phases;
  double logits[kMaxPhases];
  double probs[kMaxPhases];
  for (int sweep = 0; sweep < spec.field_sweeps; ++sweep) {
    for (int r = 0; r < spec.n_regions; ++r) {
      for (int s = 0; s < n_steps; ++s) {
        phase_logits(grid, spec.graph, spec.trans, spec.variant, r, s, logits);
        const double lse =
            log_sum_exp(std::span<const double>(logits, static_cast<size_t>(P)));
        double acc = 0.0;
        const double u = uniform01(rng);
        int drawn = P - 1;
        for (int c = 0; c < P; ++c) {
          probs[c] = std::exp(logits[c] - lse);
          acc += probs[c];
          if (u < acc) {
            drawn = c;
            break;
          }
        }
        grid.set(r, s, drawn);
      }
    }
  }
  return grid;
}

}  // namespace

void ScenarioSpec::validate() const {
  variant.validate();
  if (n_regions < 1) throw ValidationError("scenario needs at least one region");
  if (n_days < 2) throw ValidationError("scenario needs at least two days");
  graph.validate();
  if (graph.n_regions != n_regions)
    throw ValidationError("scenario graph region count mismatch");
  if (static_cast<int>(initial_counts.size()) != n_regions)
    throw ValidationError("scenario needs one initial count per region");
  for (auto c : initial_counts)
    if (c < 0) throw ValidationError("initial counts must be non-negative");
  for (int k = 0; k < 7; ++k)
    if (!(daily.var[static_cast<size_t>(k)] > 0.0))
      throw ValidationError("scenario daily variances must be positive");
  for (int z = 0; z < variant.phases; ++z) {
    if (!variant.is_dynamic(z)) continue;
    const auto zi = static_cast<size_t>(z);
    if (!(dyn.var[zi] > 0.0))
      throw ValidationError("scenario dynamic variances must be positive");
    if (!(dyn.drift[zi] > variant.drift_lo(z)) || !(dyn.drift[zi] < variant.drift_hi(z)))
      throw ValidationError("scenario drift outside its support");
  }
  if (mode == PhaseMode::Field) {
    if (field_sweeps < 1) throw ValidationError("field mode needs at least one sweep");
  } else {
    if (static_cast<int>(wave.onset.size()) != n_regions)
      throw ValidationError("wave mode needs one onset per region");
    if (wave.dwell_re < 1 || wave.dwell_se < 0 || wave.dwell_de < 1)
      throw ValidationError("wave dwells out of range");
    if (wave.period != 0 &&
        wave.period < wave.dwell_re + wave.dwell_se + wave.dwell_de)
      throw ValidationError("wave period shorter than the wave itself");
  }
}

SyntheticData generate_panel(const ScenarioSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const int n_steps = spec.n_days - 1;

  SyntheticData out;
  out.phases = draw_phase_lattice(spec, n_steps, rng);

  out.growth.n_regions = spec.n_regions;
  out.growth.n_steps = n_steps;
  out.growth.deltas.resize(static_cast<size_t>(spec.n_regions) *
                           static_cast<size_t>(n_steps));
  out.growth.day_of_week.resize(static_cast<size_t>(n_steps));
  for (int s = 0; s < n_steps; ++s)
    out.growth.day_of_week[static_cast<size_t>(s)] =
        spec.start_date.plus_days(s + 1).day_of_week();

  for (int r = 0; r < spec.n_regions; ++r) {
    for (int s = 0; s < n_steps; ++s) {
      const int z = out.phases.at(r, s);
      const int k = out.growth.dow(s);
      const double m = emission_mean(z, k, spec.daily, spec.dyn, spec.variant);
      const double v = emission_var(z, k, spec.daily, spec.dyn, spec.variant);
      out.growth.delta(r, s) =
          std::normal_distribution<double>(m, std::sqrt(v))(rng);
    }
  }

  out.panel.regions.reserve(static_cast<size_t>(spec.n_regions));
  for (int r = 0; r < spec.n_regions; ++r)
    out.panel.regions.push_back("R" + std::to_string(r + 1));
  out.panel.start_date = spec.start_date;
  out.panel.counts.assign(static_cast<size_t>(spec.n_regions) *
                              static_cast<size_t>(spec.n_days),
                          0);
  for (int r = 0; r < spec.n_regions; ++r) {
    out.panel.count(r, 0) = spec.initial_counts[static_cast<size_t>(r)];
    for (int s = 0; s < n_steps; ++s) {
      const double prev = static_cast<double>(out.panel.count(r, s));
      double next = prev * (1.0 + out.growth.delta(r, s));
      next = std::clamp(next, 0.0, kMaxCount);
      out.panel.count(r, s + 1) = static_cast<std::int64_t>(std::llround(next));
    }
  }
  out.panel.validate();
  return out;
}

std::vector<double> brute_force_posterior(const GrowthSeries& growth,
                                          const RegionGraph& graph,
                                          const TransitionField& field,
                                          const DailyEffect& daily,
                                          const EpidemicDynamics& dyn,
                                          const ModelVariant& variant) {
  growth.validate();
  graph.validate();
  variant.validate();
  if (graph.n_regions != growth.n_regions)
    throw ValidationError("graph and growth disagree on the number of regions");
  const int P = variant.phases;
  const long long cells =
      static_cast<long long>(growth.n_regions) * growth.n_steps;
  double states_d = std::pow(static_cast<double>(P), static_cast<double>(cells));
  if (states_d > 65536.0)
    throw ValidationError("exhaustive enumeration limited to 65536 configurations");
  const long long n_states = static_cast<long long>(std::llround(states_d));

  // Emission terms are constant per (cell, label); precompute.
  std::vector<double> emis(static_cast<size_t>(cells) * static_cast<size_t>(P));
  for (int r = 0; r < growth.n_regions; ++r)
    for (int s = 0; s < growth.n_steps; ++s)
      for (int c = 0; c < P; ++c)
        emis[(static_cast<size_t>(r) * static_cast<size_t>(growth.n_steps) +
              static_cast<size_t>(s)) * static_cast<size_t>(P) + static_cast<size_t>(c)] =
            emission_logpdf(growth.delta(r, s), c, growth.dow(s), daily, dyn, variant);

  PhaseGrid grid = PhaseGrid::filled(growth.n_regions, growth.n_steps, 0);
  std::vector<double> logw(static_cast<size_t>(n_states));
  std::vector<int> digits(static_cast<size_t>(cells), 0);
  for (long long st = 0; st < n_states; ++st) {
    for (long long c = 0, v = st; c < cells; ++c, v /= P)
      digits[static_cast<size_t>(c)] = static_cast<int>(v % P);
    double e = 0.0;
    for (int r = 0; r < growth.n_regions; ++r) {
      for (int s = 0; s < growth.n_steps; ++s) {
        const auto cell = static_cast<size_t>(r) * static_cast<size_t>(growth.n_steps) +
                          static_cast<size_t>(s);
        const int z = digits[cell];
        grid.set(r, s, z);
        e += emis[cell * static_cast<size_t>(P) + static_cast<size_t>(z)];
      }
    }
    e += phase_field_energy(grid, graph, field, variant);
    logw[static_cast<size_t>(st)] = e;
  }

  const double lse = log_sum_exp(logw);
  std::vector<double> marg(static_cast<size_t>(cells) * static_cast<size_t>(P), 0.0);
  for (long long st = 0; st < n_states; ++st) {
    const double w = std::exp(logw[static_cast<size_t>(st)] - lse);
    for (long long c = 0, v = st; c < cells; ++c, v /= P)
      marg[static_cast<size_t>(c) * static_cast<size_t>(P) +
           static_cast<size_t>(v % P)] += w;
  }
  return marg;
}

RecoveryReport recovery_report(const ScenarioSpec& scenario, int runs,
                               const HyperPriors& hyper, const ChainConfig& config) {
  scenario.validate();
  hyper.validate();
  config.validate();
  if (runs < 1) throw ValidationError("recovery study needs at least one run");

  const ModelVariant& variant = scenario.variant;
  struct Truth {
    std::string name;
    double value;
  };
  std::vector<Truth> truths;
  for (int z = 0; z < variant.phases; ++z) {
    if (!variant.is_dynamic(z)) continue;
    const std::string zn = variant.phase_name(z);
    truths.push_back({"drift_" + zn, scenario.dyn.drift[static_cast<size_t>(z)]});
    truths.push_back(
        {"epidemic_var_" + zn, scenario.dyn.var[static_cast<size_t>(z)]});
  }
  if (variant.daily_effect)
    for (int k = 1; k <= 7; ++k)
      truths.push_back({"daily_mean_" + std::to_string(k),
                        scenario.daily.mean[static_cast<size_t>(k - 1)]});

  RecoveryReport report;
  report.runs = runs;
  for (const auto& t : truths) report.coverage.push_back({t.name, t.value, 0});
  report.map_agreement.assign(static_cast<size_t>(runs), 0.0);
  report.acceptance_temporal.assign(static_cast<size_t>(runs), 0.0);
  report.acceptance_spatial.assign(static_cast<size_t>(runs), 0.0);

  std::vector<std::vector<char>> covered(
      static_cast<size_t>(runs), std::vector<char>(truths.size(), 0));

  parallel_for(runs, [&](int run) {
    ScenarioSpec local = scenario;
    local.seed = mix_seed(scenario.seed, static_cast<std::uint64_t>(run) + 1);
    const SyntheticData data = generate_panel(local);
    ChainConfig chain = config;
    chain.seed = mix_seed(config.seed, static_cast<std::uint64_t>(run) + 1000003);
    const ChainTrace trace =
        run_chain_on_growth(data.growth, local.graph, hyper, variant, chain);
    const PosteriorSummary summary = summarize(trace);
    for (size_t i = 0; i < truths.size(); ++i) {
      const auto& p = summary.find(truths[i].name);
      covered[static_cast<size_t>(run)][i] =
          (truths[i].value >= p.lo && truths[i].value <= p.hi) ? 1 : 0;
    }
    // Phase agreement is scored on canonical labels: NE and SE share one
    // emission law, so which calm label a sampled run carries is arbitrary
    // (label switching); the canonical readout makes the score invariant to
    // it.  Tallied per retained sample because the modal lattice of a
    // label-switching chain need not be a coherent labeling itself.
    const int n_cells = data.phases.n_regions * data.phases.n_steps;
    std::vector<std::array<int, kMaxPhases>> tally(
        static_cast<size_t>(n_cells), std::array<int, kMaxPhases>{});
    for (const ModelState& s : trace.samples)
      for (int r = 0; r < data.phases.n_regions; ++r)
        for (int t = 0; t < data.phases.n_steps; ++t)
          ++tally[static_cast<size_t>(r * data.phases.n_steps + t)]
                 [static_cast<size_t>(canonical_phase(s.phases, variant, r, t))];
    long long agree = 0;
    for (int r = 0; r < data.phases.n_regions; ++r)
      for (int t = 0; t < data.phases.n_steps; ++t) {
        const auto& cell = tally[static_cast<size_t>(r * data.phases.n_steps + t)];
        const int mode = static_cast<int>(
            std::max_element(cell.begin(), cell.begin() + variant.phases) -
            cell.begin());
        if (mode == canonical_phase(data.phases, variant, r, t)) ++agree;
      }
    report.map_agreement[static_cast<size_t>(run)] =
        static_cast<double>(agree) / static_cast<double>(n_cells);
    report.acceptance_temporal[static_cast<size_t>(run)] =
        trace.accept_post.temporal_rate();
    report.acceptance_spatial[static_cast<size_t>(run)] =
        trace.accept_post.spatial_rate();
  });

  for (size_t i = 0; i < truths.size(); ++i)
    for (int run = 0; run < runs; ++run)
      report.coverage[i].covered += covered[static_cast<size_t>(run)][i];
  double total = 0.0;
  for (double a : report.map_agreement) total += a;
  report.mean_map_agreement = total / static_cast<double>(runs);
  return report;
}

}  // namespace flumn
