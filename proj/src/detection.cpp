#include "flumn/detection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "flumn/model.hpp"

namespace flumn {

namespace {

// Re-anchors the transition weights to non-epidemic persistence: MH sweeps
// against the pseudo-likelihood of an all-NE reference field of the data's
// width raise NE self-persistence and lower NE exits in proportion to the
// available evidence.  Only the NE row is copied back (persistence and
// exits); returns into NE and the wave structure learned from real data
// keep their incoming values, so established epidemic runs can still
// dissolve back to NE and re-form under the day's own sweeps.
void anchor_transition_weights(ModelState& state, int n_steps, const RegionGraph& graph,
                               const HyperPriors& hyper, const ModelVariant& variant,
                               const ChainConfig& chain, int sweeps, Rng& rng) {
  ModelState temp = state;
  temp.phases = PhaseGrid::filled(state.phases.n_regions, n_steps, kNe);
  AcceptanceStats stats;
  for (int k = 0; k < sweeps; ++k)
    sweep_transition_fields(temp, graph, hyper, variant, chain.step_temporal,
                            chain.step_spatial, rng, stats);
  for (int z = 0; z < variant.phases; ++z) {
    state.trans.temporal.at(kNe, z) = temp.trans.temporal.at(kNe, z);
    state.trans.spatial.at(kNe, z) = temp.trans.spatial.at(kNe, z);
  }
}

}  // namespace

int canonical_phase(const PhaseGrid& z, const ModelVariant& variant, int r, int s) {
  const int ph = z.at(r, s);
  if (variant.phases < 4 || ph != kSe) return ph;
  int t = s;
  while (t > 0 && z.at(r, t - 1) == kSe) --t;
  if (t == 0 || z.at(r, t - 1) != kRe) return kNe;
  return kSe;
}

void DetectorConfig::validate() const {
  if (sweeps < 1) throw ValidationError("detector needs at least one retained sweep");
  if (warm_up < 0) throw ValidationError("detector warm-up must be non-negative");
  if (!(threshold > 0.0) || !(threshold < 1.0))
    throw ValidationError("alarm threshold must lie strictly inside (0, 1)");
  if (peak_window < 1 || peak_window % 2 == 0)
    throw ValidationError("peak window must be odd and positive");
  if (!(growth_floor > 0.0))
    throw ValidationError("growth floor must be positive");
  if (anchor_sweeps < 0)
    throw ValidationError("anchor sweep count must be non-negative");
  if (!(anchor_weight >= 0.0))
    throw ValidationError("anchor weight must be non-negative");
}

ChainConfig DetectorConfig::chain_config(std::uint64_t seed) const {
  ChainConfig c;
  c.iterations = warm_up + sweeps;
  c.burn_in = warm_up;
  c.thinning = 1;
  c.seed = seed;
  c.adapt = adapt;
  return c;
}

DayFilterResult filter_day(const ObservationPanel& panel, const RegionGraph& graph,
                           const HyperPriors& hyper, const ModelVariant& variant,
                           const DetectorConfig& config, int day, std::uint64_t seed,
                           const ModelState* warm) {
  panel.validate();
  config.validate();
  if (day < 1 || day >= panel.n_days())
    throw ValidationError("filter day must lie in [1, n_days)");

  const ObservationPanel head = panel.prefix(day + 1);
  const GrowthSeries growth = compute_growth(head, config.growth_floor);
  const ChainConfig chain = config.chain_config(seed);
  std::optional<ModelState> start;
  if (warm != nullptr)
    start = *warm;
  else
    start = init_state(growth, graph, hyper, variant, mix_seed(seed, 0));
  if (config.anchor_sweeps > 0) {
    Rng anchor_rng(mix_seed(seed, 0x616e63686fULL));
    anchor_transition_weights(*start, growth.n_steps, graph, hyper, variant, chain,
                              config.anchor_sweeps, anchor_rng);
  }
  const ChainTrace trace = run_chain_on_growth(growth, graph, hyper, variant, chain, start);

  const int P = variant.phases;
  const int last = growth.n_steps - 1;
  DayFilterResult out;
  out.day = day;
  out.phase_dist.assign(static_cast<size_t>(panel.n_regions()), {});
  out.epidemic_prob.assign(static_cast<size_t>(panel.n_regions()), 0.0);
  out.map_phase.assign(static_cast<size_t>(panel.n_regions()), 0);
  for (const ModelState& s : trace.samples)
    for (int r = 0; r < panel.n_regions(); ++r) {
      const int ph = canonical_phase(s.phases, variant, r, last);
      out.phase_dist[static_cast<size_t>(r)][static_cast<size_t>(ph)] += 1.0;
    }
  const double inv = 1.0 / static_cast<double>(trace.samples.size());
  // Weight of the all-NE initial state, vanishing as growth columns accrue.
  const double w = config.anchor_weight / (config.anchor_weight + static_cast<double>(day));
  for (int r = 0; r < panel.n_regions(); ++r) {
    auto& dist = out.phase_dist[static_cast<size_t>(r)];
    for (int c = 0; c < P; ++c) dist[static_cast<size_t>(c)] *= inv * (1.0 - w);
    dist[static_cast<size_t>(kNe)] += w;
    out.epidemic_prob[static_cast<size_t>(r)] =
        std::max(0.0, 1.0 - dist[static_cast<size_t>(kNe)]);
    int best = 0;
    for (int c = 1; c < P; ++c)
      if (dist[static_cast<size_t>(c)] > dist[static_cast<size_t>(best)]) best = c;
    out.map_phase[static_cast<size_t>(r)] = best;
  }
  out.final_state = trace.final_state;
  return out;
}

DetectionScan alarm_scan(const ObservationPanel& panel, const RegionGraph& graph,
                         const HyperPriors& hyper, const ModelVariant& variant,
                         const DetectorConfig& config, std::uint64_t seed) {
  panel.validate();
  config.validate();
  if (panel.n_days() < 2)
    throw ValidationError("alarm scan needs at least two days of counts");
  const int R = panel.n_regions();
  const int T = panel.n_days();

  DetectionScan scan;
  scan.first_day = 1;
  scan.epidemic_prob.assign(static_cast<size_t>(R),
                            std::vector<double>(static_cast<size_t>(T - 1), 0.0));
  scan.phase_dist.assign(
      static_cast<size_t>(R),
      std::vector<std::array<double, kMaxPhases>>(static_cast<size_t>(T - 1)));

  ModelState carry;
  const ModelState* warm = nullptr;
  for (int day = 1; day < T; ++day) {
    DayFilterResult res = filter_day(panel, graph, hyper, variant, config, day,
                                     mix_seed(seed, static_cast<std::uint64_t>(day)),
                                     warm);
    for (int r = 0; r < R; ++r) {
      scan.epidemic_prob[static_cast<size_t>(r)][static_cast<size_t>(day - 1)] =
          res.epidemic_prob[static_cast<size_t>(r)];
      scan.phase_dist[static_cast<size_t>(r)][static_cast<size_t>(day - 1)] =
          res.phase_dist[static_cast<size_t>(r)];
    }
    carry = res.final_state;
    warm = &carry;
  }

  for (int r = 0; r < R; ++r) {
    AlarmRecord rec;
    rec.region = r;
    std::vector<double> series(static_cast<size_t>(T));
    for (int t = 0; t < T; ++t)
      series[static_cast<size_t>(t)] = static_cast<double>(panel.count(r, t));
    rec.peak_day = find_peak(series, config.peak_window);
    for (int day = 1; day < T; ++day) {
      if (scan.epidemic_prob[static_cast<size_t>(r)][static_cast<size_t>(day - 1)] >
          config.threshold) {
        rec.alarm_day = day;
        rec.lead_days = day - rec.peak_day;
        break;
      }
    }
    scan.alarms.push_back(rec);
  }
  return scan;
}

int find_peak(std::span<const double> series, int window) {
  if (series.empty()) throw ValidationError("peak search needs a non-empty series");
  if (window < 1 || window % 2 == 0)
    throw ValidationError("peak window must be odd and positive");
  if (window > static_cast<int>(series.size()))
    throw ValidationError("peak window exceeds the series length");
  const int n = static_cast<int>(series.size());
  const int half = window / 2;
  int best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - half);
    const int hi = std::min(n - 1, i + half);
    double acc = 0.0;
    for (int j = lo; j <= hi; ++j) acc += series[static_cast<size_t>(j)];
    const double avg = acc / static_cast<double>(hi - lo + 1);
    if (avg > best_value) {
      best_value = avg;
      best = i;
    }
  }
  return best;
}

int find_peak_counts(std::span<const std::int64_t> series, int window) {
  std::vector<double> values(series.begin(), series.end());
  return find_peak(values, window);
}

std::vector<AlarmRecord> average_baseline(const ObservationPanel& panel,
                                          const ObservationPanel& reference,
                                          int peak_window) {
  panel.validate();
  reference.validate();
  if (reference.n_days() < 28)
    throw ValidationError("baseline reference needs at least 28 days");
  if (reference.regions != panel.regions)
    throw ValidationError("baseline reference must cover the same regions");

  std::vector<AlarmRecord> out;
  for (int r = 0; r < panel.n_regions(); ++r) {
    double mean = 0.0;
    for (int t = 0; t < reference.n_days(); ++t)
      mean += static_cast<double>(reference.count(r, t));
    mean /= static_cast<double>(reference.n_days());

    AlarmRecord rec;
    rec.region = r;
    std::vector<double> series(static_cast<size_t>(panel.n_days()));
    for (int t = 0; t < panel.n_days(); ++t)
      series[static_cast<size_t>(t)] = static_cast<double>(panel.count(r, t));
    rec.peak_day = find_peak(series, peak_window);
    for (int t = 0; t < panel.n_days(); ++t) {
      if (static_cast<double>(panel.count(r, t)) > mean) {
        rec.alarm_day = t;
        rec.lead_days = t - rec.peak_day;
        break;
      }
    }
    out.push_back(rec);
  }
  return out;
}

}  // namespace flumn
