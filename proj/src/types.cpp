#include "flumn/types.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "flumn/common.hpp"

namespace flumn {

// --- ModelVariant ------------------------------------------------------------

ModelVariant ModelVariant::flu_mn() { return ModelVariant{"flumn", 4, true, true}; }

ModelVariant ModelVariant::time_hmm() { return ModelVariant{"timehmm", 4, false, true}; }

ModelVariant ModelVariant::two_phase() { return ModelVariant{"twophase", 2, true, true}; }

ModelVariant ModelVariant::flu_mn_r() { return ModelVariant{"flumn-r", 4, true, false}; }

ModelVariant ModelVariant::from_name(const std::string& name) {
  if (name == "flumn") return flu_mn();
  if (name == "timehmm") return time_hmm();
  if (name == "twophase") return two_phase();
  if (name == "flumn-r") return flu_mn_r();
  throw ValidationError("unknown variant '" + name +
                        "' (expected flumn, timehmm, twophase or flumn-r)");
}

bool ModelVariant::is_dynamic(int z) const {
  if (z < 0 || z >= phases) throw ValidationError("phase label out of range");
  if (phases == 2) return z == 1;
  return z == kRe || z == kDe;
}

double ModelVariant::drift_lo(int z) const {
  if (!is_dynamic(z)) throw ValidationError("static phases have no drift");
  if (phases == 2) return -2.0;
  return z == kRe ? 0.0 : -2.0;
}

double ModelVariant::drift_hi(int z) const {
  if (!is_dynamic(z)) throw ValidationError("static phases have no drift");
  if (phases == 2) return 2.0;
  return z == kRe ? 2.0 : 0.0;
}

const char* ModelVariant::phase_name(int z) const {
  static constexpr const char* kFour[] = {"NE", "RE", "SE", "DE"};
  static constexpr const char* kTwo[] = {"NE", "E"};
  if (z < 0 || z >= phases) throw ValidationError("phase label out of range");
  return phases == 2 ? kTwo[z] : kFour[z];
}

void ModelVariant::validate() const {
  if (phases != 2 && phases != 4)
    throw ValidationError("variant must use 2 or 4 phases");
  if (name.empty()) throw ValidationError("variant needs a name");
}

// --- RegionGraph --------------------------------------------------------------

RegionGraph RegionGraph::edgeless(int n_regions) {
  if (n_regions < 1) throw ValidationError("graph needs at least one region");
  RegionGraph g;
  g.n_regions = n_regions;
  g.neighbors.assign(static_cast<size_t>(n_regions), {});
  return g;
}

RegionGraph RegionGraph::from_pairs(int n_regions,
                                    const std::vector<std::pair<int, int>>& edges) {
  RegionGraph g = edgeless(n_regions);
  std::set<std::pair<int, int>> seen;
  for (auto [a, b] : edges) {
    if (a < 0 || a >= n_regions || b < 0 || b >= n_regions)
      throw ValidationError("edge endpoint out of range");
    if (a == b) throw ValidationError("self-loops are not allowed");
    auto key = std::minmax(a, b);
    if (!seen.insert(key).second) throw ValidationError("duplicate edge");
    g.neighbors[static_cast<size_t>(a)].push_back(b);
    g.neighbors[static_cast<size_t>(b)].push_back(a);
  }
  for (auto& adj : g.neighbors) std::sort(adj.begin(), adj.end());
  return g;
}

std::vector<std::pair<int, int>> RegionGraph::edge_list() const {
  std::vector<std::pair<int, int>> out;
  for (int a = 0; a < n_regions; ++a)
    for (int b : neighbors[static_cast<size_t>(a)])
      if (a < b) out.emplace_back(a, b);
  return out;
}

void RegionGraph::validate() const {
  if (n_regions < 1) throw ValidationError("graph needs at least one region");
  if (static_cast<int>(neighbors.size()) != n_regions)
    throw ValidationError("graph adjacency size mismatch");
  for (int a = 0; a < n_regions; ++a) {
    const auto& adj = neighbors[static_cast<size_t>(a)];
    if (!std::is_sorted(adj.begin(), adj.end()) ||
        std::adjacent_find(adj.begin(), adj.end()) != adj.end())
      throw ValidationError("graph adjacency must be sorted and unique");
    for (int b : adj) {
      if (b < 0 || b >= n_regions || b == a)
        throw ValidationError("graph adjacency entry out of range");
      const auto& back = neighbors[static_cast<size_t>(b)];
      if (!std::binary_search(back.begin(), back.end(), a))
        throw ValidationError("graph adjacency must be symmetric");
    }
  }
}

// --- ObservationPanel -----------------------------------------------------------

std::int64_t ObservationPanel::count(int r, int t) const {
  return counts[static_cast<size_t>(r) * static_cast<size_t>(n_days()) + static_cast<size_t>(t)];
}

std::int64_t& ObservationPanel::count(int r, int t) {
  return counts[static_cast<size_t>(r) * static_cast<size_t>(n_days()) + static_cast<size_t>(t)];
}

ObservationPanel ObservationPanel::prefix(int days) const {
  if (days < 1 || days > n_days())
    throw ValidationError("panel prefix length out of range");
  ObservationPanel out;
  out.regions = regions;
  out.start_date = start_date;
  out.counts.reserve(static_cast<size_t>(n_regions()) * static_cast<size_t>(days));
  for (int r = 0; r < n_regions(); ++r)
    for (int t = 0; t < days; ++t) out.counts.push_back(count(r, t));
  return out;
}

void ObservationPanel::validate() const {
  if (regions.empty()) throw ValidationError("panel has no regions");
  std::set<std::string> names(regions.begin(), regions.end());
  if (names.size() != regions.size())
    throw ValidationError("panel region names must be unique");
  for (const auto& name : regions)
    if (name.empty()) throw ValidationError("panel region names must be non-empty");
  if (counts.size() % regions.size() != 0 || counts.empty())
    throw ValidationError("panel count matrix is ragged");
  for (std::int64_t c : counts)
    if (c < 0) throw ValidationError("panel counts must be non-negative");
}

// --- GrowthSeries ------------------------------------------------------------------

double GrowthSeries::delta(int r, int s) const {
  return deltas[static_cast<size_t>(r) * static_cast<size_t>(n_steps) + static_cast<size_t>(s)];
}

double& GrowthSeries::delta(int r, int s) {
  return deltas[static_cast<size_t>(r) * static_cast<size_t>(n_steps) + static_cast<size_t>(s)];
}

int GrowthSeries::dow(int s) const { return day_of_week[static_cast<size_t>(s)]; }

void GrowthSeries::validate() const {
  if (n_regions < 1 || n_steps < 1)
    throw ValidationError("growth series must be non-empty");
  if (deltas.size() != static_cast<size_t>(n_regions) * static_cast<size_t>(n_steps))
    throw ValidationError("growth series size mismatch");
  if (day_of_week.size() != static_cast<size_t>(n_steps))
    throw ValidationError("growth series day-of-week size mismatch");
  for (double d : deltas)
    if (!std::isfinite(d)) throw ValidationError("growth series must be finite");
  for (int k : day_of_week)
    if (k < 1 || k > 7) throw ValidationError("day-of-week slots must lie in 1..7");
}

// --- HyperPriors --------------------------------------------------------------------

HyperPriors HyperPriors::defaults() {
  HyperPriors h;
  // Mild weekly reporting pattern centred on zero: Sunday..Saturday.
  h.daily_mean_center = {-0.20, 0.55, 0.10, -0.05, 0.00, -0.10, -0.30};
  h.daily_mean_var.fill(1.0);
  h.daily_var_dof.fill(4.0);
  h.daily_var_scale.fill(0.05);
  h.transition_var = 10.0;
  h.spatial_var = 10.0;
  h.epidemic_var_dof.fill(4.0);
  h.epidemic_var_scale.fill(0.25);
  h.static_var_dof = 4.0;
  h.static_var_scale = 0.05;
  return h;
}

void HyperPriors::validate() const {
  for (double v : daily_mean_var)
    if (!(v > 0.0)) throw ValidationError("daily mean prior variances must be positive");
  for (double v : daily_mean_center)
    if (!std::isfinite(v)) throw ValidationError("daily mean prior centers must be finite");
  for (double v : daily_var_dof)
    if (!(v > 0.0)) throw ValidationError("daily variance prior dof must be positive");
  for (double v : daily_var_scale)
    if (!(v > 0.0)) throw ValidationError("daily variance prior scales must be positive");
  if (!(transition_var > 0.0) || !(spatial_var > 0.0))
    throw ValidationError("interaction prior variances must be positive");
  for (double v : epidemic_var_dof)
    if (!(v > 0.0)) throw ValidationError("epidemic variance prior dof must be positive");
  for (double v : epidemic_var_scale)
    if (!(v > 0.0)) throw ValidationError("epidemic variance prior scales must be positive");
  if (!(static_var_dof > 0.0) || !(static_var_scale > 0.0))
    throw ValidationError("pooled variance prior must be positive");
}

// --- PhaseGrid ----------------------------------------------------------------------

PhaseGrid PhaseGrid::filled(int n_regions, int n_steps, int phase) {
  if (n_regions < 1 || n_steps < 1)
    throw ValidationError("phase lattice must be non-empty");
  PhaseGrid g;
  g.n_regions = n_regions;
  g.n_steps = n_steps;
  g.z.assign(static_cast<size_t>(n_regions) * static_cast<size_t>(n_steps),
             static_cast<std::int8_t>(phase));
  return g;
}

int PhaseGrid::at(int r, int s) const {
  return z[static_cast<size_t>(r) * static_cast<size_t>(n_steps) + static_cast<size_t>(s)];
}

void PhaseGrid::set(int r, int s, int phase) {
  z[static_cast<size_t>(r) * static_cast<size_t>(n_steps) + static_cast<size_t>(s)] =
      static_cast<std::int8_t>(phase);
}

void PhaseGrid::validate(int phases) const {
  if (n_regions < 1 || n_steps < 1)
    throw ValidationError("phase lattice must be non-empty");
  if (z.size() != static_cast<size_t>(n_regions) * static_cast<size_t>(n_steps))
    throw ValidationError("phase lattice size mismatch");
  for (std::int8_t v : z)
    if (v < 0 || v >= phases) throw ValidationError("phase label out of range");
}

// --- ModelState ----------------------------------------------------------------------

void ModelState::validate(const ModelVariant& variant) const {
  variant.validate();
  phases.validate(variant.phases);
  for (int k = 0; k < 7; ++k) {
    if (!std::isfinite(daily.mean[static_cast<size_t>(k)]))
      throw ValidationError("daily means must be finite");
    if (!(daily.var[static_cast<size_t>(k)] > 0.0))
      throw ValidationError("daily variances must be positive");
  }
  if (!variant.daily_effect) {
    for (int k = 0; k < 7; ++k) {
      if (daily.mean[static_cast<size_t>(k)] != 0.0)
        throw ValidationError("daily means must be zero when the daily effect is off");
      if (daily.var[static_cast<size_t>(k)] != daily.var[0])
        throw ValidationError("daily variances must be pooled when the daily effect is off");
    }
  }
  for (int z = 0; z < variant.phases; ++z) {
    if (!variant.is_dynamic(z)) continue;
    const auto zi = static_cast<size_t>(z);
    if (!(dyn.var[zi] > 0.0))
      throw ValidationError("dynamic phase variances must be positive");
    if (!(dyn.drift[zi] > variant.drift_lo(z)) || !(dyn.drift[zi] < variant.drift_hi(z)))
      throw ValidationError("dynamic phase drift outside its support");
  }
  for (double v : trans.temporal.v)
    if (!std::isfinite(v)) throw ValidationError("temporal weights must be finite");
  for (double v : trans.spatial.v)
    if (!std::isfinite(v)) throw ValidationError("spatial weights must be finite");
}

}  // namespace flumn
