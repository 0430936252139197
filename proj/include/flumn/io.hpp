#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "flumn/detection.hpp"
#include "flumn/sampler.hpp"
#include "flumn/synthetic.hpp"
#include "flumn/types.hpp"

namespace flumn {

using Json = nlohmann::ordered_json;

// --- files -----------------------------------------------------------------

std::string read_file(const std::string& path);  // ValidationError if unreadable
// Writes via a temp file + rename so failures never leave partial output.
void write_file(const std::string& path, const std::string& bytes);
// Hex SHA-1 of "blob <size>\0<bytes>" (content identity of the input file).
std::string git_blob_sha1(const std::string& bytes);

// --- CSV ingestion -----------------------------------------------------------

struct CountsFile {
  ObservationPanel panel;
  std::string path;
  std::string sha1;
};

// Parses `region,date,count` rows (header required).  Regions are ordered by
// first appearance; every region must cover the full date range exactly once
// per day.  Duplicates, gaps, negative counts, malformed dates or numbers are
// ValidationErrors naming the offending line.
CountsFile ingest_counts(const std::string& path);
ObservationPanel parse_counts_csv(const std::string& text, const std::string& origin);

struct AdjacencyFile {
  RegionGraph graph;
  std::string path;
  std::string sha1;
};

// Parses `region_a,region_b` rows against the panel's region names.  Unknown
// regions, self-loops and repeated edges are ValidationErrors naming the line.
AdjacencyFile ingest_adjacency(const std::string& path,
                               const std::vector<std::string>& regions);
RegionGraph parse_adjacency_csv(const std::string& text, const std::string& origin,
                                const std::vector<std::string>& regions);

// Single-column numeric series, header `value`.
std::vector<double> parse_value_csv(const std::string& text, const std::string& origin);
std::vector<double> ingest_values(const std::string& path);

// --- run configuration -------------------------------------------------------

struct ForecastOptions {
  int ar_order = 7;
  int train_days = 0;  // 0: first half of the panel (minimum 2*ar_order+2)

  void validate() const;
};

struct RunConfig {
  std::string variant = "flumn";
  std::uint64_t seed = 1;
  double growth_floor = 1.0;
  ChainConfig chain;
  HyperPriors hyper = HyperPriors::defaults();
  DetectorConfig detector;
  ForecastOptions forecast;

  void validate() const;
};

// Strict parsers: unknown keys are ValidationErrors, values are type- and
// range-checked.  to_json round-trips exactly.
RunConfig config_from_json(const Json& j);
Json config_to_json(const RunConfig& config);
RunConfig load_config(const std::string& path);  // {} when path empty

// --- scenarios ----------------------------------------------------------------

ScenarioSpec scenario_from_json(const Json& j);
Json scenario_to_json(const ScenarioSpec& spec);
ScenarioSpec load_scenario(const std::string& path);

// --- serialisation helpers -----------------------------------------------------

Json summary_to_json(const PosteriorSummary& summary);
Json diagnostics_to_json(const ChainDiagnostics& diag);

// Rows `region,date,p_ne,p_re,p_se,p_de,p_epidemic,map_phase`, one per
// region per growth day.  Two-phase variants report p_re as the epidemic
// probability and zero p_se/p_de.
std::string phase_probability_csv(const ObservationPanel& panel,
                                  const std::vector<std::vector<std::array<double, kMaxPhases>>>& dist,
                                  int first_day, int phases);

std::string counts_to_csv(const ObservationPanel& panel);
std::string adjacency_to_csv(const ObservationPanel& panel, const RegionGraph& graph);

}  // namespace flumn
