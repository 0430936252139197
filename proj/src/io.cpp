#include "flumn/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <openssl/evp.h>

namespace flumn {

namespace {

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      if (!cur.empty() && cur.back() == '\r') cur.pop_back();
      lines.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty() && cur.back() == '\r') cur.pop_back();
  if (!cur.empty()) lines.push_back(cur);
  return lines;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

[[noreturn]] void fail_at(const std::string& origin, size_t line_no,
                          const std::string& message) {
  throw ValidationError(origin + ":" + std::to_string(line_no) + ": " + message);
}

std::int64_t parse_count(const std::string& text, const std::string& origin,
                         size_t line_no) {
  if (text.empty()) fail_at(origin, line_no, "empty count");
  std::int64_t value = 0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    fail_at(origin, line_no, "count '" + text + "' is not an integer");
  if (value < 0)
    fail_at(origin, line_no, "count '" + text + "' is negative");
  return value;
}

double parse_double(const std::string& text, const std::string& origin,
                    size_t line_no) {
  if (text.empty()) fail_at(origin, line_no, "empty value");
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    fail_at(origin, line_no, "value '" + text + "' is not a number");
  return value;
}

std::string fmt_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

// Strict object reader: every key must be consumed exactly once.
class ObjectReader {
 public:
  ObjectReader(const Json& j, std::string context)
      : j_(j), context_(std::move(context)) {
    if (!j.is_object())
      throw ValidationError(context_ + " must be a JSON object");
  }

  bool has(const std::string& key) { return j_.contains(key); }

  const Json* take(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() {
    for (const auto& item : j_.items())
      if (!seen_.count(item.key()))
        throw ValidationError(context_ + ": unknown key '" + item.key() + "'");
  }

  double number(const std::string& key, double fallback) {
    const Json* v = take(key);
    if (v == nullptr) return fallback;
    if (!v->is_number())
      throw ValidationError(context_ + "." + key + " must be a number");
    return v->get<double>();
  }

  int integer(const std::string& key, int fallback) {
    const Json* v = take(key);
    if (v == nullptr) return fallback;
    if (!v->is_number_integer())
      throw ValidationError(context_ + "." + key + " must be an integer");
    return v->get<int>();
  }

  std::uint64_t uint64(const std::string& key, std::uint64_t fallback) {
    const Json* v = take(key);
    if (v == nullptr) return fallback;
    if (!v->is_number_unsigned() && !v->is_number_integer())
      throw ValidationError(context_ + "." + key + " must be a non-negative integer");
    if (v->is_number_integer() && v->get<std::int64_t>() < 0)
      throw ValidationError(context_ + "." + key + " must be a non-negative integer");
    return v->get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool fallback) {
    const Json* v = take(key);
    if (v == nullptr) return fallback;
    if (!v->is_boolean())
      throw ValidationError(context_ + "." + key + " must be a boolean");
    return v->get<bool>();
  }

  std::string text(const std::string& key, const std::string& fallback) {
    const Json* v = take(key);
    if (v == nullptr) return fallback;
    if (!v->is_string())
      throw ValidationError(context_ + "." + key + " must be a string");
    return v->get<std::string>();
  }

  const std::string& context() const { return context_; }

 private:
  const Json& j_;
  std::string context_;
  std::set<std::string> seen_;
};

template <size_t N>
void read_array(ObjectReader& reader, const std::string& key,
                std::array<double, N>& out) {
  const Json* v = reader.take(key);
  if (v == nullptr) return;
  if (!v->is_array() || v->size() != N)
    throw ValidationError(reader.context() + "." + key + " must be an array of " +
                          std::to_string(N) + " numbers");
  for (size_t i = 0; i < N; ++i) {
    if (!(*v)[i].is_number())
      throw ValidationError(reader.context() + "." + key + " must contain numbers");
    out[i] = (*v)[i].get<double>();
  }
}

Json array_json(const double* v, size_t n) {
  Json a = Json::array();
  for (size_t i = 0; i < n; ++i) a.push_back(v[i]);
  return a;
}

PhaseMatrix matrix_from_json(const Json& j, int phases, const std::string& context) {
  if (!j.is_array() || static_cast<int>(j.size()) != phases)
    throw ValidationError(context + " must be a " + std::to_string(phases) + "x" +
                          std::to_string(phases) + " matrix");
  PhaseMatrix m;
  for (int a = 0; a < phases; ++a) {
    const Json& row = j[static_cast<size_t>(a)];
    if (!row.is_array() || static_cast<int>(row.size()) != phases)
      throw ValidationError(context + " must be a " + std::to_string(phases) + "x" +
                            std::to_string(phases) + " matrix");
    for (int b = 0; b < phases; ++b) {
      if (!row[static_cast<size_t>(b)].is_number())
        throw ValidationError(context + " must contain numbers");
      m.at(a, b) = row[static_cast<size_t>(b)].get<double>();
    }
  }
  return m;
}

Json matrix_to_json(const PhaseMatrix& m, int phases) {
  Json rows = Json::array();
  for (int a = 0; a < phases; ++a) {
    Json row = Json::array();
    for (int b = 0; b < phases; ++b) row.push_back(m.at(a, b));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

// --- files ---------------------------------------------------------------------

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw ValidationError("failed reading '" + path + "'");
  return buf.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot open '" + tmp + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ValidationError("failed writing '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw ValidationError("cannot move '" + tmp + "' to '" + path + "'");
}

std::string git_blob_sha1(const std::string& bytes) {
  const std::string header = "blob " + std::to_string(bytes.size()) + '\0';
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int digest_len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr) throw std::runtime_error("cannot allocate digest context");
  bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
            EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
            EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) == 1 &&
            EVP_DigestFinal_ex(ctx, digest, &digest_len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw std::runtime_error("SHA-1 digest failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(digest_len * 2);
  for (unsigned int i = 0; i < digest_len; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0xf]);
  }
  return hex;
}

// --- counts CSV -----------------------------------------------------------------

ObservationPanel parse_counts_csv(const std::string& text, const std::string& origin) {
  const auto lines = split_lines(text);
  if (lines.empty()) throw ValidationError(origin + ": empty counts file");
  if (lines[0] != "region,date,count")
    fail_at(origin, 1, "expected header 'region,date,count'");

  struct Entry {
    std::int64_t count;
    size_t line_no;
  };
  std::vector<std::string> region_order;
  std::map<std::string, std::map<long long, Entry>> by_region;
  long long min_serial = 0, max_serial = 0;
  bool any = false;

  for (size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = split_fields(lines[i]);
    if (fields.size() != 3)
      fail_at(origin, i + 1, "expected 3 comma-separated fields");
    const std::string& region = fields[0];
    if (region.empty()) fail_at(origin, i + 1, "empty region name");
    Date date;
    try {
      date = Date::parse(fields[1]);
    } catch (const ValidationError& e) {
      fail_at(origin, i + 1, e.what());
    }
    const std::int64_t count = parse_count(fields[2], origin, i + 1);
    auto [it, inserted] = by_region.try_emplace(region);
    if (inserted) region_order.push_back(region);
    const long long serial = date.serial();
    auto [entry_it, fresh] = it->second.try_emplace(serial, Entry{count, i + 1});
    if (!fresh)
      fail_at(origin, i + 1,
              "duplicate row for region '" + region + "' on " + date.to_string() +
                  " (first seen at line " + std::to_string(entry_it->second.line_no) + ")");
    if (!any || serial < min_serial) min_serial = serial;
    if (!any || serial > max_serial) max_serial = serial;
    any = true;
  }
  if (!any) throw ValidationError(origin + ": no data rows");

  const int n_days = static_cast<int>(max_serial - min_serial + 1);
  ObservationPanel panel;
  panel.regions = region_order;
  panel.start_date = Date::from_serial(min_serial);
  panel.counts.assign(region_order.size() * static_cast<size_t>(n_days), 0);
  for (int r = 0; r < static_cast<int>(region_order.size()); ++r) {
    const auto& rows = by_region[region_order[static_cast<size_t>(r)]];
    for (long long serial = min_serial; serial <= max_serial; ++serial) {
      auto it = rows.find(serial);
      if (it == rows.end())
        throw ValidationError(origin + ": region '" +
                              region_order[static_cast<size_t>(r)] + "' is missing " +
                              Date::from_serial(serial).to_string() +
                              " (the date range must be fully covered)");
      panel.count(r, static_cast<int>(serial - min_serial)) = it->second.count;
    }
  }
  panel.validate();
  return panel;
}

CountsFile ingest_counts(const std::string& path) {
  CountsFile out;
  const std::string bytes = read_file(path);
  out.panel = parse_counts_csv(bytes, path);
  out.path = path;
  out.sha1 = git_blob_sha1(bytes);
  return out;
}

// --- adjacency CSV ---------------------------------------------------------------

RegionGraph parse_adjacency_csv(const std::string& text, const std::string& origin,
                                const std::vector<std::string>& regions) {
  const auto lines = split_lines(text);
  if (lines.empty()) throw ValidationError(origin + ": empty adjacency file");
  if (lines[0] != "region_a,region_b")
    fail_at(origin, 1, "expected header 'region_a,region_b'");

  std::map<std::string, int> index;
  for (int r = 0; r < static_cast<int>(regions.size()); ++r)
    index[regions[static_cast<size_t>(r)]] = r;

  std::set<std::pair<int, int>> seen;
  std::vector<std::pair<int, int>> edges;
  for (size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = split_fields(lines[i]);
    if (fields.size() != 2)
      fail_at(origin, i + 1, "expected 2 comma-separated fields");
    auto ita = index.find(fields[0]);
    if (ita == index.end())
      fail_at(origin, i + 1, "unknown region '" + fields[0] + "'");
    auto itb = index.find(fields[1]);
    if (itb == index.end())
      fail_at(origin, i + 1, "unknown region '" + fields[1] + "'");
    if (ita->second == itb->second)
      fail_at(origin, i + 1, "self-loop on region '" + fields[0] + "'");
    const auto key = std::minmax(ita->second, itb->second);
    if (!seen.insert(key).second)
      fail_at(origin, i + 1,
              "duplicate edge between '" + fields[0] + "' and '" + fields[1] + "'");
    edges.push_back(key);
  }
  return RegionGraph::from_pairs(static_cast<int>(regions.size()), edges);
}

AdjacencyFile ingest_adjacency(const std::string& path,
                               const std::vector<std::string>& regions) {
  AdjacencyFile out;
  const std::string bytes = read_file(path);
  out.graph = parse_adjacency_csv(bytes, path, regions);
  out.path = path;
  out.sha1 = git_blob_sha1(bytes);
  return out;
}

// --- value CSV --------------------------------------------------------------------

std::vector<double> parse_value_csv(const std::string& text, const std::string& origin) {
  const auto lines = split_lines(text);
  if (lines.empty()) throw ValidationError(origin + ": empty series file");
  if (lines[0] != "value") fail_at(origin, 1, "expected header 'value'");
  std::vector<double> out;
  for (size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    out.push_back(parse_double(lines[i], origin, i + 1));
  }
  if (out.empty()) throw ValidationError(origin + ": no data rows");
  return out;
}

std::vector<double> ingest_values(const std::string& path) {
  return parse_value_csv(read_file(path), path);
}

// --- run configuration --------------------------------------------------------------

void ForecastOptions::validate() const {
  if (ar_order < 1) throw ValidationError("forecast.ar_order must be >= 1");
  if (train_days < 0) throw ValidationError("forecast.train_days must be >= 0");
}

void RunConfig::validate() const {
  ModelVariant::from_name(variant);
  if (!(growth_floor > 0.0)) throw ValidationError("growth_floor must be positive");
  chain.validate();
  hyper.validate();
  detector.validate();
  forecast.validate();
}

RunConfig config_from_json(const Json& j) {
  RunConfig c;
  ObjectReader top(j, "config");
  c.variant = top.text("variant", c.variant);
  c.seed = top.uint64("seed", c.seed);
  c.growth_floor = top.number("growth_floor", c.growth_floor);

  if (const Json* chain = top.take("chain")) {
    ObjectReader r(*chain, "config.chain");
    c.chain.iterations = r.integer("iterations", c.chain.iterations);
    c.chain.burn_in = r.integer("burn_in", c.chain.burn_in);
    c.chain.thinning = r.integer("thinning", c.chain.thinning);
    c.chain.step_temporal = r.number("step_temporal", c.chain.step_temporal);
    c.chain.step_spatial = r.number("step_spatial", c.chain.step_spatial);
    c.chain.step_drift = r.number("step_drift", c.chain.step_drift);
    c.chain.adapt = r.boolean("adapt", c.chain.adapt);
    r.finish();
  }
  if (const Json* hyper = top.take("hyper")) {
    ObjectReader r(*hyper, "config.hyper");
    read_array(r, "daily_mean_center", c.hyper.daily_mean_center);
    read_array(r, "daily_mean_var", c.hyper.daily_mean_var);
    read_array(r, "daily_var_dof", c.hyper.daily_var_dof);
    read_array(r, "daily_var_scale", c.hyper.daily_var_scale);
    c.hyper.transition_var = r.number("transition_var", c.hyper.transition_var);
    c.hyper.spatial_var = r.number("spatial_var", c.hyper.spatial_var);
    read_array(r, "epidemic_var_dof", c.hyper.epidemic_var_dof);
    read_array(r, "epidemic_var_scale", c.hyper.epidemic_var_scale);
    c.hyper.static_var_dof = r.number("static_var_dof", c.hyper.static_var_dof);
    c.hyper.static_var_scale = r.number("static_var_scale", c.hyper.static_var_scale);
    r.finish();
  }
  if (const Json* det = top.take("detector")) {
    ObjectReader r(*det, "config.detector");
    c.detector.sweeps = r.integer("sweeps", c.detector.sweeps);
    c.detector.warm_up = r.integer("warm_up", c.detector.warm_up);
    c.detector.threshold = r.number("threshold", c.detector.threshold);
    c.detector.peak_window = r.integer("peak_window", c.detector.peak_window);
    c.detector.adapt = r.boolean("adapt", c.detector.adapt);
    c.detector.anchor_sweeps = r.integer("anchor_sweeps", c.detector.anchor_sweeps);
    c.detector.anchor_weight = r.number("anchor_weight", c.detector.anchor_weight);
    r.finish();
  }
  if (const Json* fc = top.take("forecast")) {
    ObjectReader r(*fc, "config.forecast");
    c.forecast.ar_order = r.integer("ar_order", c.forecast.ar_order);
    c.forecast.train_days = r.integer("train_days", c.forecast.train_days);
    r.finish();
  }
  top.finish();
  c.validate();
  return c;
}

Json config_to_json(const RunConfig& c) {
  Json j;
  j["variant"] = c.variant;
  j["seed"] = c.seed;
  j["growth_floor"] = c.growth_floor;
  j["chain"] = Json{{"iterations", c.chain.iterations},
                    {"burn_in", c.chain.burn_in},
                    {"thinning", c.chain.thinning},
                    {"step_temporal", c.chain.step_temporal},
                    {"step_spatial", c.chain.step_spatial},
                    {"step_drift", c.chain.step_drift},
                    {"adapt", c.chain.adapt}};
  j["hyper"] = Json{
      {"daily_mean_center", array_json(c.hyper.daily_mean_center.data(), 7)},
      {"daily_mean_var", array_json(c.hyper.daily_mean_var.data(), 7)},
      {"daily_var_dof", array_json(c.hyper.daily_var_dof.data(), 7)},
      {"daily_var_scale", array_json(c.hyper.daily_var_scale.data(), 7)},
      {"transition_var", c.hyper.transition_var},
      {"spatial_var", c.hyper.spatial_var},
      {"epidemic_var_dof", array_json(c.hyper.epidemic_var_dof.data(), kMaxPhases)},
      {"epidemic_var_scale", array_json(c.hyper.epidemic_var_scale.data(), kMaxPhases)},
      {"static_var_dof", c.hyper.static_var_dof},
      {"static_var_scale", c.hyper.static_var_scale}};
  j["detector"] = Json{{"sweeps", c.detector.sweeps},
                       {"warm_up", c.detector.warm_up},
                       {"threshold", c.detector.threshold},
                       {"peak_window", c.detector.peak_window},
                       {"adapt", c.detector.adapt},
                       {"anchor_sweeps", c.detector.anchor_sweeps},
                       {"anchor_weight", c.detector.anchor_weight}};
  j["forecast"] = Json{{"ar_order", c.forecast.ar_order},
                       {"train_days", c.forecast.train_days}};
  return j;
}

RunConfig load_config(const std::string& path) {
  if (path.empty()) return RunConfig{};
  Json j;
  try {
    j = Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    throw ValidationError(path + ": invalid JSON (" + std::string(e.what()) + ")");
  }
  try {
    return config_from_json(j);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

// --- scenarios -------------------------------------------------------------------------

ScenarioSpec scenario_from_json(const Json& j) {
  ScenarioSpec s;
  ObjectReader top(j, "scenario");
  s.variant = ModelVariant::from_name(top.text("variant", s.variant.name));
  s.n_regions = top.integer("regions", s.n_regions);
  s.n_days = top.integer("days", s.n_days);
  s.start_date = Date::parse(top.text("start_date", s.start_date.to_string()));
  s.seed = top.uint64("seed", s.seed);

  if (const Json* edges = top.take("edges")) {
    if (!edges->is_array())
      throw ValidationError("scenario.edges must be an array of [a, b] pairs");
    std::vector<std::pair<int, int>> pairs;
    for (const Json& e : *edges) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() ||
          !e[1].is_number_integer())
        throw ValidationError("scenario.edges must be an array of [a, b] pairs");
      pairs.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
    s.graph = RegionGraph::from_pairs(s.n_regions, pairs);
  } else {
    s.graph = RegionGraph::edgeless(s.n_regions);
  }

  read_array(top, "daily_mean", s.daily.mean);
  s.daily.var.fill(0.01);
  read_array(top, "daily_var", s.daily.var);

  if (const Json* m = top.take("temporal"))
    s.trans.temporal = matrix_from_json(*m, s.variant.phases, "scenario.temporal");
  if (const Json* m = top.take("spatial"))
    s.trans.spatial = matrix_from_json(*m, s.variant.phases, "scenario.spatial");

  auto read_dynamic = [&](const char* key, std::array<double, kMaxPhases>& out,
                          double fallback) {
    for (int z = 0; z < s.variant.phases; ++z)
      if (s.variant.is_dynamic(z))
        out[static_cast<size_t>(z)] =
            fallback == 0.0
                ? 0.5 * (s.variant.drift_lo(z) + s.variant.drift_hi(z))
                : fallback;
    const Json* v = top.take(key);
    if (v == nullptr) return;
    ObjectReader r(*v, std::string("scenario.") + key);
    for (int z = 0; z < s.variant.phases; ++z) {
      if (!s.variant.is_dynamic(z)) continue;
      out[static_cast<size_t>(z)] =
          r.number(s.variant.phase_name(z), out[static_cast<size_t>(z)]);
    }
    r.finish();
  };
  read_dynamic("drift", s.dyn.drift, 0.0);
  read_dynamic("epidemic_var", s.dyn.var, 0.04);

  if (const Json* init = top.take("initial_counts")) {
    if (!init->is_array() || static_cast<int>(init->size()) != s.n_regions)
      throw ValidationError("scenario.initial_counts must list one count per region");
    s.initial_counts.clear();
    for (const Json& v : *init) {
      if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
        throw ValidationError("scenario.initial_counts must be non-negative integers");
      s.initial_counts.push_back(v.get<std::int64_t>());
    }
  } else {
    s.initial_counts.assign(static_cast<size_t>(s.n_regions), 1000);
  }

  const std::string mode = top.text("mode", "field");
  if (mode == "field") {
    s.mode = ScenarioSpec::PhaseMode::Field;
  } else if (mode == "wave") {
    s.mode = ScenarioSpec::PhaseMode::Wave;
  } else {
    throw ValidationError("scenario.mode must be 'field' or 'wave'");
  }
  s.field_sweeps = top.integer("field_sweeps", s.field_sweeps);
  if (const Json* w = top.take("wave")) {
    ObjectReader r(*w, "scenario.wave");
    if (const Json* onset = r.take("onset")) {
      if (!onset->is_array())
        throw ValidationError("scenario.wave.onset must be an array");
      s.wave.onset.clear();
      for (const Json& v : *onset) {
        if (!v.is_number_integer())
          throw ValidationError("scenario.wave.onset must contain integers");
        s.wave.onset.push_back(v.get<int>());
      }
    }
    s.wave.dwell_re = r.integer("dwell_re", s.wave.dwell_re);
    s.wave.dwell_se = r.integer("dwell_se", s.wave.dwell_se);
    s.wave.dwell_de = r.integer("dwell_de", s.wave.dwell_de);
    s.wave.period = r.integer("period", s.wave.period);
    r.finish();
  }
  top.finish();
  s.validate();
  return s;
}

Json scenario_to_json(const ScenarioSpec& s) {
  Json j;
  j["variant"] = s.variant.name;
  j["regions"] = s.n_regions;
  j["days"] = s.n_days;
  j["start_date"] = s.start_date.to_string();
  j["seed"] = s.seed;
  Json edges = Json::array();
  for (const auto& [a, b] : s.graph.edge_list()) edges.push_back(Json::array({a, b}));
  j["edges"] = edges;
  j["daily_mean"] = array_json(s.daily.mean.data(), 7);
  j["daily_var"] = array_json(s.daily.var.data(), 7);
  j["temporal"] = matrix_to_json(s.trans.temporal, s.variant.phases);
  j["spatial"] = matrix_to_json(s.trans.spatial, s.variant.phases);
  Json drift, evar;
  for (int z = 0; z < s.variant.phases; ++z) {
    if (!s.variant.is_dynamic(z)) continue;
    drift[s.variant.phase_name(z)] = s.dyn.drift[static_cast<size_t>(z)];
    evar[s.variant.phase_name(z)] = s.dyn.var[static_cast<size_t>(z)];
  }
  j["drift"] = drift;
  j["epidemic_var"] = evar;
  Json init = Json::array();
  for (auto c : s.initial_counts) init.push_back(c);
  j["initial_counts"] = init;
  j["mode"] = s.mode == ScenarioSpec::PhaseMode::Field ? "field" : "wave";
  if (s.mode == ScenarioSpec::PhaseMode::Field) {
    j["field_sweeps"] = s.field_sweeps;
  } else {
    Json onset = Json::array();
    for (int v : s.wave.onset) onset.push_back(v);
    j["wave"] = Json{{"onset", onset},
                     {"dwell_re", s.wave.dwell_re},
                     {"dwell_se", s.wave.dwell_se},
                     {"dwell_de", s.wave.dwell_de},
                     {"period", s.wave.period}};
  }
  return j;
}

ScenarioSpec load_scenario(const std::string& path) {
  Json j;
  try {
    j = Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    throw ValidationError(path + ": invalid JSON (" + std::string(e.what()) + ")");
  }
  try {
    return scenario_from_json(j);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

// --- serialisation helpers ---------------------------------------------------------------

Json summary_to_json(const PosteriorSummary& summary) {
  Json params = Json::array();
  for (const auto& p : summary.params)
    params.push_back(Json{{"name", p.name},
                          {"mean", p.mean},
                          {"sd", p.sd},
                          {"ci_lo", p.lo},
                          {"ci_hi", p.hi}});
  return Json{{"regions", summary.n_regions},
              {"steps", summary.n_steps},
              {"phases", summary.phases},
              {"params", params}};
}

Json diagnostics_to_json(const ChainDiagnostics& diag) {
  Json flags = Json::array();
  for (const auto& f : diag.flags) flags.push_back(f);
  return Json{{"ess_log_density", diag.ess_log_density},
              {"acceptance_temporal", diag.acceptance_temporal},
              {"acceptance_spatial", diag.acceptance_spatial},
              {"flags", flags}};
}

std::string phase_probability_csv(
    const ObservationPanel& panel,
    const std::vector<std::vector<std::array<double, kMaxPhases>>>& dist,
    int first_day, int phases) {
  std::string out = "region,date,p_ne,p_re,p_se,p_de,p_epidemic,map_phase\n";
  const ModelVariant naming =
      phases == 2 ? ModelVariant::two_phase() : ModelVariant::flu_mn();
  for (int r = 0; r < panel.n_regions(); ++r) {
    const auto& rows = dist[static_cast<size_t>(r)];
    for (size_t i = 0; i < rows.size(); ++i) {
      const int day = first_day + static_cast<int>(i);
      const auto& d = rows[i];
      double p_ne = d[0];
      double p_re = d[1];
      double p_se = phases == 2 ? 0.0 : d[2];
      double p_de = phases == 2 ? 0.0 : d[3];
      int best = 0;
      for (int c = 1; c < phases; ++c)
        if (d[static_cast<size_t>(c)] > d[static_cast<size_t>(best)]) best = c;
      out += panel.regions[static_cast<size_t>(r)];
      out += ',';
      out += panel.date(day).to_string();
      out += ',';
      out += fmt_double(p_ne);
      out += ',';
      out += fmt_double(p_re);
      out += ',';
      out += fmt_double(p_se);
      out += ',';
      out += fmt_double(p_de);
      out += ',';
      out += fmt_double(1.0 - p_ne);
      out += ',';
      out += naming.phase_name(best);
      out += '\n';
    }
  }
  return out;
}

std::string counts_to_csv(const ObservationPanel& panel) {
  std::string out = "region,date,count\n";
  for (int r = 0; r < panel.n_regions(); ++r) {
    for (int t = 0; t < panel.n_days(); ++t) {
      out += panel.regions[static_cast<size_t>(r)];
      out += ',';
      out += panel.date(t).to_string();
      out += ',';
      out += std::to_string(panel.count(r, t));
      out += '\n';
    }
  }
  return out;
}

std::string adjacency_to_csv(const ObservationPanel& panel, const RegionGraph& graph) {
  std::string out = "region_a,region_b\n";
  for (const auto& [a, b] : graph.edge_list()) {
    out += panel.regions[static_cast<size_t>(a)];
    out += ',';
    out += panel.regions[static_cast<size_t>(b)];
    out += '\n';
  }
  return out;
}

}  // namespace flumn
