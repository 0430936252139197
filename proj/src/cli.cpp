#include "flumn/cli.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "flumn/common.hpp"
#include "flumn/detection.hpp"
#include "flumn/forecast.hpp"
#include "flumn/io.hpp"
#include "flumn/model.hpp"
#include "flumn/sampler.hpp"
#include "flumn/synthetic.hpp"
#include "flumn/types.hpp"

namespace flumn {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

// Buffered output set: nothing touches the filesystem until the whole
// command has produced every artifact.
struct OutputSet {
  std::string dir;
  std::vector<std::pair<std::string, std::string>> files;

  void add(const std::string& name, std::string bytes) {
    files.emplace_back(name, std::move(bytes));
  }

  void flush(std::ostream& out) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec && !std::filesystem::is_directory(dir))
      throw ValidationError("cannot create output directory '" + dir + "'");
    for (const auto& [name, bytes] : files) {
      const std::string path = dir + "/" + name;
      write_file(path, bytes);
      out << "wrote " << path << "\n";
    }
  }
};

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

struct Inputs {
  CountsFile counts;
  std::optional<AdjacencyFile> adjacency;
  RegionGraph graph;
};

Inputs load_inputs(const std::string& counts_path, const std::string& adjacency_path) {
  Inputs in;
  in.counts = ingest_counts(counts_path);
  if (!adjacency_path.empty()) {
    in.adjacency = ingest_adjacency(adjacency_path, in.counts.panel.regions);
    in.graph = in.adjacency->graph;
  } else {
    in.graph = RegionGraph::edgeless(in.counts.panel.n_regions());
  }
  return in;
}

Json inputs_json(const Inputs& in) {
  Json j;
  j["counts"] = Json{{"path", in.counts.path}, {"sha1", in.counts.sha1}};
  j["adjacency"] = in.adjacency ? Json{{"path", in.adjacency->path},
                                       {"sha1", in.adjacency->sha1}}
                                : Json(nullptr);
  return j;
}

Json report_head(const std::string& command, const RunConfig& config,
                 const Json& inputs) {
  Json j;
  j["command"] = command;
  j["variant"] = config.variant;
  j["seed"] = config.seed;
  j["config"] = config_to_json(config);
  j["inputs"] = inputs;
  return j;
}

Json alarms_json(const std::vector<AlarmRecord>& alarms, const ObservationPanel& panel) {
  Json out = Json::array();
  for (const auto& a : alarms) {
    Json j;
    j["region"] = panel.regions[static_cast<size_t>(a.region)];
    j["alarm_day"] = a.alarm_day ? Json(*a.alarm_day) : Json(nullptr);
    j["alarm_date"] =
        a.alarm_day ? Json(panel.date(*a.alarm_day).to_string()) : Json(nullptr);
    j["peak_day"] = a.peak_day;
    j["peak_date"] = panel.date(a.peak_day).to_string();
    j["lead_days"] = a.lead_days ? Json(*a.lead_days) : Json(nullptr);
    out.push_back(j);
  }
  return out;
}

Json metrics_json(const EvalMetrics& m) {
  return Json{{"correlation", m.correlation},
              {"rmse", m.rmse},
              {"rmse_raw", m.rmse_raw}};
}

// Per-command option bundle.  The seed/variant flags override the config
// file when present.
struct CommandArgs {
  std::string counts;
  std::string adjacency;
  std::string config_path;
  std::string variant;
  std::string out;
  std::string reference;
  std::string scenario;
  std::string predicted;
  std::string actual;
  std::uint64_t seed = 0;
  int train_days = -1;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* variant_opt = nullptr;
  CLI::Option* train_opt = nullptr;
};

RunConfig resolve_config(const CommandArgs& args, bool allow_average) {
  RunConfig config = load_config(args.config_path);
  if (args.variant_opt != nullptr && args.variant_opt->count() > 0)
    config.variant = args.variant;
  if (args.seed_opt != nullptr && args.seed_opt->count() > 0) config.seed = args.seed;
  if (args.train_opt != nullptr && args.train_opt->count() > 0)
    config.forecast.train_days = args.train_days;
  if (!(allow_average && config.variant == "average")) {
    ModelVariant::from_name(config.variant);  // throws on unknown names
    config.validate();
  }
  config.detector.growth_floor = config.growth_floor;
  return config;
}

std::vector<std::vector<std::array<double, kMaxPhases>>> marginal_grid(
    const PosteriorSummary& summary) {
  std::vector<std::vector<std::array<double, kMaxPhases>>> dist(
      static_cast<size_t>(summary.n_regions));
  for (int r = 0; r < summary.n_regions; ++r) {
    auto& rows = dist[static_cast<size_t>(r)];
    rows.assign(static_cast<size_t>(summary.n_steps), {});
    for (int s = 0; s < summary.n_steps; ++s)
      for (int z = 0; z < summary.phases; ++z)
        rows[static_cast<size_t>(s)][static_cast<size_t>(z)] = summary.marginal(r, s, z);
  }
  return dist;
}

int cmd_fit(const CommandArgs& args, std::ostream& out) {
  const RunConfig config = resolve_config(args, false);
  const Inputs in = load_inputs(args.counts, args.adjacency);
  const ModelVariant variant = ModelVariant::from_name(config.variant);

  const GrowthSeries growth = compute_growth(in.counts.panel, config.growth_floor);
  ChainConfig chain = config.chain;
  chain.seed = config.seed;
  const ChainTrace trace =
      run_chain_on_growth(growth, in.graph, config.hyper, variant, chain);
  const PosteriorSummary summary = summarize(trace);
  const ChainDiagnostics diag = chain_diagnostics(trace);
  const DicResult dic = compute_dic(trace, growth, in.graph, variant);

  Json report = report_head("fit", config, inputs_json(in));
  Json results;
  results["retained_samples"] = static_cast<int>(trace.samples.size());
  results["summary"] = summary_to_json(summary);
  results["diagnostics"] = diagnostics_to_json(diag);
  results["dic"] = Json{{"dic", dic.dic},
                        {"dbar", dic.dbar},
                        {"d_hat", dic.d_hat},
                        {"p_d", dic.p_d}};
  report["results"] = results;

  OutputSet files{args.out, {}};
  files.add("fit_report.json", dump(report));
  files.add("fit_phase_marginals.csv",
            phase_probability_csv(in.counts.panel, marginal_grid(summary), 1,
                                  variant.phases));
  files.flush(out);
  return 0;
}

int cmd_detect(const CommandArgs& args, std::ostream& out) {
  const RunConfig config = resolve_config(args, true);
  const Inputs in = load_inputs(args.counts, args.adjacency);

  Json report = report_head("detect", config, inputs_json(in));
  OutputSet files{args.out, {}};

  if (config.variant == "average") {
    if (args.reference.empty())
      throw ValidationError("the average baseline needs --reference counts");
    const CountsFile reference = ingest_counts(args.reference);
    const auto alarms = average_baseline(in.counts.panel, reference.panel,
                                         config.detector.peak_window);
    report["inputs"]["reference"] =
        Json{{"path", reference.path}, {"sha1", reference.sha1}};
    report["results"] = Json{{"alarms", alarms_json(alarms, in.counts.panel)}};
  } else {
    if (!args.reference.empty())
      throw ValidationError("--reference applies to the average variant only");
    const ModelVariant variant = ModelVariant::from_name(config.variant);
    const DetectionScan scan = alarm_scan(in.counts.panel, in.graph, config.hyper,
                                          variant, config.detector, config.seed);
    report["results"] = Json{{"first_day", scan.first_day},
                             {"alarms", alarms_json(scan.alarms, in.counts.panel)}};
    files.add("detect_probabilities.csv",
              phase_probability_csv(in.counts.panel, scan.phase_dist, scan.first_day,
                                    variant.phases));
  }
  files.add("detect_report.json", dump(report));
  files.flush(out);
  return 0;
}

int cmd_forecast(const CommandArgs& args, std::ostream& out) {
  const RunConfig config = resolve_config(args, false);
  const Inputs in = load_inputs(args.counts, args.adjacency);
  const ModelVariant variant = ModelVariant::from_name(config.variant);
  const ObservationPanel& panel = in.counts.panel;

  const int order = config.forecast.ar_order;
  int train = config.forecast.train_days;
  if (train == 0)
    train = std::max(panel.n_days() / 2, order + 2);
  if (train < std::max(2, order + 2))
    throw ValidationError(
        "train window too small: the autoregressive baseline of order " +
        std::to_string(order) + " needs at least " + std::to_string(order + 2) +
        " training days");
  if (train >= panel.n_days())
    throw ValidationError("train window leaves no forecast targets");

  const ForecastScan scan = forecast_scan(panel, in.graph, config.hyper, variant,
                                          config.detector, train, config.seed);

  // One-step autoregressive baseline: fixed fit on the training window,
  // predictions roll forward on realised counts.
  const int R = panel.n_regions();
  std::vector<std::vector<double>> ar_hat(static_cast<size_t>(R));
  for (int r = 0; r < R; ++r) {
    std::vector<double> series(static_cast<size_t>(panel.n_days()));
    for (int t = 0; t < panel.n_days(); ++t)
      series[static_cast<size_t>(t)] = static_cast<double>(panel.count(r, t));
    const ArModel model =
        fit_ar(std::span<const double>(series.data(), static_cast<size_t>(train)),
               order);
    for (int target = train; target < panel.n_days(); ++target) {
      const std::span<const double> history(series.data() + target - order,
                                            static_cast<size_t>(order));
      ar_hat[static_cast<size_t>(r)].push_back(ar_predict(model, history));
    }
  }

  std::string csv = "region,date,y_model,y_ar,actual\n";
  std::vector<double> pool_model, pool_ar, pool_actual;
  Json per_region = Json::array();
  for (int r = 0; r < R; ++r) {
    const auto& yh = scan.y_hat[static_cast<size_t>(r)];
    const auto& ya = ar_hat[static_cast<size_t>(r)];
    const auto& yr = scan.realized[static_cast<size_t>(r)];
    for (size_t k = 0; k < yh.size(); ++k) {
      const int day = train + static_cast<int>(k);
      csv += panel.regions[static_cast<size_t>(r)];
      csv += ',';
      csv += panel.date(day).to_string();
      csv += ',';
      csv += fmt_double(yh[k]);
      csv += ',';
      csv += fmt_double(ya[k]);
      csv += ',';
      csv += fmt_double(yr[k]);
      csv += '\n';
      pool_model.push_back(yh[k]);
      pool_ar.push_back(ya[k]);
      pool_actual.push_back(yr[k]);
    }
    Json row;
    row["region"] = panel.regions[static_cast<size_t>(r)];
    try {
      row["model"] = metrics_json(evaluate(yh, yr));
      row["ar_baseline"] = metrics_json(evaluate(ya, yr));
    } catch (const ValidationError& e) {
      row["model"] = nullptr;
      row["ar_baseline"] = nullptr;
      row["note"] = e.what();
    }
    per_region.push_back(row);
  }

  Json report = report_head("forecast", config, inputs_json(in));
  Json results;
  results["train_days"] = train;
  results["targets"] = static_cast<int>(pool_actual.size());
  try {
    results["pooled"] = Json{{"model", metrics_json(evaluate(pool_model, pool_actual))},
                             {"ar_baseline", metrics_json(evaluate(pool_ar, pool_actual))}};
  } catch (const ValidationError& e) {
    results["pooled"] = nullptr;
    results["note"] = e.what();
  }
  results["per_region"] = per_region;
  report["results"] = results;

  OutputSet files{args.out, {}};
  files.add("forecast_report.json", dump(report));
  files.add("forecast.csv", csv);
  files.flush(out);
  return 0;
}

int cmd_simulate(const CommandArgs& args, std::ostream& out) {
  const std::string bytes = read_file(args.scenario);
  ScenarioSpec spec;
  try {
    spec = scenario_from_json(Json::parse(bytes));
  } catch (const Json::parse_error& e) {
    throw ValidationError(args.scenario + ": invalid JSON (" + std::string(e.what()) +
                          ")");
  }
  if (args.seed_opt != nullptr && args.seed_opt->count() > 0) spec.seed = args.seed;
  const SyntheticData data = generate_panel(spec);

  Json truth;
  truth["scenario"] = scenario_to_json(spec);
  Json phase_rows = Json::array();
  Json growth_rows = Json::array();
  for (int r = 0; r < data.phases.n_regions; ++r) {
    Json prow = Json::array();
    Json grow = Json::array();
    for (int s = 0; s < data.phases.n_steps; ++s) {
      prow.push_back(data.phases.at(r, s));
      grow.push_back(data.growth.delta(r, s));
    }
    phase_rows.push_back(prow);
    growth_rows.push_back(grow);
  }
  truth["phases"] = phase_rows;
  truth["growth"] = growth_rows;

  Json report;
  report["command"] = "simulate";
  report["seed"] = spec.seed;
  report["variant"] = spec.variant.name;
  report["inputs"] =
      Json{{"scenario", Json{{"path", args.scenario}, {"sha1", git_blob_sha1(bytes)}}}};
  report["results"] = Json{{"regions", data.panel.n_regions()},
                           {"days", data.panel.n_days()},
                           {"edges", static_cast<int>(spec.graph.edge_list().size())}};

  OutputSet files{args.out, {}};
  files.add("counts.csv", counts_to_csv(data.panel));
  files.add("adjacency.csv", adjacency_to_csv(data.panel, spec.graph));
  files.add("truth.json", dump(truth));
  files.add("simulate_report.json", dump(report));
  files.flush(out);
  return 0;
}

int cmd_evaluate(const CommandArgs& args, std::ostream& out) {
  const std::string pred_bytes = read_file(args.predicted);
  const std::string act_bytes = read_file(args.actual);
  const std::vector<double> predicted = parse_value_csv(pred_bytes, args.predicted);
  const std::vector<double> actual = parse_value_csv(act_bytes, args.actual);
  const EvalMetrics metrics = evaluate(predicted, actual);

  Json report;
  report["command"] = "evaluate";
  report["inputs"] = Json{
      {"predicted", Json{{"path", args.predicted}, {"sha1", git_blob_sha1(pred_bytes)}}},
      {"actual", Json{{"path", args.actual}, {"sha1", git_blob_sha1(act_bytes)}}}};
  report["results"] = Json{{"points", static_cast<int>(predicted.size())},
                           {"metrics", metrics_json(metrics)}};

  OutputSet files{args.out, {}};
  files.add("evaluate_report.json", dump(report));
  files.flush(out);
  return 0;
}

int cmd_dic(const CommandArgs& args, std::ostream& out) {
  const RunConfig config = resolve_config(args, false);
  const Inputs in = load_inputs(args.counts, args.adjacency);
  const GrowthSeries growth = compute_growth(in.counts.panel, config.growth_floor);

  const std::vector<std::string> names = {"flumn", "timehmm", "twophase", "flumn-r"};
  Json rows = Json::array();
  std::string best_name;
  double best_dic = 0.0;
  for (const std::string& name : names) {
    const ModelVariant variant = ModelVariant::from_name(name);
    ChainConfig chain = config.chain;
    chain.seed = config.seed;
    const ChainTrace trace =
        run_chain_on_growth(growth, in.graph, config.hyper, variant, chain);
    const DicResult dic = compute_dic(trace, growth, in.graph, variant);
    const ChainDiagnostics diag = chain_diagnostics(trace);
    rows.push_back(Json{{"variant", name},
                        {"dic", dic.dic},
                        {"dbar", dic.dbar},
                        {"d_hat", dic.d_hat},
                        {"p_d", dic.p_d},
                        {"ess_log_density", diag.ess_log_density}});
    if (best_name.empty() || dic.dic < best_dic) {
      best_name = name;
      best_dic = dic.dic;
    }
  }

  Json report = report_head("dic", config, inputs_json(in));
  report["results"] = Json{{"variants", rows}, {"best", best_name}};

  OutputSet files{args.out, {}};
  files.add("dic_report.json", dump(report));
  files.flush(out);
  return 0;
}

void add_common_options(CLI::App* sub, CommandArgs& args, bool counts_required) {
  auto* counts = sub->add_option("--counts", args.counts, "Daily count CSV");
  if (counts_required) counts->required();
  sub->add_option("--adjacency", args.adjacency, "Region adjacency CSV");
  sub->add_option("--config", args.config_path, "Run configuration JSON");
  args.variant_opt =
      sub->add_option("--variant", args.variant, "Model variant (overrides config)");
  args.seed_opt = sub->add_option("--seed", args.seed, "RNG seed (overrides config)");
  sub->add_option("--out", args.out, "Output directory")->required();
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian epidemic-phase segmentation, detection and forecasting"};
  app.require_subcommand(1);

  CommandArgs fit_args, detect_args, forecast_args, simulate_args, evaluate_args,
      dic_args;

  CLI::App* fit = app.add_subcommand("fit", "Fit the phase model to a count panel");
  add_common_options(fit, fit_args, true);

  CLI::App* detect =
      app.add_subcommand("detect", "Sequential epidemic detection with alarms");
  add_common_options(detect, detect_args, true);
  detect->add_option("--reference", detect_args.reference,
                     "Reference count CSV (average baseline only)");

  CLI::App* forecast =
      app.add_subcommand("forecast", "Rolling one-step-ahead count forecasts");
  add_common_options(forecast, forecast_args, true);
  forecast_args.train_opt =
      forecast->add_option("--train-days", forecast_args.train_days,
                           "Days before the first forecast target (0: half the panel)");

  CLI::App* simulate =
      app.add_subcommand("simulate", "Generate a synthetic count panel");
  simulate->add_option("--scenario", simulate_args.scenario, "Scenario JSON")
      ->required();
  simulate_args.seed_opt = simulate->add_option("--seed", simulate_args.seed,
                                                "RNG seed (overrides the scenario)");
  simulate->add_option("--out", simulate_args.out, "Output directory")->required();

  CLI::App* evaluate =
      app.add_subcommand("evaluate", "Score a prediction series against actuals");
  evaluate->add_option("--predicted", evaluate_args.predicted, "Predicted-value CSV")
      ->required();
  evaluate->add_option("--actual", evaluate_args.actual, "Actual-value CSV")
      ->required();
  evaluate->add_option("--out", evaluate_args.out, "Output directory")->required();

  CLI::App* dic = app.add_subcommand("dic", "Compare all model variants by DIC");
  add_common_options(dic, dic_args, true);
  // Every variant is fit; a single-variant selector would be misleading.
  dic->remove_option(dic_args.variant_opt);
  dic_args.variant_opt = nullptr;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (fit->parsed()) return cmd_fit(fit_args, out);
    if (detect->parsed()) return cmd_detect(detect_args, out);
    if (forecast->parsed()) return cmd_forecast(forecast_args, out);
    if (simulate->parsed()) return cmd_simulate(simulate_args, out);
    if (evaluate->parsed()) return cmd_evaluate(evaluate_args, out);
    if (dic->parsed()) return cmd_dic(dic_args, out);
    err << "error: no command selected\n";
    return 1;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace flumn
