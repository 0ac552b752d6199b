// Command-line pipeline: simulate -> disaggregate -> fit -> evaluate.
// stdout carries a one-line JSON summary per command; diagnostics and
// errors go to stderr.

#include <CLI11.hpp>
#include <json.hpp>

#include "nilm/disagg.hpp"
#include "nilm/io.hpp"
#include "nilm/model.hpp"
#include "nilm/synth.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
};

nilm::io::RunConfig load_config(const CommonArgs& args) {
  nilm::io::RunConfig cfg = args.config_path.empty()
                                ? nilm::io::default_run_config()
                                : nilm::io::load_run_config(args.config_path);
  if (args.seed) {
    cfg.hybrid.seed = *args.seed;
    cfg.scenario.seed = *args.seed;
  }
  return cfg;
}

nilm::TimeGrid grid_from_meta(const fs::path& truth_dir) {
  const fs::path meta = truth_dir / "meta.json";
  if (fs::exists(meta)) {
    std::ifstream in(meta);
    json j;
    in >> j;
    if (j.contains("grid")) {
      return nilm::TimeGrid(j["grid"]["instants_per_day"].get<int>(),
                            j["grid"]["periods_per_day"].get<int>());
    }
  }
  return nilm::TimeGrid(1440, 24);
}

json score_to_json(const nilm::synth::DisaggScore& s) {
  return json{{"f1", s.f1},
              {"precision", s.precision},
              {"recall", s.recall},
              {"true_positives", s.true_positives},
              {"false_positives", s.false_positives},
              {"false_negatives", s.false_negatives},
              {"on_threshold", s.on_threshold},
              {"shiftable_error", s.shiftable_error},
              {"fixed_error", s.fixed_error},
              {"total_error", s.total_error},
              {"shiftable_energy_ratio", s.shiftable_energy_ratio}};
}

void write_metrics(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw nilm::DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void emit_summary(const json& j) { std::cout << j.dump() << std::endl; }

int run_simulate(const CommonArgs& args) {
  const auto cfg = load_config(args);
  const auto truth = nilm::synth::generate(cfg.scenario);
  nilm::io::write_ground_truth(args.out_dir, truth);
  emit_summary(json{{"command", "simulate"},
                    {"out", args.out_dir},
                    {"days", truth.total.values.cols()},
                    {"instants", truth.total.values.rows()},
                    {"clamp_mass", truth.clamp_mass},
                    {"seed", cfg.scenario.seed}});
  return 0;
}

int run_disaggregate(const CommonArgs& args, const std::string& loads_path) {
  const auto cfg = load_config(args);
  const auto load = nilm::io::ingest_loads(loads_path, cfg.scenario.grid);
  const auto result = nilm::disagg::run_hybrid(load, cfg.hybrid);

  nilm::io::ReportInputs report;
  report.disagg = &result;
  nilm::io::write_report(args.out_dir, report);
  emit_summary(json{{"command", "disaggregate"},
                    {"out", args.out_dir},
                    {"iterations", result.iterations_run},
                    {"residual_norm", result.residual_norm},
                    {"mass_ratio_error", result.mass_ratio_error},
                    {"renormalizations", result.renormalizations}});
  return 0;
}

struct FitArgs {
  std::string shiftable, fixed, temps, prices;
  std::optional<bool> pin_q;
};

int run_fit(const CommonArgs& args, const FitArgs& fit_args) {
  auto cfg = load_config(args);
  if (fit_args.pin_q) cfg.fit.pin_q_to_zero = *fit_args.pin_q;
  const auto& grid = cfg.scenario.grid;

  auto shiftable = nilm::io::ingest_loads(fit_args.shiftable, grid);
  shiftable.role = nilm::LoadRole::ShiftableEstimate;
  auto fixed = nilm::io::ingest_loads(fit_args.fixed, grid);
  fixed.role = nilm::LoadRole::FixedEstimate;
  const auto theta = nilm::io::ingest_temperatures(fit_args.temps, grid);
  const auto cost = nilm::io::ingest_prices(fit_args.prices, grid);

  const auto fit = nilm::model::fit(shiftable, fixed, theta, cost, cfg.fit, grid);
  fs::create_directories(args.out_dir);
  nilm::io::write_fit_json(fs::path(args.out_dir) / "fit.json", fit);
  emit_summary(json{{"command", "fit"},
                    {"out", args.out_dir},
                    {"status", nilm::qp::to_string(fit.status)},
                    {"objective", fit.objective},
                    {"kkt_residual", fit.kkt_residual},
                    {"median_a", fit.medians[0]},
                    {"median_p", fit.medians[3]}});
  return fit.status == nilm::qp::SolveStatus::Optimal ? 0 : 2;
}

nilm::synth::GroundTruth truth_from_files(nilm::io::TruthFiles&& tf) {
  nilm::synth::GroundTruth truth;
  truth.noise = tf.total.values - tf.shiftable.values - tf.fixed.values;
  truth.total = std::move(tf.total);
  truth.shiftable = std::move(tf.shiftable);
  truth.fixed = std::move(tf.fixed);
  truth.theta = std::move(tf.theta);
  truth.cost = std::move(tf.cost);
  truth.params_used = std::move(tf.true_params);
  truth.min_appliance_level = tf.min_appliance_level;
  return truth;
}

int run_evaluate(const CommonArgs& args, const std::string& truth_dir,
                 const std::string& result_dir, std::string fit_real_path,
                 std::string fit_disagg_path) {
  const auto grid = grid_from_meta(truth_dir);
  auto truth = truth_from_files(nilm::io::read_ground_truth(truth_dir, grid));

  nilm::disagg::DisaggResult result;
  result.shiftable =
      nilm::io::ingest_loads(fs::path(result_dir) / "disagg_shiftable.csv", grid);
  result.shiftable.role = nilm::LoadRole::ShiftableEstimate;
  result.fixed =
      nilm::io::ingest_loads(fs::path(result_dir) / "disagg_fixed.csv", grid);
  result.fixed.role = nilm::LoadRole::FixedEstimate;
  result.total_estimate = nilm::LoadMatrix{
      result.shiftable.values + result.fixed.values, nilm::LoadRole::Total};

  const auto score = nilm::synth::score_disaggregation(truth, result);
  json metrics{{"disaggregation", score_to_json(score)}};

  if (fit_real_path.empty()) {
    const fs::path probe = fs::path(result_dir) / "fit_real.json";
    if (fs::exists(probe)) fit_real_path = probe.string();
  }
  if (fit_disagg_path.empty()) {
    const fs::path probe = fs::path(result_dir) / "fit.json";
    if (fs::exists(probe)) fit_disagg_path = probe.string();
  }
  fs::create_directories(args.out_dir);
  if (!fit_real_path.empty() && !fit_disagg_path.empty()) {
    const auto fit_real = nilm::io::read_fit_json(fit_real_path);
    const auto fit_disagg = nilm::io::read_fit_json(fit_disagg_path);
    const auto recovery = nilm::synth::score_parameter_recovery(
        truth.params_used, fit_real, fit_disagg);
    nilm::io::write_table1(fs::path(args.out_dir) / "table1.csv", recovery);
    json rec = json::array();
    for (const auto& row : recovery.rows) {
      json r{{"parameter", row.name},
             {"median_real", row.median_real},
             {"median_disagg", row.median_disagg}};
      r["corr"] = row.corr_real_disagg ? json(*row.corr_real_disagg) : json("-");
      if (row.corr_true_real) r["corr_true_real"] = *row.corr_true_real;
      if (row.corr_true_disagg) r["corr_true_disagg"] = *row.corr_true_disagg;
      rec.push_back(std::move(r));
    }
    metrics["parameter_recovery"] = std::move(rec);
  }

  write_metrics(fs::path(args.out_dir) / "metrics.json", metrics);
  emit_summary(json{{"command", "evaluate"},
                    {"out", args.out_dir},
                    {"f1", score.f1},
                    {"shiftable_error", score.shiftable_error},
                    {"fixed_error", score.fixed_error}});
  return 0;
}

struct PipelineArgs {
  std::string loads, temps, prices;
};

int run_pipeline(const CommonArgs& args, const PipelineArgs& pa) {
  const auto cfg = load_config(args);
  const fs::path out(args.out_dir);
  fs::create_directories(out);

  std::optional<nilm::synth::GroundTruth> truth;
  nilm::LoadMatrix load;
  nilm::TemperatureMatrix theta;
  nilm::CostVector cost;
  const auto& grid = cfg.scenario.grid;

  if (pa.loads.empty()) {
    truth = nilm::synth::generate(cfg.scenario);
    nilm::io::write_ground_truth(out / "truth", *truth);
    load = truth->total;
    theta = truth->theta;
    cost = truth->cost;
  } else {
    load = nilm::io::ingest_loads(pa.loads, grid);
    theta = nilm::io::ingest_temperatures(pa.temps, grid);
    cost = nilm::io::ingest_prices(pa.prices, grid);
  }

  const auto result = nilm::disagg::run_hybrid(load, cfg.hybrid);
  const auto fit_disagg = nilm::model::fit(result.shiftable, result.fixed,
                                           theta, cost, cfg.fit, grid);

  nilm::io::ReportInputs report;
  report.disagg = &result;
  report.fit_disagg = &fit_disagg;
  report.theta = &theta;
  report.cost = &cost;
  report.grid = &grid;

  json summary{{"command", "pipeline"},
               {"out", args.out_dir},
               {"iterations", result.iterations_run},
               {"fit_status", nilm::qp::to_string(fit_disagg.status)},
               {"fit_kkt_residual", fit_disagg.kkt_residual}};

  std::optional<nilm::model::FitResult> fit_real;
  std::optional<nilm::synth::ParameterRecovery> recovery;
  if (truth) {
    fit_real = nilm::model::fit(truth->shiftable, truth->fixed, theta, cost,
                                cfg.fit, grid);
    recovery = nilm::synth::score_parameter_recovery(truth->params_used,
                                                     *fit_real, fit_disagg);
    report.fit_real = &*fit_real;
    report.recovery = &*recovery;

    const auto score = nilm::synth::score_disaggregation(*truth, result);
    write_metrics(out / "metrics.json",
                  json{{"disaggregation", score_to_json(score)}});
    summary["f1"] = score.f1;
    summary["shiftable_error"] = score.shiftable_error;
  }

  nilm::io::write_report(out, report);
  emit_summary(summary);
  return fit_disagg.status == nilm::qp::SolveStatus::Optimal ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Load disaggregation and semi-parametric consumer modeling"};
  app.require_subcommand(1);

  CommonArgs common;
  FitArgs fit_args;
  PipelineArgs pipeline_args;
  std::string loads_path, truth_dir, result_dir, fit_real_path, fit_disagg_path;

  auto add_common = [&](CLI::App* cmd, bool out_required = true) {
    cmd->add_option("--config", common.config_path, "JSON run configuration");
    auto* out = cmd->add_option("--out", common.out_dir, "output directory");
    if (out_required) out->required();
    cmd->add_option("--seed", common.seed, "override the configured seed");
  };

  auto* simulate = app.add_subcommand("simulate", "generate a synthetic household");
  add_common(simulate);

  auto* disagg_cmd =
      app.add_subcommand("disaggregate", "split a metered load into components");
  add_common(disagg_cmd);
  disagg_cmd->add_option("--loads", loads_path, "total load CSV")->required();

  auto* fit_cmd = app.add_subcommand("fit", "fit the consumer model to components");
  add_common(fit_cmd);
  fit_cmd->add_option("--shiftable", fit_args.shiftable, "shiftable CSV")->required();
  fit_cmd->add_option("--fixed", fit_args.fixed, "fixed CSV")->required();
  fit_cmd->add_option("--temps", fit_args.temps, "temperature CSV")->required();
  fit_cmd->add_option("--prices", fit_args.prices, "price CSV")->required();
  fit_cmd->add_option("--pin-q", fit_args.pin_q, "pin q to zero (true/false)");

  auto* evaluate =
      app.add_subcommand("evaluate", "score a result directory against ground truth");
  add_common(evaluate);
  evaluate->add_option("--truth-dir", truth_dir, "simulate output directory")->required();
  evaluate->add_option("--result-dir", result_dir, "disaggregate output directory")->required();
  evaluate->add_option("--fit-real", fit_real_path, "fit.json from real components");
  evaluate->add_option("--fit-disagg", fit_disagg_path, "fit.json from estimates");

  auto* pipeline = app.add_subcommand(
      "pipeline", "simulate or ingest, then disaggregate, fit and evaluate");
  add_common(pipeline);
  pipeline->add_option("--loads", pipeline_args.loads, "total load CSV (skips simulation)");
  pipeline->add_option("--temps", pipeline_args.temps, "temperature CSV");
  pipeline->add_option("--prices", pipeline_args.prices, "price CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return run_simulate(common);
    if (disagg_cmd->parsed()) return run_disaggregate(common, loads_path);
    if (fit_cmd->parsed()) return run_fit(common, fit_args);
    if (evaluate->parsed()) {
      return run_evaluate(common, truth_dir, result_dir, fit_real_path,
                          fit_disagg_path);
    }
    if (pipeline->parsed()) return run_pipeline(common, pipeline_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
