#pragma once

#include "nilm/core.hpp"
#include "nilm/disagg.hpp"
#include "nilm/model.hpp"
#include "nilm/synth.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace nilm::io {

namespace fs = std::filesystem;

struct Metadata {
  std::string units = "kw";
  std::string source = "synthetic";
};

struct DatasetBundle {
  LoadMatrix load;
  TemperatureMatrix theta;
  CostVector cost;
  TimeGrid grid{1440, 24};
  Metadata metadata;
};

/// Long-form CSV `day,instant,kw`: every (day, instant) cell must be
/// present exactly once; negatives and gaps are hard errors with the
/// offending line or indices named.
LoadMatrix ingest_loads(const fs::path& path, const TimeGrid& grid);

/// `day,period,temp`, dense over (day, period).
TemperatureMatrix ingest_temperatures(const fs::path& path, const TimeGrid& grid);

/// `period,price`, one row per period, prices strictly positive.
CostVector ingest_prices(const fs::path& path, const TimeGrid& grid);

/// Writers emit shortest-round-trip decimals, so ingest(write(m)) == m.
void write_loads(const fs::path& path, const LoadMatrix& load);
void write_temperatures(const fs::path& path, const TemperatureMatrix& theta);
void write_prices(const fs::path& path, const CostVector& cost);

/// Full run configuration; every module's preconditions are validated at
/// parse time. Unknown keys are rejected by name.
struct RunConfig {
  disagg::HybridConfig hybrid;
  model::FitConfig fit;
  synth::ScenarioSpec scenario = synth::default_scenario();
};

RunConfig default_run_config();
RunConfig load_run_config(const fs::path& path);
RunConfig parse_run_config(const std::string& json_text);

/// Everything a report can carry; absent pieces are skipped.
struct ReportInputs {
  const disagg::DisaggResult* disagg = nullptr;
  const model::FitResult* fit_disagg = nullptr;
  const model::FitResult* fit_real = nullptr;
  const synth::ParameterRecovery* recovery = nullptr;
  const TemperatureMatrix* theta = nullptr;
  const CostVector* cost = nullptr;
  const TimeGrid* grid = nullptr;
};

/// Emits the run artifacts into `dir`: disagg_shiftable.csv,
/// disagg_fixed.csv, diagnostics.csv, run.json, nmf_basis.csv,
/// nmf_coeffs.csv, fit.json (and fit_real.json), table1.csv, profiles.csv.
/// Output bytes depend only on the inputs.
void write_report(const fs::path& dir, const ReportInputs& inputs);

void write_fit_json(const fs::path& path, const model::FitResult& fit);
model::FitResult read_fit_json(const fs::path& path);

void write_table1(const fs::path& path, const synth::ParameterRecovery& recovery);

/// Ground-truth export in the same schema ingest reads back.
void write_ground_truth(const fs::path& dir, const synth::GroundTruth& truth);

struct TruthFiles {
  LoadMatrix total;
  LoadMatrix shiftable;
  LoadMatrix fixed;
  TemperatureMatrix theta;
  CostVector cost;
  std::optional<model::UtilityParams> true_params;
  double min_appliance_level = 0.0;
};

TruthFiles read_ground_truth(const fs::path& dir, const TimeGrid& grid);

}  // namespace nilm::io
