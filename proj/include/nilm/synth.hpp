#pragma once

#include "nilm/core.hpp"
#include "nilm/disagg.hpp"
#include "nilm/model.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace nilm::synth {

/// A discrete-level appliance: ON runs at a fixed power draw, scheduled by
/// an expected ON fraction per period that responds to price and weather.
struct Appliance {
  std::string name;
  double power_kw = 2.0;      ///< > 0, the discrete ON level
  Vector base_duty;           ///< |K| expected ON fraction per period, [0,1]
  int min_run = 10;           ///< instants
  int max_run = 120;          ///< instants
  double price_elasticity = 0.0;  ///< duty *= (ref_price / c_k)^elasticity
  double temp_coef = 0.0;         ///< duty *= (1 + temp_coef (theta - ref))_+
};

/// Smooth always-on base consumption, optionally coupled to temperature,
/// with optional short bursts (the "fixed load spikes" stress ingredient).
struct FixedProfile {
  double base_kw = 0.30;
  double amplitude_kw = 0.12;
  double floor_kw = 0.05;
  double day_jitter = 0.05;  ///< relative day-to-day rescaling (std)
  double temp_coef = 0.0;    ///< kW per degree above reference
  double spike_rate_per_day = 0.0;
  double spike_kw = 0.0;
  int spike_max_len = 2;
};

struct TemperatureModel {
  double mean_c = 22.0;
  double amplitude_c = 6.0;   ///< daily swing
  double day_std_c = 4.0;     ///< day-to-day offset std
  int peak_period = 15;       ///< hottest period of the day
};

struct ScenarioSpec {
  TimeGrid grid{1440, 24};
  int n_days = 61;
  std::vector<Appliance> appliances;
  FixedProfile fixed;
  TemperatureModel temperature;
  Vector prices;             ///< |K| TOU prices, > 0
  double ref_price = 0.10;   ///< price at which elasticities are neutral
  double noise_std = 0.02;   ///< kW, zero-mean Gaussian on the total
  std::optional<model::UtilityParams> true_params;  ///< drives period targets
  std::uint64_t seed = 1;
};

void validate(const ScenarioSpec& spec);

/// The paper-scale default: four well-separated appliance classes (EV,
/// washer/dryer, air conditioner, dishwasher), a smooth fixed base and a
/// peak/off-peak price vector at 1440 x 61.
ScenarioSpec default_scenario();

/// Variant with appliance levels close to the fixed-load range plus fixed
/// bursts, reproducing the hard "similar power levels" regime.
ScenarioSpec stress_scenario();

struct GroundTruth {
  LoadMatrix total;      ///< shiftable + fixed + noise, clamped at 0
  LoadMatrix shiftable;
  LoadMatrix fixed;
  Matrix noise;          ///< exactly total - shiftable - fixed
  TemperatureMatrix theta;
  CostVector cost;
  std::optional<model::UtilityParams> params_used;
  double min_appliance_level = 0.0;
  double clamp_mass = 0.0;
};

/// Deterministic forward model of the additive decomposition. Each day has
/// its own derived random stream, so day contents do not depend on how
/// many days are generated.
GroundTruth generate(const ScenarioSpec& spec);

struct DisaggScore {
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  long true_positives = 0;
  long false_positives = 0;
  long false_negatives = 0;
  double on_threshold = 0.0;       ///< half the smallest appliance level
  double shiftable_error = 0.0;    ///< ||est - truth||_F / ||truth||_F
  double fixed_error = 0.0;
  double total_error = 0.0;        ///< reconstruction vs the metered total
  double shiftable_energy_ratio = 1.0;  ///< sum(est) / sum(truth)
};

/// ON/OFF detection quality and normalized energy errors of a
/// disaggregation result against ground truth.
DisaggScore score_disaggregation(const GroundTruth& truth,
                                 const disagg::DisaggResult& result);

struct RecoveryRow {
  std::string name;  // a, b, d, p, q
  double median_real = 0.0;
  double median_disagg = 0.0;
  std::optional<double> corr_real_disagg;  ///< empty when undefined
  std::optional<double> corr_true_real;
  std::optional<double> corr_true_disagg;
};

struct ParameterRecovery {
  std::vector<RecoveryRow> rows;  // in order a, b, d, p, q
};

/// Per-parameter medians and Pearson correlations between the fit on real
/// components, the fit on disaggregated estimates, and (when known) the
/// generating parameters. Zero-variance vectors yield empty correlations.
ParameterRecovery score_parameter_recovery(
    const std::optional<model::UtilityParams>& true_params,
    const model::FitResult& fit_real, const model::FitResult& fit_disagg);

}  // namespace nilm::synth
