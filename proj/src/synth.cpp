#include "nilm/synth.hpp"

#include "nilm/rng.hpp"

#include <algorithm>
#include <cmath>

namespace nilm::synth {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

Vector window_duty(int periods, int first, int last, double duty) {
  Vector v = Vector::Zero(periods);
  for (int k = first; k <= last && k < periods; ++k) v[k] = duty;
  return v;
}

double smooth_shape(double tau) {
  // Smooth daily signature in roughly [-1, 1]: low at night, higher with a
  // morning and an evening hump.
  return 0.55 * std::sin(kTwoPi * tau - 2.0) + 0.45 * std::sin(2.0 * kTwoPi * tau + 0.9);
}

std::optional<double> corr_or_empty(const Vector& a, const Vector& b) {
  const double c = pearson(a, b);
  if (std::isnan(c)) return std::nullopt;
  return c;
}

}  // namespace

void validate(const ScenarioSpec& spec) {
  if (spec.n_days < 1) throw ConfigError("scenario: n_days must be >= 1");
  if (spec.noise_std < 0.0) throw ConfigError("scenario: noise_std must be >= 0");
  if (spec.prices.size() != spec.grid.periods_per_day()) {
    throw ConfigError("scenario: price vector must have |K| entries");
  }
  if (spec.prices.minCoeff() <= 0.0) {
    throw ConfigError("scenario: prices must be > 0");
  }
  if (spec.ref_price <= 0.0) throw ConfigError("scenario: ref_price must be > 0");
  for (const Appliance& ap : spec.appliances) {
    if (ap.power_kw <= 0.0) {
      throw ConfigError("scenario: appliance '" + ap.name + "' needs power > 0");
    }
    if (ap.base_duty.size() != spec.grid.periods_per_day()) {
      throw ConfigError("scenario: appliance '" + ap.name + "' duty must have |K| entries");
    }
    if (ap.base_duty.minCoeff() < 0.0 || ap.base_duty.maxCoeff() > 1.0) {
      throw ConfigError("scenario: appliance '" + ap.name + "' duty outside [0,1]");
    }
    if (ap.min_run < 1 || ap.max_run < ap.min_run) {
      throw ConfigError("scenario: appliance '" + ap.name + "' run lengths invalid");
    }
  }
  if (spec.fixed.base_kw < 0.0 || spec.fixed.amplitude_kw < 0.0 ||
      spec.fixed.floor_kw < 0.0 || spec.fixed.spike_kw < 0.0 ||
      spec.fixed.spike_rate_per_day < 0.0) {
    throw ConfigError("scenario: fixed profile values must be >= 0");
  }
  if (spec.true_params) {
    if (spec.true_params->n_periods() != spec.grid.periods_per_day()) {
      throw ConfigError("scenario: true_params must have |K| entries");
    }
    validate(*spec.true_params);
  }
}

ScenarioSpec default_scenario() {
  ScenarioSpec spec;
  spec.grid = TimeGrid(1440, 24);
  spec.n_days = 61;
  spec.seed = 1;
  spec.noise_std = 0.02;

  const int K = spec.grid.periods_per_day();
  spec.prices = Vector::Constant(K, 0.10);
  for (int k = 0; k <= 6; ++k) spec.prices[k] = 0.06;
  for (int k = 14; k <= 19; ++k) spec.prices[k] = 0.22;
  for (int k = 22; k < K; ++k) spec.prices[k] = 0.06;

  Appliance ev{"ev_charger", 3.3, window_duty(K, 0, 5, 0.45), 60, 240, 0.6, 0.0};
  Appliance washer{"washer_dryer", 2.0, window_duty(K, 9, 12, 0.30), 30, 60, 0.3, 0.0};
  Appliance ac{"air_conditioner", 1.2, window_duty(K, 13, 19, 0.45), 15, 60, 0.2, 0.06};
  Appliance dish{"dishwasher", 4.5, window_duty(K, 20, 22, 0.30), 20, 45, 0.3, 0.0};
  spec.appliances = {ev, washer, ac, dish};

  spec.fixed = FixedProfile{};  // 0.30 kW base, 0.12 kW swing, no spikes
  spec.temperature = TemperatureModel{};
  return spec;
}

ScenarioSpec stress_scenario() {
  // Shiftable levels near the fixed-load range plus frequent fixed bursts
  // at appliance-like power: the regime where level extraction starts to
  // misattribute spikes.
  ScenarioSpec spec = default_scenario();
  const int K = spec.grid.periods_per_day();
  Appliance heater{"space_heater", 1.0, window_duty(K, 6, 21, 0.35), 10, 45, 0.2, 0.0};
  Appliance pump{"pool_pump", 1.4, window_duty(K, 8, 18, 0.35), 15, 60, 0.2, 0.0};
  spec.appliances = {heater, pump};
  spec.fixed.base_kw = 0.45;
  spec.fixed.amplitude_kw = 0.25;
  spec.fixed.spike_rate_per_day = 20.0;
  spec.fixed.spike_kw = 1.1;
  spec.fixed.spike_max_len = 2;
  return spec;
}

GroundTruth generate(const ScenarioSpec& spec) {
  validate(spec);
  const int T = spec.grid.instants_per_day();
  const int K = spec.grid.periods_per_day();
  const int L = spec.grid.instants_per_period();
  const int N = spec.n_days;

  GroundTruth truth;
  truth.theta.values = Matrix::Zero(K, N);
  truth.cost.values = spec.prices;
  truth.params_used = spec.true_params;

  Matrix fixed = Matrix::Zero(T, N);
  Matrix shiftable = Matrix::Zero(T, N);
  Matrix noise = Matrix::Zero(T, N);

  const Rng root(spec.seed);
  for (int n = 0; n < N; ++n) {
    Rng rng = root.derive(static_cast<std::uint64_t>(n));

    // Weather first: the day's temperature offset and per-period curve.
    const double offset = spec.temperature.day_std_c * rng.normal();
    for (int k = 0; k < K; ++k) {
      truth.theta.values(k, n) =
          spec.temperature.mean_c + offset +
          spec.temperature.amplitude_c *
              std::cos(kTwoPi * (k - spec.temperature.peak_period) / K);
    }

    // Fixed component: rescaled smooth curve, temperature coupling, bursts.
    const double scale = std::max(0.3, 1.0 + spec.fixed.day_jitter * rng.normal());
    for (int t = 0; t < T; ++t) {
      const int k = t / L;
      double v = scale * (spec.fixed.base_kw +
                          spec.fixed.amplitude_kw *
                              smooth_shape(static_cast<double>(t) / T));
      v += spec.fixed.temp_coef *
           (truth.theta.values(k, n) - spec.temperature.mean_c);
      fixed(t, n) = std::max(v, spec.fixed.floor_kw);
    }
    if (spec.fixed.spike_rate_per_day > 0.0 && spec.fixed.spike_kw > 0.0) {
      const double rate = spec.fixed.spike_rate_per_day;
      int count = static_cast<int>(rate);
      if (rng.uniform() < rate - count) ++count;
      for (int s = 0; s < count; ++s) {
        const int len = static_cast<int>(
            rng.uniform_int(1, std::max(1, spec.fixed.spike_max_len)));
        const int start = static_cast<int>(rng.uniform_int(0, T - 1));
        for (int t = start; t < std::min(start + len, T); ++t) {
          fixed(t, n) += spec.fixed.spike_kw;
        }
      }
    }

    // Shiftable appliances: one run per (appliance, period) whose expected
    // length matches the period's target minutes.
    for (const Appliance& ap : spec.appliances) {
      for (int k = 0; k < K; ++k) {
        double target = 0.0;  // minutes
        if (spec.true_params) {
          const model::UtilityParams& tp = *spec.true_params;
          const double energy =
              std::max(0.0, tp.a[k] / spec.prices[k] + tp.b[k] +
                                tp.d[k] * truth.theta.values(k, n));
          double wsum = 0.0;
          for (const Appliance& other : spec.appliances) {
            wsum += other.base_duty[k] * other.power_kw;
          }
          if (wsum > 0.0) {
            const double share = ap.base_duty[k] * ap.power_kw / wsum;
            target = energy * share / ap.power_kw;
          }
        } else {
          double duty = ap.base_duty[k];
          if (ap.price_elasticity != 0.0) {
            duty *= std::pow(spec.ref_price / spec.prices[k], ap.price_elasticity);
          }
          if (ap.temp_coef != 0.0) {
            duty *= std::max(
                0.0, 1.0 + ap.temp_coef * (truth.theta.values(k, n) -
                                           spec.temperature.mean_c));
          }
          target = std::clamp(duty, 0.0, 1.0) * L;
        }

        const int cap = std::min(L, ap.max_run);
        int len = 0;
        if (target >= ap.min_run) {
          len = static_cast<int>(std::floor(target));
          if (rng.uniform() < target - std::floor(target)) ++len;
          len = std::min(len, cap);
        } else if (target > 0.0) {
          // Stochastic rounding keeps the expected minutes on target even
          // below the minimum run length.
          if (rng.uniform() < target / ap.min_run) len = std::min(ap.min_run, cap);
        }
        if (len <= 0) continue;
        const int start =
            k * L + static_cast<int>(rng.uniform_int(0, L - len));
        for (int t = start; t < start + len; ++t) {
          shiftable(t, n) += ap.power_kw;
        }
      }
    }

    for (int t = 0; t < T; ++t) {
      noise(t, n) = spec.noise_std > 0.0 ? rng.normal(0.0, spec.noise_std) : 0.0;
    }
  }

  Matrix total = shiftable + fixed + noise;
  truth.clamp_mass = clamp_nonnegative(total);

  truth.total = LoadMatrix{std::move(total), LoadRole::Total};
  truth.shiftable = LoadMatrix{std::move(shiftable), LoadRole::Shiftable};
  truth.fixed = LoadMatrix{std::move(fixed), LoadRole::Fixed};
  // Stored realization keeps the decomposition identity exact after the
  // clamp: total == shiftable + fixed + noise.
  truth.noise = truth.total.values - truth.shiftable.values - truth.fixed.values;

  truth.min_appliance_level = 0.0;
  for (const Appliance& ap : spec.appliances) {
    truth.min_appliance_level = truth.min_appliance_level == 0.0
                                    ? ap.power_kw
                                    : std::min(truth.min_appliance_level, ap.power_kw);
  }
  return truth;
}

DisaggScore score_disaggregation(const GroundTruth& truth,
                                 const disagg::DisaggResult& result) {
  const Matrix& ts = truth.shiftable.values;
  const Matrix& es = result.shiftable.values;
  if (ts.rows() != es.rows() || ts.cols() != es.cols()) {
    throw DimensionError("score_disaggregation: shape mismatch");
  }

  DisaggScore score;
  score.on_threshold = 0.5 * truth.min_appliance_level;
  for (Eigen::Index j = 0; j < ts.cols(); ++j) {
    for (Eigen::Index i = 0; i < ts.rows(); ++i) {
      const bool truth_on = ts(i, j) > score.on_threshold;
      const bool pred_on = es(i, j) > score.on_threshold;
      if (truth_on && pred_on) ++score.true_positives;
      else if (!truth_on && pred_on) ++score.false_positives;
      else if (truth_on && !pred_on) ++score.false_negatives;
    }
  }
  const double tp = static_cast<double>(score.true_positives);
  const double fp = static_cast<double>(score.false_positives);
  const double fn = static_cast<double>(score.false_negatives);
  score.precision = (tp + fp) > 0.0 ? tp / (tp + fp) : 1.0;
  score.recall = (tp + fn) > 0.0 ? tp / (tp + fn) : 1.0;
  score.f1 = (score.precision + score.recall) > 0.0
                 ? 2.0 * score.precision * score.recall /
                       (score.precision + score.recall)
                 : 0.0;

  const double tiny = 1e-12;
  score.shiftable_error =
      (es - ts).norm() / std::max(ts.norm(), tiny);
  score.fixed_error = (result.fixed.values - truth.fixed.values).norm() /
                      std::max(truth.fixed.values.norm(), tiny);
  score.total_error =
      (result.total_estimate.values - truth.total.values).norm() /
      std::max(truth.total.values.norm(), tiny);
  score.shiftable_energy_ratio = es.sum() / std::max(ts.sum(), tiny);
  return score;
}

ParameterRecovery score_parameter_recovery(
    const std::optional<model::UtilityParams>& true_params,
    const model::FitResult& fit_real, const model::FitResult& fit_disagg) {
  const model::UtilityParams& pr = fit_real.params;
  const model::UtilityParams& pd = fit_disagg.params;
  if (pr.n_periods() != pd.n_periods()) {
    throw DimensionError("score_parameter_recovery: |K| mismatch");
  }

  ParameterRecovery out;
  const char* names[5] = {"a", "b", "d", "p", "q"};
  const Vector* real[5] = {&pr.a, &pr.b, &pr.d, &pr.p, &pr.q};
  const Vector* dis[5] = {&pd.a, &pd.b, &pd.d, &pd.p, &pd.q};
  const Vector* tru[5] = {nullptr, nullptr, nullptr, nullptr, nullptr};
  if (true_params) {
    tru[0] = &true_params->a;
    tru[1] = &true_params->b;
    tru[2] = &true_params->d;
    tru[3] = &true_params->p;
    tru[4] = &true_params->q;
  }

  for (int i = 0; i < 5; ++i) {
    RecoveryRow row;
    row.name = names[i];
    row.median_real = median(*real[i]);
    row.median_disagg = median(*dis[i]);
    row.corr_real_disagg = corr_or_empty(*real[i], *dis[i]);
    if (tru[i]) {
      row.corr_true_real = corr_or_empty(*tru[i], *real[i]);
      row.corr_true_disagg = corr_or_empty(*tru[i], *dis[i]);
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

}  // namespace nilm::synth
