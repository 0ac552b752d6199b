#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace nilm {

// Error categories used across the library. Everything derives from
// std::runtime_error so callers can catch coarsely or precisely.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};
struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};
struct DimensionError : std::runtime_error {
  explicit DimensionError(const std::string& msg) : std::runtime_error(msg) {}
};

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Partition of a day into |T| instants grouped into |K| equal periods of
/// L = |T|/|K| instants each (e.g. 1440 minutes -> 24 hours, L = 60).
class TimeGrid {
 public:
  TimeGrid(int instants_per_day, int periods_per_day);

  int instants_per_day() const { return instants_per_day_; }
  int periods_per_day() const { return periods_per_day_; }
  int instants_per_period() const { return instants_per_period_; }

  bool operator==(const TimeGrid&) const = default;

 private:
  int instants_per_day_;
  int periods_per_day_;
  int instants_per_period_;
};

/// Which physical quantity a load matrix holds. Estimate roles come out of
/// the disaggregation stage and may have been clamped at zero.
enum class LoadRole { Total, Fixed, Shiftable, FixedEstimate, ShiftableEstimate };

const char* to_string(LoadRole role);
bool is_estimate(LoadRole role);

/// |T| x |N| matrix of per-instant load samples (column n = day n).
/// Entries are average kW over the instant; period sums are then kW*min.
struct LoadMatrix {
  Matrix values;
  LoadRole role = LoadRole::Total;

  Eigen::Index instants() const { return values.rows(); }
  Eigen::Index n_days() const { return values.cols(); }
};

/// Throws DataError unless every entry is finite and, for the non-estimate
/// roles, non-negative. Estimate roles must already be clamped; a negative
/// entry there is a programming error upstream.
void validate(const LoadMatrix& load);

/// |K| x |N| period-average ambient temperatures.
struct TemperatureMatrix {
  Matrix values;
};

/// |K| strictly positive unit prices, constant across days.
struct CostVector {
  Vector values;
};

void validate(const TemperatureMatrix& theta);
void validate(const CostVector& cost);

/// Period index of instant t, i.e. floor(t / L).
int period_of(int t, const TimeGrid& grid);

/// Applies the |K| x |T| block summing matrix to a per-instant vector:
/// output entry k is the sum of the L instants belonging to period k.
Vector sum_to_periods(const Vector& x, const TimeGrid& grid);

/// Column-wise variant: |T| x |N| -> |K| x |N| (each day summed separately).
Matrix sum_to_periods(const Matrix& x, const TimeGrid& grid);

/// Clamps negative entries of an estimate matrix to zero in place and
/// returns the total mass removed (sum of |negative part|).
double clamp_nonnegative(Matrix& values);

/// Interpolating sample quantile (type 7) of the values in `sorted`, which
/// must be ascending. level in [0, 1].
double quantile_sorted(const std::vector<double>& sorted, double level);

/// Pearson correlation of two equal-length vectors; NaN when either side
/// has zero variance.
double pearson(const Vector& a, const Vector& b);

/// Median of a vector (average of the two middle values for even length).
double median(const Vector& v);

/// Compensated (Kahan) summation, used where tests pin tight tolerances on
/// long reductions.
class KahanSum {
 public:
  void add(double value) {
    double y = value - compensation_;
    double t = sum_ + y;
    compensation_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

}  // namespace nilm
