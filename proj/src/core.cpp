#include "nilm/core.hpp"

#include <algorithm>
#include <cmath>

namespace nilm {

TimeGrid::TimeGrid(int instants_per_day, int periods_per_day)
    : instants_per_day_(instants_per_day),
      periods_per_day_(periods_per_day),
      instants_per_period_(0) {
  if (instants_per_day < 1 || periods_per_day < 1) {
    throw ConfigError("TimeGrid: counts must be >= 1");
  }
  if (instants_per_day % periods_per_day != 0) {
    throw ConfigError("TimeGrid: " + std::to_string(instants_per_day) +
                      " instants not divisible into " +
                      std::to_string(periods_per_day) + " periods");
  }
  instants_per_period_ = instants_per_day / periods_per_day;
}

const char* to_string(LoadRole role) {
  switch (role) {
    case LoadRole::Total: return "total";
    case LoadRole::Fixed: return "fixed";
    case LoadRole::Shiftable: return "shiftable";
    case LoadRole::FixedEstimate: return "fixed-estimate";
    case LoadRole::ShiftableEstimate: return "shiftable-estimate";
  }
  return "?";
}

bool is_estimate(LoadRole role) {
  return role == LoadRole::FixedEstimate || role == LoadRole::ShiftableEstimate;
}

void validate(const LoadMatrix& load) {
  if (!load.values.allFinite()) {
    throw DataError(std::string("LoadMatrix(") + to_string(load.role) +
                    "): non-finite entry");
  }
  if (load.values.size() > 0 && load.values.minCoeff() < 0.0) {
    throw DataError(std::string("LoadMatrix(") + to_string(load.role) +
                    "): negative entry");
  }
}

void validate(const TemperatureMatrix& theta) {
  if (!theta.values.allFinite()) {
    throw DataError("TemperatureMatrix: non-finite entry");
  }
}

void validate(const CostVector& cost) {
  if (!cost.values.allFinite()) {
    throw DataError("CostVector: non-finite entry");
  }
  if (cost.values.size() == 0 || cost.values.minCoeff() <= 0.0) {
    throw DataError("CostVector: every price must be > 0");
  }
}

int period_of(int t, const TimeGrid& grid) {
  if (t < 0 || t >= grid.instants_per_day()) {
    throw std::out_of_range("period_of: instant " + std::to_string(t) +
                            " outside [0, " +
                            std::to_string(grid.instants_per_day()) + ")");
  }
  return t / grid.instants_per_period();
}

Vector sum_to_periods(const Vector& x, const TimeGrid& grid) {
  if (x.size() != grid.instants_per_day()) {
    throw DimensionError("sum_to_periods: vector length " +
                         std::to_string(x.size()) + " != |T| = " +
                         std::to_string(grid.instants_per_day()));
  }
  const int K = grid.periods_per_day();
  const int L = grid.instants_per_period();
  Vector out(K);
  for (int k = 0; k < K; ++k) {
    out[k] = x.segment(static_cast<Eigen::Index>(k) * L, L).sum();
  }
  return out;
}

Matrix sum_to_periods(const Matrix& x, const TimeGrid& grid) {
  if (x.rows() != grid.instants_per_day()) {
    throw DimensionError("sum_to_periods: matrix has " +
                         std::to_string(x.rows()) + " rows, expected |T| = " +
                         std::to_string(grid.instants_per_day()));
  }
  const int K = grid.periods_per_day();
  const int L = grid.instants_per_period();
  Matrix out(K, x.cols());
  for (int k = 0; k < K; ++k) {
    out.row(k) = x.middleRows(static_cast<Eigen::Index>(k) * L, L).colwise().sum();
  }
  return out;
}

double clamp_nonnegative(Matrix& values) {
  double clamped = 0.0;
  for (Eigen::Index j = 0; j < values.cols(); ++j) {
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
      double& v = values(i, j);
      if (v < 0.0) {
        clamped -= v;
        v = 0.0;
      }
    }
  }
  return clamped;
}

double quantile_sorted(const std::vector<double>& sorted, double level) {
  if (sorted.empty()) {
    throw DataError("quantile_sorted: empty sample");
  }
  level = std::clamp(level, 0.0, 1.0);
  const double pos = level * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

double pearson(const Vector& a, const Vector& b) {
  if (a.size() != b.size() || a.size() == 0) {
    throw DimensionError("pearson: length mismatch");
  }
  const double ma = a.mean();
  const double mb = b.mean();
  const Vector da = a.array() - ma;
  const Vector db = b.array() - mb;
  const double va = da.squaredNorm();
  const double vb = db.squaredNorm();
  if (va == 0.0 || vb == 0.0) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return da.dot(db) / std::sqrt(va * vb);
}

double median(const Vector& v) {
  if (v.size() == 0) {
    throw DataError("median: empty vector");
  }
  std::vector<double> s(v.data(), v.data() + v.size());
  std::sort(s.begin(), s.end());
  const std::size_t n = s.size();
  if (n % 2 == 1) {
    return s[n / 2];
  }
  return 0.5 * (s[n / 2 - 1] + s[n / 2]);
}

}  // namespace nilm
