#include "nilm/io.hpp"

#include "nilm/number_io.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <vector>

namespace nilm::io {

using nlohmann::json;

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);  // byte-stable newlines
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

/// Shared engine for the dense long-form CSVs: `header` names the columns,
/// the first two are integer indices in [0, rows) x [0, cols).
Matrix read_dense_csv(const fs::path& path, const std::string& header,
                      Eigen::Index rows, Eigen::Index cols,
                      bool reject_negative) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": no rows");
  if (strip_cr(line) != header) {
    throw DataError(path.string() + ": expected header '" + header + "'");
  }

  Matrix values = Matrix::Zero(rows, cols);
  std::vector<char> seen(static_cast<std::size_t>(rows * cols), 0);
  long line_no = 1;
  bool any = false;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != 3) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": expected 3 fields");
    }
    long col, row;
    double value;
    try {
      col = parse_long(fields[0]);
      row = parse_long(fields[1]);
      value = parse_double(fields[2]);
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " +
                      e.what());
    }
    if (col < 0 || col >= cols || row < 0 || row >= rows) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": index out of range");
    }
    if (reject_negative && value < 0.0) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": negative value");
    }
    if (!std::isfinite(value)) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": non-finite value");
    }
    const auto cell = static_cast<std::size_t>(row * cols + col);
    if (seen[cell]) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": duplicate cell");
    }
    seen[cell] = 1;
    values(row, col) = value;
    any = true;
  }
  if (!any) throw DataError(path.string() + ": no rows");

  std::string missing;
  int missing_count = 0;
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) {
      if (!seen[static_cast<std::size_t>(r * cols + c)]) {
        if (missing_count < 8) {
          missing += " (" + std::to_string(c) + "," + std::to_string(r) + ")";
        }
        ++missing_count;
      }
    }
  }
  if (missing_count > 0) {
    throw DataError(path.string() + ": " + std::to_string(missing_count) +
                    " missing (day,index) cells:" + missing +
                    (missing_count > 8 ? " ..." : ""));
  }
  return values;
}

void write_dense_csv(const fs::path& path, const std::string& header,
                     const Matrix& values) {
  std::ofstream out = open_output(path);
  out << header << '\n';
  for (Eigen::Index c = 0; c < values.cols(); ++c) {
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
      out << c << ',' << r << ',' << format_double(values(r, c)) << '\n';
    }
  }
}

Vector json_to_vector(const json& j, const std::string& what) {
  if (!j.is_array()) throw ConfigError(what + ": expected an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  Eigen::Index i = 0;
  for (const auto& item : j) {
    if (!item.is_number()) throw ConfigError(what + ": expected numbers");
    v[i++] = item.get<double>();
  }
  return v;
}

json vector_to_json(const Vector& v) {
  json j = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

void reject_unknown(const json& obj, std::initializer_list<const char*> known,
                    const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : known) {
      if (it.key() == k) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw ConfigError("unknown config key '" + it.key() + "' in " + where);
    }
  }
}

synth::Appliance parse_appliance(const json& j, int periods) {
  reject_unknown(j,
                 {"name", "power_kw", "min_run", "max_run", "price_elasticity",
                  "temp_coef", "duty", "window", "window_duty"},
                 "appliance");
  synth::Appliance ap;
  ap.base_duty = Vector::Zero(periods);
  if (j.contains("name")) ap.name = j["name"].get<std::string>();
  if (j.contains("power_kw")) ap.power_kw = j["power_kw"].get<double>();
  if (j.contains("min_run")) ap.min_run = j["min_run"].get<int>();
  if (j.contains("max_run")) ap.max_run = j["max_run"].get<int>();
  if (j.contains("price_elasticity")) {
    ap.price_elasticity = j["price_elasticity"].get<double>();
  }
  if (j.contains("temp_coef")) ap.temp_coef = j["temp_coef"].get<double>();
  if (j.contains("duty")) {
    ap.base_duty = json_to_vector(j["duty"], "appliance duty");
  } else if (j.contains("window")) {
    const auto& w = j["window"];
    if (!w.is_array() || w.size() != 2) {
      throw ConfigError("appliance window: expected [first, last]");
    }
    const double duty = j.contains("window_duty") ? j["window_duty"].get<double>() : 0.3;
    for (int k = w[0].get<int>(); k <= w[1].get<int>() && k < periods; ++k) {
      if (k >= 0) ap.base_duty[k] = duty;
    }
  }
  return ap;
}

model::UtilityParams parse_params(const json& j) {
  reject_unknown(j, {"a", "b", "d", "p", "q"}, "true_params");
  model::UtilityParams tp;
  tp.a = json_to_vector(j.at("a"), "true_params.a");
  tp.b = json_to_vector(j.at("b"), "true_params.b");
  tp.d = json_to_vector(j.at("d"), "true_params.d");
  tp.p = json_to_vector(j.at("p"), "true_params.p");
  tp.q = j.contains("q") ? json_to_vector(j["q"], "true_params.q")
                         : Vector::Zero(tp.a.size()).eval();
  return tp;
}

void parse_scenario(const json& j, synth::ScenarioSpec& spec) {
  reject_unknown(j,
                 {"grid", "n_days", "seed", "noise_std", "ref_price", "prices",
                  "temperature", "fixed", "appliances", "true_params"},
                 "scenario");
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    reject_unknown(g, {"instants_per_day", "periods_per_day"}, "scenario.grid");
    spec.grid = TimeGrid(g.at("instants_per_day").get<int>(),
                         g.at("periods_per_day").get<int>());
  }
  const int K = spec.grid.periods_per_day();
  if (j.contains("n_days")) spec.n_days = j["n_days"].get<int>();
  if (j.contains("seed")) spec.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("noise_std")) spec.noise_std = j["noise_std"].get<double>();
  if (j.contains("ref_price")) spec.ref_price = j["ref_price"].get<double>();
  if (j.contains("prices")) {
    spec.prices = json_to_vector(j["prices"], "scenario.prices");
  }
  if (spec.prices.size() != K) {
    // Grid changed without explicit prices: spread the default TOU shape.
    spec.prices = Vector::Constant(K, 0.10);
  }
  if (j.contains("temperature")) {
    const auto& t = j["temperature"];
    reject_unknown(t, {"mean", "amplitude", "day_std", "peak_period"},
                   "scenario.temperature");
    if (t.contains("mean")) spec.temperature.mean_c = t["mean"].get<double>();
    if (t.contains("amplitude")) spec.temperature.amplitude_c = t["amplitude"].get<double>();
    if (t.contains("day_std")) spec.temperature.day_std_c = t["day_std"].get<double>();
    if (t.contains("peak_period")) spec.temperature.peak_period = t["peak_period"].get<int>();
  }
  if (j.contains("fixed")) {
    const auto& f = j["fixed"];
    reject_unknown(f,
                   {"base_kw", "amplitude_kw", "floor_kw", "day_jitter",
                    "temp_coef", "spike_rate_per_day", "spike_kw", "spike_max_len"},
                   "scenario.fixed");
    if (f.contains("base_kw")) spec.fixed.base_kw = f["base_kw"].get<double>();
    if (f.contains("amplitude_kw")) spec.fixed.amplitude_kw = f["amplitude_kw"].get<double>();
    if (f.contains("floor_kw")) spec.fixed.floor_kw = f["floor_kw"].get<double>();
    if (f.contains("day_jitter")) spec.fixed.day_jitter = f["day_jitter"].get<double>();
    if (f.contains("temp_coef")) spec.fixed.temp_coef = f["temp_coef"].get<double>();
    if (f.contains("spike_rate_per_day")) spec.fixed.spike_rate_per_day = f["spike_rate_per_day"].get<double>();
    if (f.contains("spike_kw")) spec.fixed.spike_kw = f["spike_kw"].get<double>();
    if (f.contains("spike_max_len")) spec.fixed.spike_max_len = f["spike_max_len"].get<int>();
  }
  if (j.contains("appliances")) {
    spec.appliances.clear();
    for (const auto& a : j["appliances"]) {
      spec.appliances.push_back(parse_appliance(a, K));
    }
  }
  if (j.contains("true_params")) {
    spec.true_params = parse_params(j["true_params"]);
  }
}

json params_to_json(const model::UtilityParams& p) {
  return json{{"a", vector_to_json(p.a)}, {"b", vector_to_json(p.b)},
              {"d", vector_to_json(p.d)}, {"p", vector_to_json(p.p)},
              {"q", vector_to_json(p.q)}};
}

}  // namespace

LoadMatrix ingest_loads(const fs::path& path, const TimeGrid& grid) {
  // Column count is inferred from the largest day index present.
  std::ifstream probe = open_input(path);
  std::string line;
  std::getline(probe, line);
  long max_day = -1;
  long line_no = 1;
  while (std::getline(probe, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.empty()) continue;
    try {
      max_day = std::max(max_day, parse_long(fields[0]));
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " +
                      e.what());
    }
  }
  if (max_day < 0) throw DataError(path.string() + ": no rows");

  LoadMatrix load;
  load.role = LoadRole::Total;
  load.values = read_dense_csv(path, "day,instant,kw", grid.instants_per_day(),
                               max_day + 1, /*reject_negative=*/true);
  return load;
}

TemperatureMatrix ingest_temperatures(const fs::path& path, const TimeGrid& grid) {
  std::ifstream probe = open_input(path);
  std::string line;
  std::getline(probe, line);
  long max_day = -1;
  while (std::getline(probe, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.empty()) continue;
    max_day = std::max(max_day, parse_long(fields[0]));
  }
  if (max_day < 0) throw DataError(path.string() + ": no rows");
  TemperatureMatrix theta;
  theta.values = read_dense_csv(path, "day,period,temp", grid.periods_per_day(),
                                max_day + 1, /*reject_negative=*/false);
  return theta;
}

CostVector ingest_prices(const fs::path& path, const TimeGrid& grid) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": no rows");
  if (strip_cr(line) != "period,price") {
    throw DataError(path.string() + ": expected header 'period,price'");
  }
  const Eigen::Index K = grid.periods_per_day();
  CostVector cost;
  cost.values = Vector::Zero(K);
  std::vector<char> seen(static_cast<std::size_t>(K), 0);
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != 2) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": expected 2 fields");
    }
    const long k = parse_long(fields[0]);
    const double price = parse_double(fields[1]);
    if (k < 0 || k >= K) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": period out of range");
    }
    if (seen[static_cast<std::size_t>(k)]) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": duplicate period");
    }
    if (!(price > 0.0)) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": price must be > 0");
    }
    seen[static_cast<std::size_t>(k)] = 1;
    cost.values[k] = price;
  }
  std::string missing;
  int missing_count = 0;
  for (Eigen::Index k = 0; k < K; ++k) {
    if (!seen[static_cast<std::size_t>(k)]) {
      if (missing_count < 8) missing += " " + std::to_string(k);
      ++missing_count;
    }
  }
  if (missing_count > 0) {
    throw DataError(path.string() + ": missing periods:" + missing +
                    (missing_count > 8 ? " ..." : ""));
  }
  return cost;
}

void write_loads(const fs::path& path, const LoadMatrix& load) {
  write_dense_csv(path, "day,instant,kw", load.values);
}

void write_temperatures(const fs::path& path, const TemperatureMatrix& theta) {
  write_dense_csv(path, "day,period,temp", theta.values);
}

void write_prices(const fs::path& path, const CostVector& cost) {
  std::ofstream out = open_output(path);
  out << "period,price\n";
  for (Eigen::Index k = 0; k < cost.values.size(); ++k) {
    out << k << ',' << format_double(cost.values[k]) << '\n';
  }
}

RunConfig default_run_config() { return RunConfig{}; }

RunConfig parse_run_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  reject_unknown(j,
                 {"gaussians", "bases", "max_iters", "rel_tol", "seed",
                  "variance_floor", "em_cycles", "drift_bound", "eps_f",
                  "eps_s", "w_f", "w_s", "gamma_p", "gamma_q", "gamma_a",
                  "gamma_b", "gamma_d", "pin_q", "bounds", "solver_tol",
                  "scenario"},
                 "config");

  RunConfig cfg;
  if (j.contains("gaussians")) cfg.hybrid.n_gaussians = j["gaussians"].get<int>();
  if (j.contains("bases")) cfg.hybrid.n_bases = j["bases"].get<int>();
  if (j.contains("max_iters")) cfg.hybrid.max_iters = j["max_iters"].get<int>();
  if (j.contains("rel_tol")) cfg.hybrid.rel_tol = j["rel_tol"].get<double>();
  if (j.contains("seed")) {
    cfg.hybrid.seed = j["seed"].get<std::uint64_t>();
    cfg.scenario.seed = cfg.hybrid.seed;
  }
  if (j.contains("variance_floor")) {
    cfg.hybrid.variance_floor = j["variance_floor"].get<double>();
  }
  if (j.contains("em_cycles")) cfg.hybrid.em_cycles_per_iter = j["em_cycles"].get<int>();
  if (j.contains("drift_bound")) cfg.hybrid.drift_bound = j["drift_bound"].get<double>();

  if (j.contains("eps_f")) cfg.fit.eps_f = j["eps_f"].get<double>();
  if (j.contains("eps_s")) cfg.fit.eps_s = j["eps_s"].get<double>();
  if (j.contains("w_f")) cfg.fit.w_f = j["w_f"].get<double>();
  if (j.contains("w_s")) cfg.fit.w_s = j["w_s"].get<double>();
  if (j.contains("gamma_p")) cfg.fit.gamma_p = j["gamma_p"].get<double>();
  if (j.contains("gamma_q")) cfg.fit.gamma_q = j["gamma_q"].get<double>();
  if (j.contains("gamma_a")) cfg.fit.gamma_a = j["gamma_a"].get<double>();
  if (j.contains("gamma_b")) cfg.fit.gamma_b = j["gamma_b"].get<double>();
  if (j.contains("gamma_d")) cfg.fit.gamma_d = j["gamma_d"].get<double>();
  if (j.contains("pin_q")) cfg.fit.pin_q_to_zero = j["pin_q"].get<bool>();
  if (j.contains("solver_tol")) cfg.fit.solver_tol = j["solver_tol"].get<double>();
  if (j.contains("bounds")) {
    const auto& b = j["bounds"];
    reject_unknown(b, {"a", "b", "d", "p", "q"}, "bounds");
    if (b.contains("a")) cfg.fit.bound_a = b["a"].get<bool>();
    if (b.contains("b")) cfg.fit.bound_b = b["b"].get<bool>();
    if (b.contains("d")) cfg.fit.bound_d = b["d"].get<bool>();
    if (b.contains("p")) cfg.fit.bound_p = b["p"].get<bool>();
    if (b.contains("q")) cfg.fit.bound_q = b["q"].get<bool>();
  }
  if (j.contains("scenario")) parse_scenario(j["scenario"], cfg.scenario);

  disagg::validate(cfg.hybrid);
  model::validate(cfg.fit);
  synth::validate(cfg.scenario);
  return cfg;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in = open_input(path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

void write_fit_json(const fs::path& path, const model::FitResult& fit) {
  json j{{"status", qp::to_string(fit.status)},
         {"objective", fit.objective},
         {"kkt_residual", fit.kkt_residual},
         {"iterations", fit.iterations},
         {"eps_f", fit.eps_f_used},
         {"eps_s", fit.eps_s_used},
         {"params", params_to_json(fit.params)},
         {"slacks",
          json{{"fixed", vector_to_json(fit.slack_fixed)},
               {"shiftable", vector_to_json(fit.slack_shiftable)}}},
         {"medians",
          json{{"a", fit.medians[0]},
               {"b", fit.medians[1]},
               {"d", fit.medians[2]},
               {"p", fit.medians[3]},
               {"q", fit.medians[4]}}}};
  std::ofstream out = open_output(path);
  out << j.dump(2) << '\n';
}

model::FitResult read_fit_json(const fs::path& path) {
  std::ifstream in = open_input(path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  model::FitResult fit;
  fit.objective = j.at("objective").get<double>();
  fit.kkt_residual = j.at("kkt_residual").get<double>();
  fit.iterations = j.at("iterations").get<int>();
  fit.eps_f_used = j.at("eps_f").get<double>();
  fit.eps_s_used = j.at("eps_s").get<double>();
  const std::string status = j.at("status").get<std::string>();
  fit.status = status == "optimal"      ? qp::SolveStatus::Optimal
               : status == "infeasible" ? qp::SolveStatus::Infeasible
                                        : qp::SolveStatus::IterationLimit;
  const auto& p = j.at("params");
  fit.params.a = json_to_vector(p.at("a"), "fit params.a");
  fit.params.b = json_to_vector(p.at("b"), "fit params.b");
  fit.params.d = json_to_vector(p.at("d"), "fit params.d");
  fit.params.p = json_to_vector(p.at("p"), "fit params.p");
  fit.params.q = json_to_vector(p.at("q"), "fit params.q");
  fit.slack_fixed = json_to_vector(j.at("slacks").at("fixed"), "fit slacks");
  fit.slack_shiftable = json_to_vector(j.at("slacks").at("shiftable"), "fit slacks");
  fit.medians.resize(5);
  fit.medians << j.at("medians").at("a").get<double>(),
      j.at("medians").at("b").get<double>(),
      j.at("medians").at("d").get<double>(),
      j.at("medians").at("p").get<double>(),
      j.at("medians").at("q").get<double>();
  return fit;
}

void write_table1(const fs::path& path, const synth::ParameterRecovery& recovery) {
  std::ofstream out = open_output(path);
  out << "parameter,median_real,median_disagg,corr\n";
  for (const auto& row : recovery.rows) {
    out << row.name << ',' << format_double(row.median_real) << ','
        << format_double(row.median_disagg) << ',';
    if (row.corr_real_disagg) {
      out << format_double(*row.corr_real_disagg);
    } else {
      out << '-';
    }
    out << '\n';
  }
}

void write_report(const fs::path& dir, const ReportInputs& inputs) {
  fs::create_directories(dir);

  if (inputs.disagg != nullptr) {
    const disagg::DisaggResult& r = *inputs.disagg;
    write_dense_csv(dir / "disagg_shiftable.csv", "day,instant,kw",
                    r.shiftable.values);
    write_dense_csv(dir / "disagg_fixed.csv", "day,instant,kw", r.fixed.values);

    {
      std::ofstream out = open_output(dir / "diagnostics.csv");
      out << "iteration,phi,loglik,drift,rel_change\n";
      for (const auto& d : r.trace) {
        out << d.iteration << ',' << format_double(d.phi) << ','
            << format_double(d.loglik) << ',' << format_double(d.drift) << ','
            << format_double(d.rel_change) << '\n';
      }
    }
    {
      // Factor matrices in column-major long form.
      std::ofstream out = open_output(dir / "nmf_basis.csv");
      out << "row,col,value\n";
      for (Eigen::Index c = 0; c < r.factors.basis.cols(); ++c) {
        for (Eigen::Index i = 0; i < r.factors.basis.rows(); ++i) {
          out << i << ',' << c << ',' << format_double(r.factors.basis(i, c))
              << '\n';
        }
      }
    }
    {
      std::ofstream out = open_output(dir / "nmf_coeffs.csv");
      out << "row,col,value\n";
      for (Eigen::Index c = 0; c < r.factors.coeffs.cols(); ++c) {
        for (Eigen::Index i = 0; i < r.factors.coeffs.rows(); ++i) {
          out << i << ',' << c << ',' << format_double(r.factors.coeffs(i, c))
              << '\n';
        }
      }
    }
    json run{{"iterations_run", r.iterations_run},
             {"residual_norm", r.residual_norm},
             {"mass_ratio_error", r.mass_ratio_error},
             {"clamped_mass", r.clamped_mass},
             {"renormalizations", r.renormalizations},
             {"gmm",
              json{{"priors", vector_to_json(r.state.priors)},
                   {"means", vector_to_json(r.state.means)},
                   {"variances", vector_to_json(r.state.variances)},
                   {"variance_floor", r.state.variance_floor}}},
             {"nmf", json{{"n_bases", r.factors.n_bases()},
                          {"drift", nmf::orthonormality_drift(r.factors)}}}};
    std::ofstream out = open_output(dir / "run.json");
    out << run.dump(2) << '\n';
  }

  if (inputs.fit_disagg != nullptr) {
    write_fit_json(dir / "fit.json", *inputs.fit_disagg);
  }
  if (inputs.fit_real != nullptr) {
    write_fit_json(dir / "fit_real.json", *inputs.fit_real);
  }
  if (inputs.recovery != nullptr) {
    write_table1(dir / "table1.csv", *inputs.recovery);
  }

  const bool can_profile = inputs.fit_disagg != nullptr &&
                           inputs.theta != nullptr && inputs.cost != nullptr &&
                           inputs.grid != nullptr && inputs.disagg != nullptr;
  if (can_profile) {
    const Vector theta_mean = inputs.theta->values.rowwise().mean();
    const Vector model_fixed =
        model::predict_fixed(inputs.fit_disagg->params, theta_mean);
    const Vector model_shift = model::predict_shiftable(
        inputs.fit_disagg->params, theta_mean, *inputs.cost);
    const Vector dis_fixed =
        sum_to_periods(inputs.disagg->fixed.values, *inputs.grid).rowwise().mean();
    const Vector dis_shift =
        sum_to_periods(inputs.disagg->shiftable.values, *inputs.grid)
            .rowwise()
            .mean();
    std::ofstream out = open_output(dir / "profiles.csv");
    out << "period,theta_mean,price,model_fixed,model_shiftable,"
           "disagg_fixed_mean,disagg_shiftable_mean\n";
    for (Eigen::Index k = 0; k < theta_mean.size(); ++k) {
      out << k << ',' << format_double(theta_mean[k]) << ','
          << format_double(inputs.cost->values[k]) << ','
          << format_double(model_fixed[k]) << ',' << format_double(model_shift[k])
          << ',' << format_double(dis_fixed[k]) << ','
          << format_double(dis_shift[k]) << '\n';
    }
  }
}

void write_ground_truth(const fs::path& dir, const synth::GroundTruth& truth) {
  fs::create_directories(dir);
  write_loads(dir / "loads.csv", truth.total);
  write_loads(dir / "shiftable.csv", truth.shiftable);
  write_loads(dir / "fixed.csv", truth.fixed);
  write_temperatures(dir / "temps.csv", truth.theta);
  write_prices(dir / "prices.csv", truth.cost);

  json meta{{"units", "kw"},
            {"source", "synthetic"},
            {"grid",
             json{{"instants_per_day", truth.total.values.rows()},
                  {"periods_per_day", truth.theta.values.rows()}}},
            {"n_days", truth.total.values.cols()},
            {"min_appliance_level", truth.min_appliance_level},
            {"clamp_mass", truth.clamp_mass}};
  if (truth.params_used) {
    meta["true_params"] = params_to_json(*truth.params_used);
  }
  std::ofstream out = open_output(dir / "meta.json");
  out << meta.dump(2) << '\n';
}

TruthFiles read_ground_truth(const fs::path& dir, const TimeGrid& grid) {
  TruthFiles tf;
  tf.total = ingest_loads(dir / "loads.csv", grid);
  tf.shiftable = ingest_loads(dir / "shiftable.csv", grid);
  tf.shiftable.role = LoadRole::Shiftable;
  tf.fixed = ingest_loads(dir / "fixed.csv", grid);
  tf.fixed.role = LoadRole::Fixed;
  tf.theta = ingest_temperatures(dir / "temps.csv", grid);
  tf.cost = ingest_prices(dir / "prices.csv", grid);

  const fs::path meta_path = dir / "meta.json";
  if (fs::exists(meta_path)) {
    std::ifstream in = open_input(meta_path);
    json meta;
    in >> meta;
    if (meta.contains("min_appliance_level")) {
      tf.min_appliance_level = meta["min_appliance_level"].get<double>();
    }
    if (meta.contains("true_params")) {
      tf.true_params = parse_params(meta["true_params"]);
    }
  }
  return tf;
}

}  // namespace nilm::io
