#include "irsbf/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace irsbf {

std::string solver_name(SolverKind kind) {
  switch (kind) {
    case SolverKind::Admm: return "ADMM";
    case SolverKind::Zf: return "ZF";
    case SolverKind::AdmmNoIrs: return "ADMM-noIRS";
    case SolverKind::ZfNoIrs: return "ZF-noIRS";
  }
  return "?";
}

SolverKind solver_from_name(const std::string& name) {
  if (name == "ADMM") return SolverKind::Admm;
  if (name == "ZF") return SolverKind::Zf;
  if (name == "ADMM-noIRS") return SolverKind::AdmmNoIrs;
  if (name == "ZF-noIRS") return SolverKind::ZfNoIrs;
  throw std::invalid_argument("unknown solver: " + name);
}

std::string axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::IrsElements: return "irs_elements";
    case SweepAxis::BsAntennas: return "bs_antennas";
    case SweepAxis::RateCenter: return "rate_center";
    case SweepAxis::ReflectionCase: return "reflection_case";
  }
  return "?";
}

std::string reflection_case_label(const ReflectionCase& reflection) {
  switch (reflection.kind) {
    case ReflectionCase::Kind::BoxModulus: return "I";
    case ReflectionCase::Kind::UnitModulus: return "II";
    case ReflectionCase::Kind::DiscretePhase: return "III:" + std::to_string(reflection.levels);
  }
  return "?";
}

ReflectionCase reflection_case_from_label(const std::string& label) {
  if (label == "I") return ReflectionCase::box();
  if (label == "II") return ReflectionCase::unit_modulus();
  if (label.rfind("III:", 0) == 0) return ReflectionCase::discrete(std::stoi(label.substr(4)));
  throw std::invalid_argument("unknown reflection case: " + label);
}

SystemConfig ExperimentSpec::config_at(std::size_t index, SolverKind solver) const {
  SystemConfig config = base;
  switch (axis) {
    case SweepAxis::IrsElements:
      config.irs_elements = static_cast<int>(values.at(index));
      break;
    case SweepAxis::BsAntennas:
      config.bs_antennas = static_cast<int>(values.at(index));
      break;
    case SweepAxis::RateCenter:
      config.rate_center.setConstant(values.at(index));
      break;
    case SweepAxis::ReflectionCase:
      config.reflection_case = case_values.at(index);
      break;
  }
  if (solver == SolverKind::AdmmNoIrs || solver == SolverKind::ZfNoIrs) config.irs_enabled = false;
  return config;
}

std::string ExperimentSpec::sweep_label(std::size_t index) const {
  if (axis == SweepAxis::ReflectionCase) return reflection_case_label(case_values.at(index));
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", values.at(index));
  return buf;
}

void ExperimentSpec::validate() const {
  base.validate();
  if (sweep_size() == 0) throw std::invalid_argument("experiment sweep list is empty");
  if (solvers.empty()) throw std::invalid_argument("experiment solver set is empty");
  if (trials < 1) throw std::invalid_argument("experiment needs at least one trial");
}

namespace {

// Bounded worker pool over the trial indices; results keyed by index so the
// reduction is order-independent.
void parallel_trials(int trials, int threads, const std::function<void(int)>& body) {
  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min(workers, trials));
  if (workers == 1) {
    for (int t = 0; t < trials; ++t) body(t);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int i = 0; i < workers; ++i)
    pool.emplace_back([&] {
      for (int t = next.fetch_add(1); t < trials; t = next.fetch_add(1)) body(t);
    });
  for (auto& th : pool) th.join();
}

}  // namespace

std::vector<TrialResult> run_cell(const SystemConfig& base_config, const ChannelGeometry& geometry,
                                  SolverKind solver, int trials, std::uint64_t master_seed,
                                  const AdmmParams& admm_params, const ZfParams& zf_params,
                                  int threads) {
  SystemConfig config = base_config;
  if (solver == SolverKind::AdmmNoIrs || solver == SolverKind::ZfNoIrs) config.irs_enabled = false;
  std::vector<TrialResult> results(trials);
  parallel_trials(trials, threads, [&](int t) {
    TrialResult& out = results[t];
    try {
      const ChannelRealization channels =
          generate(config, geometry, derive_stream_seed(master_seed, t));
      RunResult run;
      if (solver == SolverKind::Admm || solver == SolverKind::AdmmNoIrs)
        run = run_admm(config, channels, admm_params);
      else
        run = run_zf(config, channels, zf_params);
      out.status = run.status;
      out.ok = run.status == RunStatus::Converged;
      out.power = run.solution.total_power;
      out.iterations = run.iterations;
      out.wall_ms = run.trace.rows.empty() ? 0 : run.trace.rows.back().wall_ms;
    } catch (const std::exception&) {
      out.ok = false;
      out.status = RunStatus::Failed;
    }
  });
  return results;
}

ResultTable run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  ResultTable table;
  table.axis = axis_name(spec.axis);
  for (std::size_t v = 0; v < spec.sweep_size(); ++v) {
    for (const SolverKind solver : spec.solvers) {
      const SystemConfig config = spec.config_at(v, solver);
      const auto trials = run_cell(config, spec.geometry, solver, spec.trials, spec.master_seed,
                                   spec.admm, spec.zf, spec.threads);
      ResultRow row;
      row.sweep_value = spec.sweep_label(v);
      row.solver = solver_name(solver);
      int ok_count = 0;
      Scalar sum = 0, sum_sq = 0, iters = 0, wall = 0;
      for (const auto& trial : trials) {
        wall += trial.wall_ms;
        if (!trial.ok) continue;
        ++ok_count;
        sum += trial.power;
        sum_sq += trial.power * trial.power;
        iters += trial.iterations;
      }
      row.feasibility_rate = static_cast<Scalar>(ok_count) / spec.trials;
      row.mean_wall_ms = wall / spec.trials;
      if (ok_count == 0) {
        row.empty = true;
      } else {
        row.mean_power_w = sum / ok_count;
        row.std_power_w =
            std::sqrt(std::max<Scalar>(0, sum_sq / ok_count - row.mean_power_w * row.mean_power_w));
        row.mean_iterations = iters / ok_count;
      }
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

namespace {

std::string fmt9(Scalar v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

void emit_csv(const ResultTable& table, std::ostream& os) {
  os << "sweep_axis,sweep_value,solver,mean_power_w,std_power_w,feasibility_rate,"
        "mean_iterations,mean_wall_ms\n";
  for (const auto& row : table.rows) {
    os << table.axis << ',' << row.sweep_value << ',' << row.solver << ',';
    if (row.empty)
      os << ",,";
    else
      os << fmt9(row.mean_power_w) << ',' << fmt9(row.std_power_w) << ',';
    os << fmt9(row.feasibility_rate) << ',';
    if (row.empty)
      os << "";
    else
      os << fmt9(row.mean_iterations);
    os << ',' << fmt9(row.mean_wall_ms) << '\n';
  }
}

void emit_csv(const ResultTable& table, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  emit_csv(table, os);
  if (!os) throw std::runtime_error("write failed: " + path);
}

void emit_trace(const SolverTrace& trace, const std::string& path, bool with_branch_tags) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  trace.to_csv(os, with_branch_tags);
  if (!os) throw std::runtime_error("write failed: " + path);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

}  // namespace

ResultTable parse_result_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("empty result csv");
  ResultTable table;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 8) throw std::runtime_error("malformed result row: " + line);
    table.axis = cells[0];
    ResultRow row;
    row.sweep_value = cells[1];
    row.solver = cells[2];
    row.empty = cells[3].empty();
    if (!row.empty) {
      row.mean_power_w = std::stod(cells[3]);
      row.std_power_w = std::stod(cells[4]);
      row.mean_iterations = std::stod(cells[6]);
    }
    row.feasibility_rate = std::stod(cells[5]);
    row.mean_wall_ms = std::stod(cells[7]);
    table.rows.push_back(std::move(row));
  }
  return table;
}

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> items;
  std::string item;
  std::istringstream ss(s);
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

SweepAxis axis_from_name(const std::string& name) {
  if (name == "irs_elements") return SweepAxis::IrsElements;
  if (name == "bs_antennas") return SweepAxis::BsAntennas;
  if (name == "rate_center") return SweepAxis::RateCenter;
  if (name == "reflection_case") return SweepAxis::ReflectionCase;
  throw std::invalid_argument("unknown sweep axis: " + name);
}

}  // namespace

ExperimentSpec parse_experiment_file(std::istream& is) {
  ExperimentSpec spec;
  spec.base.set_uniform_rates(4, 4);
  spec.base.noise_power = dbm_to_watt(-80);
  spec.solvers = {SolverKind::Admm, SolverKind::Zf};
  bool have_sweep = false;
  Scalar rate_center = 4, rate_edge = 4;

  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("experiment file line " + std::to_string(line_no) +
                               ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key.rfind("sweep ", 0) == 0) {
      if (have_sweep)
        throw std::runtime_error("experiment file line " + std::to_string(line_no) +
                                 ": only one sweep block is allowed");
      have_sweep = true;
      spec.axis = axis_from_name(trim(key.substr(6)));
      for (const auto& item : split_list(value)) {
        if (spec.axis == SweepAxis::ReflectionCase)
          spec.case_values.push_back(reflection_case_from_label(item));
        else
          spec.values.push_back(std::stod(item));
      }
      continue;
    }

    if (key == "clusters")
      spec.base.clusters = std::stoi(value);
    else if (key == "bs_antennas")
      spec.base.bs_antennas = std::stoi(value);
    else if (key == "irs_elements")
      spec.base.irs_elements = std::stoi(value);
    else if (key == "noise_dbm")
      spec.base.noise_power = dbm_to_watt(std::stod(value));
    else if (key == "rate_center")
      rate_center = std::stod(value);
    else if (key == "rate_edge")
      rate_edge = std::stod(value);
    else if (key == "case")
      spec.base.reflection_case = reflection_case_from_label(value);
    else if (key == "trials")
      spec.trials = std::stoi(value);
    else if (key == "seed")
      spec.master_seed = std::stoull(value);
    else if (key == "threads")
      spec.threads = std::stoi(value);
    else if (key == "epsilon") {
      spec.admm.epsilon = std::stod(value);
      spec.zf.epsilon = std::stod(value);
    } else if (key == "max_iterations") {
      spec.admm.max_outer_iterations = std::stoi(value);
      spec.zf.max_outer_iterations = std::stoi(value);
    } else if (key == "solvers") {
      spec.solvers.clear();
      for (const auto& item : split_list(value)) spec.solvers.push_back(solver_from_name(item));
    } else {
      throw std::runtime_error("experiment file line " + std::to_string(line_no) +
                               ": unknown key " + key);
    }
  }
  spec.base.set_uniform_rates(rate_center, rate_edge);
  if (!have_sweep) throw std::runtime_error("experiment file needs one sweep line");
  spec.validate();
  return spec;
}

}  // namespace irsbf
