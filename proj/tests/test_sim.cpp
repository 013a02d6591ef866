#include "irsbf/sim.hpp"

#include <doctest.h>

#include <sstream>

using namespace irsbf;

namespace {

ExperimentSpec tiny_spec() {
  ExperimentSpec spec;
  spec.base.clusters = 2;
  spec.base.bs_antennas = 4;
  spec.base.irs_elements = 6;
  spec.base.noise_power = dbm_to_watt(-80);
  spec.base.set_uniform_rates(2, 2);
  spec.axis = SweepAxis::IrsElements;
  spec.values = {4, 6};
  spec.solvers = {SolverKind::Zf, SolverKind::ZfNoIrs};
  spec.trials = 3;
  spec.master_seed = 17;
  spec.threads = 2;
  return spec;
}

bool tables_equal_modulo_wall(const ResultTable& a, const ResultTable& b) {
  if (a.axis != b.axis || a.rows.size() != b.rows.size()) return false;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const auto& x = a.rows[i];
    const auto& y = b.rows[i];
    if (x.sweep_value != y.sweep_value || x.solver != y.solver || x.empty != y.empty ||
        x.mean_power_w != y.mean_power_w || x.std_power_w != y.std_power_w ||
        x.feasibility_rate != y.feasibility_rate || x.mean_iterations != y.mean_iterations)
      return false;
  }
  return true;
}

}  // namespace

TEST_CASE("experiments are reproducible from (spec, seed)") {
  const ExperimentSpec spec = tiny_spec();
  const ResultTable a = run_experiment(spec);
  const ResultTable b = run_experiment(spec);
  CHECK(tables_equal_modulo_wall(a, b));
  CHECK(a.rows.size() == 4);  // full sweep x solver grid

  ExperimentSpec other = spec;
  other.master_seed = 18;
  CHECK_FALSE(tables_equal_modulo_wall(a, run_experiment(other)));
}

TEST_CASE("result csv rendering") {
  SUBCASE("empty table emits the header only") {
    ResultTable table;
    table.axis = "irs_elements";
    std::stringstream ss;
    emit_csv(table, ss);
    const std::string text = ss.str();
    CHECK(text ==
          "sweep_axis,sweep_value,solver,mean_power_w,std_power_w,feasibility_rate,"
          "mean_iterations,mean_wall_ms\n");
  }
  SUBCASE("one row parses back") {
    ResultTable table;
    table.axis = "bs_antennas";
    ResultRow row;
    row.sweep_value = "8";
    row.solver = "ADMM";
    row.mean_power_w = 1.234567891e9;
    row.std_power_w = 2.5;
    row.feasibility_rate = 0.97;
    row.mean_iterations = 11.5;
    row.mean_wall_ms = 42;
    table.rows.push_back(row);
    std::stringstream ss;
    emit_csv(table, ss);
    CHECK(ss.str().back() == '\n');
    const ResultTable back = parse_result_csv(ss);
    REQUIRE(back.rows.size() == 1);
    CHECK(back.axis == "bs_antennas");
    CHECK(back.rows[0].solver == "ADMM");
    CHECK(back.rows[0].mean_power_w == doctest::Approx(1.234567891e9).epsilon(1e-9));
    CHECK(back.rows[0].feasibility_rate == doctest::Approx(0.97));
  }
  SUBCASE("an empty cell stays an empty string through the round trip") {
    ResultTable table;
    table.axis = "rate_center";
    ResultRow row;
    row.sweep_value = "4";
    row.solver = "ZF";
    row.empty = true;
    row.feasibility_rate = 0;
    row.mean_wall_ms = 3;
    table.rows.push_back(row);
    std::stringstream ss;
    emit_csv(table, ss);
    CHECK(ss.str().find("ZF,,,0,,3") != std::string::npos);
    const ResultTable back = parse_result_csv(ss);
    REQUIRE(back.rows.size() == 1);
    CHECK(back.rows[0].empty);
    CHECK(back.rows[0].feasibility_rate == 0);
  }
}

TEST_CASE("experiment file parsing") {
  SUBCASE("well-formed file") {
    std::stringstream ss(
        "# reference sweep\n"
        "clusters = 3\n"
        "bs_antennas = 8\n"
        "irs_elements = 30\n"
        "noise_dbm = -80\n"
        "rate_center = 4\n"
        "rate_edge = 4\n"
        "case = III:4\n"
        "trials = 10\n"
        "seed = 7\n"
        "solvers = ADMM, ZF-noIRS\n"
        "sweep irs_elements = 20, 30, 40\n");
    const ExperimentSpec spec = parse_experiment_file(ss);
    CHECK(spec.base.clusters == 3);
    CHECK(spec.base.reflection_case.kind == ReflectionCase::Kind::DiscretePhase);
    CHECK(spec.base.reflection_case.levels == 4);
    CHECK(spec.base.noise_power == doctest::Approx(1e-11));
    CHECK(spec.trials == 10);
    CHECK(spec.master_seed == 7);
    REQUIRE(spec.solvers.size() == 2);
    CHECK(spec.solvers[1] == SolverKind::ZfNoIrs);
    CHECK(spec.axis == SweepAxis::IrsElements);
    CHECK(spec.values == std::vector<Scalar>{20, 30, 40});
  }
  SUBCASE("case sweep") {
    std::stringstream ss(
        "clusters = 2\nbs_antennas = 4\nirs_elements = 8\ntrials = 1\n"
        "sweep reflection_case = I, II, III:2, III:8\n");
    const ExperimentSpec spec = parse_experiment_file(ss);
    CHECK(spec.axis == SweepAxis::ReflectionCase);
    REQUIRE(spec.case_values.size() == 4);
    CHECK(spec.case_values[0].kind == ReflectionCase::Kind::BoxModulus);
    CHECK(spec.case_values[3].levels == 8);
    CHECK(spec.sweep_label(2) == "III:2");
  }
  SUBCASE("errors carry the line number") {
    std::stringstream missing("clusters = 2\n");
    CHECK_THROWS(parse_experiment_file(missing));
    std::stringstream unknown("frobnicate = 3\nsweep irs_elements = 4\n");
    CHECK_THROWS_WITH_AS(parse_experiment_file(unknown),
                         doctest::Contains("line 1"), std::runtime_error);
    std::stringstream twice("sweep irs_elements = 4\nsweep bs_antennas = 4\n");
    CHECK_THROWS_WITH_AS(parse_experiment_file(twice), doctest::Contains("line 2"),
                         std::runtime_error);
  }
}

TEST_CASE("failed cells are counted, not silently dropped") {
  // ZF requires N >= 2K-1; this cell can never produce a solution.
  ExperimentSpec spec = tiny_spec();
  spec.base.clusters = 3;
  spec.base.set_uniform_rates(2, 2);
  spec.base.bs_antennas = 4;
  spec.axis = SweepAxis::BsAntennas;
  spec.values = {4};
  spec.solvers = {SolverKind::Zf};
  spec.trials = 2;
  const ResultTable table = run_experiment(spec);
  REQUIRE(table.rows.size() == 1);
  CHECK(table.rows[0].empty);
  CHECK(table.rows[0].feasibility_rate == 0);
}

TEST_CASE("paired solvers consume identical realizations") {
  const ExperimentSpec spec = tiny_spec();
  // Determinism of the per-trial seed rule: the same (seed, trial) pair
  // produces the same channels regardless of the solver asking.
  const SystemConfig config = spec.config_at(0, SolverKind::Zf);
  const ChannelRealization a = generate(config, derive_stream_seed(spec.master_seed, 1));
  const ChannelRealization b = generate(config, derive_stream_seed(spec.master_seed, 1));
  CHECK(a.H == b.H);
}

TEST_CASE("trace csv layout") {
  SolverTrace trace;
  TraceRow row;
  row.iteration = 1;
  row.total_power_w = 2.0;
  row.min_slack = -0.5;
  row.wall_ms = 7;
  row.branch_tags = "P;I";
  trace.rows.push_back(row);
  std::stringstream with_tags, without;
  trace.to_csv(with_tags, true);
  trace.to_csv(without, false);
  CHECK(with_tags.str() ==
        "iteration,total_power_w,consensus_residual,min_slack,wall_ms,branch_tags\n"
        "1,2,,-0.5,7,P;I\n");
  CHECK(without.str() ==
        "iteration,total_power_w,consensus_residual,min_slack,wall_ms\n"
        "1,2,,-0.5,7\n");
}
