#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "rkn/bench.hpp"

using namespace rkn;
using namespace rkn::bench;

namespace {

std::string csv(const std::vector<BenchmarkRecord>& r) {
  std::ostringstream out;
  write_csv(out, r, false);
  return out.str();
}

std::vector<Method> methods(std::initializer_list<const char*> names) {
  std::vector<Method> m;
  for (const char* n : names) m.push_back(make_method(n));
  return m;
}

}  // namespace

TEST(EstimateOrder, ExactPowerLaw) {
  std::vector<std::pair<double, double>> pts;
  for (double h : {0.1, 0.05, 0.03, 0.02}) pts.emplace_back(h, 3.7 * std::pow(h, 8));
  EXPECT_NEAR(estimate_order(pts), 8.0, 1e-9);
}

TEST(EstimateOrder, TwoPoints) {
  EXPECT_NEAR(estimate_order({{0.1, 256e-10}, {0.05, 1e-10}}), 8.0, 1e-12);
}

TEST(EstimateOrder, Errors) {
  EXPECT_THROW(estimate_order({{0.1, 1e-8}}), InsufficientData);
  EXPECT_THROW(estimate_order({}), InsufficientData);
  EXPECT_THROW(estimate_order({{0.1, 1e-8}, {0.05, 1e-17}}), DegenerateFit);
  EXPECT_THROW(estimate_order({{0.1, 1e-8}, {0.05, 0.0}}), DegenerateFit);
  EXPECT_THROW(estimate_order({{0.1, 1e-8}, {0.1, 1e-9}}), DegenerateFit);
}

TEST(EstimateOrder, Window) {
  const auto w = asymptotic_window({{1, 1e-3}, {0.5, 1e-7}, {0.25, 1e-13}, {0.2, 1e-10}});
  ASSERT_EQ(w.size(), 2u);
  EXPECT_EQ(w[0].second, 1e-7);
}

TEST(Sweep, CommensurateStep) {
  EXPECT_DOUBLE_EQ(commensurate_step(1000, 340, 17), 0.05);
  const double h = commensurate_step(1000, 300, 17);
  EXPECT_NEAR(1000 / h, std::round(1000 / h), 1e-9);
  EXPECT_THROW(commensurate_step(1000, 0, 17), InvalidArgument);
}

TEST(Sweep, EmptyAndSingle) {
  const ProblemSpec spec{"kepler", 0.5};
  EXPECT_TRUE(run_sweep(spec, {}, {100}, 10).empty());
  const auto one = run_sweep(spec, methods({"A17"}), {340}, 10);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].status, "ok");
  EXPECT_EQ(one[0].scheme, "A17");
  EXPECT_THROW(run_sweep(spec, methods({"A17"}), {-1}, 10), InvalidArgument);
}

TEST(Sweep, CostAccounting) {
  const ProblemSpec spec{"kepler", 0.5};
  const auto recs = run_sweep(spec, methods({"A17", "B18", "EXTRAP6"}), {150, 400}, 20);
  ASSERT_EQ(recs.size(), 6u);
  for (const auto& r : recs) {
    const long steps = std::lround(20 / r.h);
    EXPECT_NEAR(r.cost, r.stages / r.h, 1e-9 * r.cost);
    // kick-bounded schemes pay one extra evaluation for the very first kick
    const long extra = r.scheme[0] == 'B' ? 1 : 0;
    EXPECT_EQ(r.force_evaluations, r.stages * steps + extra) << r.scheme;
    ASSERT_TRUE(r.final_position_err.has_value());
  }
  EXPECT_EQ(recs[0].scheme, "A17");
  EXPECT_EQ(recs[1].scheme, "A17");
  EXPECT_EQ(recs[2].scheme, "B18");
  EXPECT_LT(recs[0].cost, recs[1].cost);
}

TEST(Sweep, CsvIsDeterministicAcrossWorkerCounts) {
  const ProblemSpec spec{"henon_heiles", 0.6};
  const auto m = methods({"A19", "B17", "EXTRAP8"});
  const auto grid = log_grid(50, 500, 4);
  const std::string a = csv(run_sweep(spec, m, grid, 30, 1));
  const std::string b = csv(run_sweep(spec, m, grid, 30, 3));
  const std::string c = csv(run_sweep(spec, m, grid, 30, 2));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
}

TEST(Sweep, CsvHeader) {
  const std::string out = csv({});
  EXPECT_EQ(out,
            "scheme,problem,parameter,h,stages,cost,force_evals,max_energy_err,final_pos_err,"
            "status,wall_time_s\n");
}

TEST(Sweep, FailedCellsAreRecorded) {
  const ProblemSpec spec{"no_such_problem", 0};
  const auto recs = run_sweep(spec, methods({"A17"}), {100}, 1);
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].status.rfind("failed", 0), 0u);
}

TEST(Scan, ZeroEccentricityMatchesSweep) {
  const auto m = methods({"A19"});
  const auto scan = parameter_scan("kepler", m, {0.0, 0.4}, 340, 50);
  const auto sweep = run_sweep({"kepler", 0.0}, m, {340}, 50);
  ASSERT_EQ(scan.size(), 2u);
  EXPECT_EQ(scan[0].h, sweep[0].h);
  EXPECT_EQ(scan[0].max_energy_err, sweep[0].max_energy_err);
  EXPECT_EQ(scan[1].parameter, 0.4);
  EXPECT_THROW(parameter_scan("kepler", m, {0.1}, 0, 10), InvalidArgument);
}

TEST(Arenstorf, ErrorsDecreaseWithRefinement) {
  const auto recs = arenstorf_run(make_method("A19"), {10000, 20000});
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_GT(*recs[0].final_position_err, *recs[1].final_position_err);
  EXPECT_EQ(recs[0].force_evaluations, 19L * 10000);
}

TEST(Arenstorf, TimeReversalRecoversInitialState) {
  const auto p = three_body_rotating();
  const Method m = make_method("A19");
  const double h = *p.period / 20000;
  const auto fwd = integrate(m, p.system, h, p.initial, *p.period);
  const auto back = integrate(m, p.system, -h, fwd.final_state, 0.0);
  EXPECT_LE(max_abs_difference(back.final_state, p.initial), 1e-9);
}

TEST(Methods, ExternalOnlyNamesAreUnknownWithoutFile) {
  EXPECT_THROW(make_method("RKN4_6"), UnknownScheme);
}
