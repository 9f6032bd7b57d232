#include <doctest.h>

#include <cmath>

#include "dynrcm/verify.hpp"

using namespace dynrcm;

namespace {

TestReport make(ReportKind kind, double emp, double bound, double se) {
  TestReport r;
  r.name = "r";
  r.kind = kind;
  r.empirical_value = emp;
  r.bound_or_target = bound;
  r.standard_error = se;
  r.replicas = 10;
  r.decide();
  return r;
}

EnvironmentSpec box_spec(const EnvironmentKind& kind, int k = 20) {
  return EnvironmentSpec{kind, Lattice::box(2, k), TimeWindow{0.0, 1.0}};
}

}  // namespace

TEST_CASE("verdict rules") {
  CHECK(make(ReportKind::Bound, 1.2, 1.0, 0.1).verdict == Verdict::Pass);
  CHECK(make(ReportKind::Bound, 1.4, 1.0, 0.1).verdict == Verdict::Fail);
  CHECK(make(ReportKind::Identity, 0.75, 1.0, 0.1).verdict == Verdict::Pass);
  CHECK(make(ReportKind::Identity, 0.65, 1.0, 0.1).verdict == Verdict::Fail);
  CHECK(make(ReportKind::ChiSquare, 10.0, 9.0, 100.0).verdict == Verdict::Fail);
  CHECK(make(ReportKind::LowerBound, 0.5, 0.0, 0.1).verdict == Verdict::Pass);
  CHECK(make(ReportKind::LowerBound, 0.25, 0.0, 0.1).verdict == Verdict::Fail);
  CHECK(make(ReportKind::Informational, 0.0, 1.0, 0.0).verdict == Verdict::Inconclusive);
  CHECK(make(ReportKind::Bound, std::nan(""), 1.0, 0.0).verdict == Verdict::Inconclusive);
}

TEST_CASE("suite verdict ignores controls and informational reports") {
  TestReport control = make(ReportKind::Bound, 5.0, 1.0, 0.0);
  control.pass_expected = false;
  std::vector<TestReport> reports{make(ReportKind::Bound, 0.0, 1.0, 0.0), control,
                                  make(ReportKind::Informational, 3.0, 0.0, 0.0)};
  CHECK(suite_passes(reports));
  reports.push_back(make(ReportKind::Identity, 2.0, 1.0, 0.0));
  CHECK_FALSE(suite_passes(reports));
}

TEST_CASE("reports survive a json round trip") {
  TestReport r = make(ReportKind::LowerBound, 0.13, 0.0, 0.01);
  r.metadata = {{"k", 3}};
  r.pass_expected = false;
  const TestReport back = report_from_json(to_json(r));
  CHECK(to_json(back) == to_json(r));
  CHECK(format_reports({r}).find("r") != std::string::npos);
}

TEST_CASE("growth model selection") {
  const std::vector<double> h{10, 20, 50, 100, 200, 500, 1000};
  std::vector<double> lg, sq, li;
  for (double t : h) {
    lg.push_back(0.3 * std::log(t) + 1);
    sq.push_back(2 * std::sqrt(t) - 1);
    li.push_back(0.01 * t + 2);
  }
  CHECK(fit_growth(h, lg, GrowthModel::Linear).model == GrowthModel::Log);
  CHECK(fit_growth(h, lg, GrowthModel::Linear).fit.slope == doctest::Approx(0.3));
  CHECK(fit_growth(h, sq, GrowthModel::Log).model == GrowthModel::Sqrt);
  CHECK(fit_growth(h, li, GrowthModel::Log).model == GrowthModel::Linear);
  CHECK(fit_growth({10, 100}, {1, 2}, GrowthModel::Sqrt).model == GrowthModel::Sqrt);
  GrowthCurve bad{{10, 5}, {1, 2}, {0, 0}};
  CHECK_THROWS_AS(bad.validate(), std::domain_error);
}

TEST_CASE("moment bound checks") {
  const VerifyOptions opts;
  const TestReport st = check_moment_bound(box_spec(StaticEnv{1.0}), 1, 1.0, 4000, RandomSeed{1, {}}, opts);
  CHECK(st.bound_or_target == doctest::Approx(4.0));
  CHECK(std::abs(st.empirical_value - 4.0) <= 4 * st.standard_error);
  CHECK(st.verdict == Verdict::Pass);
  const TestReport dp2 =
      check_moment_bound(box_spec(DynamicalPercolation{0.5, 1.0}), 2, 1.0, 4000, RandomSeed{2, {}}, opts);
  CHECK(dp2.bound_or_target == doctest::Approx(12.0));
  CHECK(dp2.verdict == Verdict::Pass);
  const TestReport zero = check_moment_bound(box_spec(StaticEnv{0.0}), 2, 1.0, 10, RandomSeed{3, {}}, opts);
  CHECK(zero.empirical_value == 0.0);
  CHECK(zero.bound_or_target == 0.0);
  CHECK(zero.verdict == Verdict::Pass);
  CHECK_THROWS_AS(check_moment_bound(box_spec(StaticEnv{}), 3, 1.0, 10, RandomSeed{}, opts), std::domain_error);
}

TEST_CASE("Markov-type check and a mis-scaled constant") {
  const VerifyOptions opts;
  const TestReport ok = check_markov_type(box_spec(StaticEnv{1.0}), 1.0, 2000, RandomSeed{4, {}}, opts);
  CHECK(ok.verdict == Verdict::Pass);
  CHECK(ok.empirical_value > 1.0);
  const TestReport bad = check_markov_type(box_spec(StaticEnv{1.0}), 1.0, 2000, RandomSeed{4, {}}, opts, 0.01);
  CHECK(bad.verdict == Verdict::Fail);
  const TestReport phase =
      check_markov_type(box_spec(DeterministicPhase{1.0, 0.01}), 1.0, 50, RandomSeed{5, {}}, opts);
  CHECK(phase.kind == ReportKind::Informational);
}

TEST_CASE("censored stationarity with its negative control") {
  const VerifyOptions opts;
  const auto spec = box_spec(DynamicalPercolation{0.5, 1.0});
  const TestReport ok = check_censored_stationarity(spec, 3, {1.0, 4.0}, 5000, RandomSeed{6, {}}, opts);
  CHECK(ok.verdict == Verdict::Pass);
  CHECK(ok.pass_expected);
  const TestReport ctl =
      check_censored_stationarity(spec, 3, {1.0, 4.0}, 5000, RandomSeed{6, {}}, opts, StartLaw::Origin);
  CHECK(ctl.verdict == Verdict::Fail);
  CHECK_FALSE(ctl.pass_expected);
  CHECK(suite_passes({ok, ctl}));
}

TEST_CASE("results do not depend on the thread count") {
  VerifyOptions one;
  VerifyOptions three;
  three.threads = 3;
  const auto spec = box_spec(DynamicalPercolation{0.5, 1.0});
  CHECK(to_json(check_moment_bound(spec, 2, 1.0, 500, RandomSeed{7, {}}, one)) ==
        to_json(check_moment_bound(spec, 2, 1.0, 500, RandomSeed{7, {}}, three)));
  CHECK(to_json(check_markov_type(spec, 1.0, 300, RandomSeed{8, {}}, one)) ==
        to_json(check_markov_type(spec, 1.0, 300, RandomSeed{8, {}}, three)));
  const EnvironmentSpec torus{StaticEnv{1.0}, Lattice::torus(2, 16), TimeWindow{0.0, 1.0}};
  CHECK(to_json(collision_growth(torus, {Vertex{0, 0}, Vertex{1, 0}}, {5, 10}, 100, RandomSeed{9, {}}, one)) ==
        to_json(collision_growth(torus, {Vertex{0, 0}, Vertex{1, 0}}, {5, 10}, 100, RandomSeed{9, {}}, three)));
}

TEST_CASE("collision growth on a small torus") {
  const EnvironmentSpec spec{StaticEnv{1.0}, Lattice::torus(2, 16), TimeWindow{0.0, 1.0}};
  const GrowthCurve c = collision_growth(spec, {Vertex{0, 0}, Vertex{0, 0}}, {1, 10, 40}, 400, RandomSeed{10, {}});
  CHECK_NOTHROW(c.validate());
  CHECK(c.values[0] >= 1.0);  // both start at the origin at time 0
  CHECK(c.values[2] >= c.values[1]);
  CHECK(c.metadata.at("max_folded_relative_error").get<double>() <= 1e-12);
  CHECK(collision_growth_report("g", c).verdict == Verdict::Pass);
}

TEST_CASE("backward sums grow in a static environment") {
  const EnvironmentSpec spec{StaticEnv{1.0}, Lattice::torus(2, 12), TimeWindow{0.0, 1.0}};
  const GrowthCurve c = backward_sum_divergence(spec, {5, 10, 20, 40}, 1, RandomSeed{11, {}}, {}, 5);
  CHECK(c.values[3] > c.values[0]);
  CHECK(c.fitted_slope > 0.0);
  const TestReport r = backward_sum_report("b", c);
  CHECK(r.kind == ReportKind::LowerBound);
  CHECK(r.verdict == Verdict::Pass);
}

TEST_CASE("localization proxy is informational") {
  const EnvironmentSpec spec{StaticEnv{1.0}, Lattice::torus(2, 12), TimeWindow{0.0, 1.0}};
  const TestReport r = localization_proxy(spec, 4, 2.0, 1, RandomSeed{12, {}});
  CHECK(r.verdict == Verdict::Inconclusive);
  CHECK(r.empirical_value > 0.0);
  CHECK(r.empirical_value <= 1.0 + 1e-12);
}
