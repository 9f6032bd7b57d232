#pragma once

#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dynrcm/environment.hpp"
#include "dynrcm/kernel.hpp"
#include "dynrcm/stats.hpp"
#include "dynrcm/walk.hpp"

namespace dynrcm {

enum class Verdict { Pass, Fail, Inconclusive };

/// How a report's verdict is decided.
///  Bound:         pass iff empirical <= bound + 3 * standard_error.
///  Identity:      pass iff |empirical - target| <= 3 * standard_error.
///  ChiSquare:     empirical is the largest statistic, bound its critical value.
///  LowerBound:    pass iff empirical - 3 * standard_error >= bound.
///  Informational: always inconclusive; recorded but not asserted.
enum class ReportKind { Bound, Identity, ChiSquare, LowerBound, Informational };

struct TestReport {
  std::string name;
  ReportKind kind = ReportKind::Bound;
  double empirical_value = 0.0;
  double bound_or_target = 0.0;
  double standard_error = 0.0;
  long replicas = 0;
  Verdict verdict = Verdict::Inconclusive;
  /// Negative controls are run expecting a fail; they never fail a suite.
  bool pass_expected = true;
  nlohmann::json metadata = nlohmann::json::object();

  /// Recomputes `verdict` from the values and `kind`.
  void decide();
};

std::string verdict_name(Verdict v);
std::string report_kind_name(ReportKind k);
nlohmann::json to_json(const TestReport& report);
TestReport report_from_json(const nlohmann::json& j);
/// Fixed-width human-readable table, one line per report.
std::string format_reports(const std::vector<TestReport>& reports);
/// True when every pass-expected report passes.
bool suite_passes(const std::vector<TestReport>& reports);

enum class GrowthModel { Log, Sqrt, Linear };

std::string growth_model_name(GrowthModel m);

struct GrowthCurve {
  std::vector<double> horizons;
  std::vector<double> values;
  std::vector<double> ci_halfwidths;
  GrowthModel fitted_model = GrowthModel::Log;
  double fitted_slope = 0.0;
  double slope_ci_halfwidth = 0.0;
  nlohmann::json metadata = nlohmann::json::object();

  /// Throws std::domain_error unless horizons increase strictly and the lengths agree.
  void validate() const;
};

struct GrowthFit {
  GrowthModel model = GrowthModel::Log;
  LinearFit fit;
};

/// Least squares of value against log T, sqrt T and T; the smallest residual
/// wins. With two or fewer points every model fits exactly and `preferred` is returned.
GrowthFit fit_growth(const std::vector<double>& horizons, const std::vector<double>& values, GrowthModel preferred);

nlohmann::json to_json(const GrowthCurve& curve);
void write_curve_csv(const GrowthCurve& curve, const std::string& path);

struct VerifyOptions {
  int threads = 1;
  std::size_t jump_cap = kDefaultJumpCap;
  double kernel_tolerance = kDefaultKernelTolerance;
  double chi_square_alpha = 1e-3;
};

/// E[N[0, b]^p] for the walk from the origin at time 0 against moment_bound
/// with analytic norms of the spec's kind.
TestReport check_moment_bound(const EnvironmentSpec& spec, int p, double b, int replicas, const RandomSeed& seed,
                              const VerifyOptions& options = {});

/// E[max_{-t <= s <= t} |X_s - X_0|^2] against constant * t * ||eta||_1.
/// DeterministicPhase runs are informational.
TestReport check_markov_type(const EnvironmentSpec& spec, double t, int replicas, const RandomSeed& seed,
                             const VerifyOptions& options = {}, double constant = 25.0);

enum class StartLaw { Uniform, Origin };

/// Chi-square uniformity of the censored walk on the box B_k at each time.
/// The spec's lattice supplies the dimension; its mode and size are ignored.
/// An origin start is a negative control and is reported with pass_expected = false.
TestReport check_censored_stationarity(const EnvironmentSpec& spec, int k, const std::vector<double>& times,
                                       int replicas, const RandomSeed& seed, const VerifyOptions& options = {},
                                       StartLaw start = StartLaw::Uniform);

/// Mean integer-time collision counts of two conditionally independent walks
/// started at time 0, one curve point per horizon [0, T]. On a censored box
/// replicas touching the boundary are dropped. Metadata records medians, the
/// largest folded-measure relative error and the dropped count.
GrowthCurve collision_growth(const EnvironmentSpec& spec, const std::pair<Vertex, Vertex>& starts,
                             const std::vector<double>& horizons, int replicas, const RandomSeed& seed,
                             const VerifyOptions& options = {});

/// E[S_m] over sampled environments at each m in `m_list`, with the mean
/// per-environment slope of S_m against log m over [fit_from, fit_to].
GrowthCurve backward_sum_divergence(const EnvironmentSpec& spec, const std::vector<int>& m_list, int env_replicas,
                                    const RandomSeed& seed, const VerifyOptions& options = {}, int fit_from = 10,
                                    int fit_to = 0);

/// Reports derived from growth curves.
TestReport collision_growth_report(const std::string& name, const GrowthCurve& curve);
TestReport backward_sum_report(const std::string& name, const GrowthCurve& curve);

/// min_{m <= n} P^eta(|X_{-m}|_2 <= K sqrt(n)) averaged over environments,
/// from exact backward kernels. A proxy only; reported as informational.
TestReport localization_proxy(const EnvironmentSpec& spec, int n, double K, int env_replicas, const RandomSeed& seed,
                              const VerifyOptions& options = {});

}  // namespace dynrcm
