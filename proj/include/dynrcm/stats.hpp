#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace dynrcm {

/// Pairwise (cascade) summation; the result depends only on element order.
double pairwise_sum(std::span<const double> values);

struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased sample variance
  double standard_error = 0.0;
};

Summary summarize(std::span<const double> values);

double median(std::vector<double> values);

struct ChiSquare {
  double statistic = 0.0;
  double degrees_of_freedom = 0.0;
  double p_value = 1.0;
};

/// Pearson goodness-of-fit of `counts` against the uniform law on its cells.
ChiSquare chi_square_uniform(std::span<const std::size_t> counts);

/// Upper-tail critical value of chi-square(dof) at significance `alpha`.
double chi_square_critical(double degrees_of_freedom, double alpha);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_sum_squares = 0.0;
};

/// Ordinary least squares y ~ intercept + slope * x.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

/// Runs body(i) for i in [0, n) on up to `threads` workers. Each index runs
/// exactly once; callers write results into slot i, keeping output independent
/// of scheduling.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

/// Thread count from DYN_RCM_THREADS, falling back to `fallback`.
int default_threads(int fallback = 1);

}  // namespace dynrcm
