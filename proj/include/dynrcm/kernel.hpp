#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "dynrcm/environment.hpp"
#include "dynrcm/lattice.hpp"
#include "dynrcm/rng.hpp"

namespace dynrcm {

inline constexpr double kDefaultKernelTolerance = 1e-12;
inline constexpr std::size_t kMaxKernelVertices = 4096;

/// L_t: off-diagonal (x, y) = eta_t({x, y}) for neighbours, diagonal = -row sum.
struct GeneratorMatrix {
  Lattice lattice;
  double time = 0.0;
  Eigen::MatrixXd entries;
};

/// P_{s,t}(u, v), rows indexed by u. `tolerance` is the accumulated
/// truncation bound (L1 per row) of the uniformization.
struct KernelMatrix {
  Lattice lattice;
  double s = 0.0;
  double t = 0.0;
  Eigen::MatrixXd entries;
  double tolerance = 0.0;
};

GeneratorMatrix generator_at(const ConductanceTrajectory& traj, double t);

/// Ordered product over the constant pieces between s and t of exp(L * dt),
/// each factor by uniformization truncated once the Poisson tail is below
/// `tol`. For s > t the backward kernel is the forward kernel of the
/// reversed trajectory from -s to -t.
KernelMatrix transition_kernel(const ConductanceTrajectory& traj, double s, double t,
                               double tol = kDefaultKernelTolerance);

/// Evolves a block of row vectors (laid out vertex-major: data[v * rows + r])
/// from s to t >= s under the trajectory's generators. `on_checkpoint(k, data)`
/// fires once the evolution reaches checkpoints[k]; checkpoints must be sorted
/// and lie in (s, t]. Returns the accumulated truncation bound.
double propagate_rows(const ConductanceTrajectory& traj, std::vector<double>& data, std::size_t rows, double s,
                      double t, double tol, std::span<const double> checkpoints = {},
                      const std::function<void(std::size_t, const std::vector<double>&)>& on_checkpoint = {});

/// S_m = sum_{j=1}^m sum_x P_{0,-j}(origin, x)^2 for m = 1..M, computed as
/// forward kernels of the reversed trajectory. Requires the window to cover [-M, 0].
std::vector<double> backward_collision_sum(const ConductanceTrajectory& traj, const Vertex& origin, int max_m,
                                           double tol = kDefaultKernelTolerance);

struct CauchySchwarzBound {
  double bound = 0.0;           // (sum_{x in ball} row(x))^2 / |ball|
  double collision_sum = 0.0;   // sum_{x in ball} row(x)^2
  double ball_mass = 0.0;
  std::size_t ball_size = 0;
};

CauchySchwarzBound cauchy_schwarz_bound(std::span<const double> kernel_row, const Lattice& lattice,
                                        const Ball& ball);

struct MassTransport {
  double lhs = 0.0;  // mean of sum_x P_{0,m}(0, x)^2
  double rhs = 0.0;  // mean of sum_x P_{0,m}(x, 0)^2
  double lhs_standard_error = 0.0;
  double rhs_standard_error = 0.0;
  double difference_standard_error = 0.0;
  double ci = 0.0;   // 3 standard errors of lhs - rhs
  int replicas = 0;
  bool agree = false;
};

/// Both sides of the mass-transport identity for f(u, v) = E[P_{0,m}(u, v)^2],
/// averaging exact kernels over sampled environments on a torus.
MassTransport mass_transport_check(const EnvironmentKind& kind, const Lattice& torus, int m, int replicas,
                                   const RandomSeed& seed, double tol = kDefaultKernelTolerance, int threads = 1);

/// Stirling numbers of the second kind {p brace l} for 1 <= l <= p <= max_p.
class StirlingTable {
 public:
  static constexpr int kLimit = 25;

  explicit StirlingTable(int max_p);

  int max_p() const noexcept { return max_p_; }
  std::uint64_t operator()(int p, int l) const;

 private:
  int max_p_;
  std::vector<std::vector<std::uint64_t>> values_;
};

std::uint64_t stirling2(int p, int l);

/// sum_{l=1}^p {p brace l} l! length^l ||eta||_l^l. Norms are looked up by
/// their `p`; a Monte Carlo norm enters as value + ci_halfwidth.
double moment_bound(int p, double length, std::span<const EnvNorm> norms);

void write_kernel_csv(const KernelMatrix& kernel, const std::string& path);

}  // namespace dynrcm
