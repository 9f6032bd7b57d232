#include <doctest.h>

#include <cmath>
#include <functional>

#include "dynrcm/kernel.hpp"
#include "generators.hpp"

using namespace dynrcm;

namespace {

/// Set partitions of {0..p-1} into exactly l blocks, by enumeration of
/// restricted growth strings.
std::uint64_t count_partitions(int p, int l) {
  std::vector<int> a(static_cast<std::size_t>(p), 0);
  std::uint64_t count = 0;
  std::function<void(int, int)> rec = [&](int i, int blocks) {
    if (i == p) {
      count += blocks == l ? 1 : 0;
      return;
    }
    for (int b = 0; b <= blocks && b < l; ++b) {
      a[static_cast<std::size_t>(i)] = b;
      rec(i + 1, std::max(blocks, b + 1));
    }
  };
  rec(0, 0);
  return count;
}

/// Dense matrix exponential by scaling and squaring of a Taylor series.
Eigen::MatrixXd expm(const Eigen::MatrixXd& a) {
  int squarings = 0;
  double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  while (norm > 0.1) {
    norm /= 2;
    ++squarings;
  }
  const Eigen::MatrixXd b = a / std::ldexp(1.0, squarings);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(a.rows(), a.cols());
  Eigen::MatrixXd sum = term;
  for (int k = 1; k < 30; ++k) {
    term = term * b / k;
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

}  // namespace

TEST_CASE("two-state chain matches its closed form") {
  const Lattice lat = Lattice::torus(1, 2);
  for (double c : {0.1, 1.0, 3.0}) {
    for (double t : {0.01, 0.5, 2.0, 7.0}) {
      const TimeWindow w{0.0, t};
      const ConductanceTrajectory traj(lat, w, {Piecewise::constant(w, c)});
      const KernelMatrix k = transition_kernel(traj, 0.0, t);
      const double flip = (1.0 - std::exp(-2.0 * c * t)) / 2.0;
      CHECK(k.entries(0, 1) == doctest::Approx(flip).epsilon(1e-11));
      CHECK(k.entries(0, 0) == doctest::Approx(1.0 - flip).epsilon(1e-11));
      // One bound per uniformization chunk.
      CHECK(k.tolerance <= 1e-10);
    }
  }
}

TEST_CASE("kernel equals the ordered product of matrix exponentials") {
  for (std::uint64_t c = 0; c < 10; ++c) {
    Stream rng = gen::stream(50, c);
    const Lattice lat = gen::torus(rng, 4);
    const TimeWindow w{0.0, 2.0};
    const ConductanceTrajectory traj = gen::trajectory(rng, lat, w, 3);
    // Collect all breakpoints, then multiply exp(L * dt) piece by piece.
    std::vector<double> cuts{0.0, 2.0};
    for (const auto& pw : traj.edges()) cuts.insert(cuts.end(), pw.breakpoints.begin(), pw.breakpoints.end());
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    const auto n = static_cast<Eigen::Index>(lat.num_vertices());
    Eigen::MatrixXd product = Eigen::MatrixXd::Identity(n, n);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const GeneratorMatrix g = generator_at(traj, cuts[i]);
      product = product * expm(g.entries * (cuts[i + 1] - cuts[i]));
    }
    const KernelMatrix k = transition_kernel(traj, 0.0, 2.0);
    CHECK((k.entries - product).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("generator rows sum to zero and are symmetric") {
  Stream rng = gen::stream(51, 0);
  const Lattice lat = Lattice::torus(2, 5);
  const ConductanceTrajectory traj = gen::trajectory(rng, lat, TimeWindow{0.0, 1.0});
  const GeneratorMatrix g = generator_at(traj, 0.3);
  CHECK(g.entries.rowwise().sum().cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((g.entries - g.entries.transpose()).cwiseAbs().maxCoeff() == 0.0);
  for (VertexId x = 0; x < lat.num_vertices(); ++x) {
    CHECK(-g.entries(x, x) == doctest::Approx(traj.total_conductance(x, 0.3)));
  }
}

TEST_CASE("Chapman-Kolmogorov, detailed balance and stochasticity") {
  for (std::uint64_t c = 0; c < 20; ++c) {
    Stream rng = gen::stream(52, c);
    const Lattice lat = Lattice::torus(2, gen::integer(rng, 3, 5));
    const TimeWindow w{-2.0, 3.0};
    const ConductanceTrajectory traj = gen::trajectory(rng, lat, w, 5);
    const double s = gen::dyadic(rng, -2, 0);
    const double u = gen::dyadic(rng, 0, 1.5);
    const double t = gen::dyadic(rng, 1.5, 3);
    const KernelMatrix su = transition_kernel(traj, s, u);
    const KernelMatrix ut = transition_kernel(traj, u, t);
    const KernelMatrix st = transition_kernel(traj, s, t);
    CHECK((su.entries * ut.entries - st.entries).cwiseAbs().maxCoeff() <= 1e-10);
    // Counting measure is reversible for every generator, so P_{s,t}^T = P_{t,s}.
    const KernelMatrix ts = transition_kernel(traj, t, s);
    CHECK((st.entries - ts.entries.transpose()).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((st.entries.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-10);
    CHECK(st.entries.minCoeff() >= -1e-15);
  }
}

TEST_CASE("backward kernels come from the reversed trajectory") {
  Stream rng = gen::stream(53, 0);
  const Lattice lat = Lattice::torus(1, 5);
  const ConductanceTrajectory traj = gen::trajectory(rng, lat, TimeWindow{-3.0, 1.0});
  const KernelMatrix b = transition_kernel(traj, 0.5, -2.0);
  const KernelMatrix f = transition_kernel(reverse_environment(traj), -0.5, 2.0);
  CHECK((b.entries - f.entries).cwiseAbs().maxCoeff() == 0.0);
  // Symmetric pieces: the backward kernel is the transpose of the forward kernel over [-2, 0.5].
  const KernelMatrix g = transition_kernel(traj, -2.0, 0.5);
  CHECK((b.entries - g.entries.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("propagate_rows matches kernel rows at checkpoints") {
  Stream rng = gen::stream(54, 0);
  const Lattice lat = Lattice::torus(2, 4);
  const ConductanceTrajectory traj = gen::trajectory(rng, lat, TimeWindow{0.0, 3.0});
  const std::size_t n = lat.num_vertices();
  std::vector<double> data(n * 2, 0.0);
  data[3 * 2 + 0] = 1.0;
  data[7 * 2 + 1] = 1.0;
  const std::vector<double> checkpoints{1.0, 2.5};
  int seen = 0;
  propagate_rows(traj, data, 2, 0.0, 3.0, 1e-12, checkpoints, [&](std::size_t k, const std::vector<double>& d) {
    const KernelMatrix km = transition_kernel(traj, 0.0, checkpoints[k]);
    for (std::size_t v = 0; v < n; ++v) {
      REQUIRE(d[v * 2 + 0] == doctest::Approx(km.entries(3, static_cast<Eigen::Index>(v))).epsilon(1e-10));
      REQUIRE(d[v * 2 + 1] == doctest::Approx(km.entries(7, static_cast<Eigen::Index>(v))).epsilon(1e-10));
    }
    ++seen;
  });
  CHECK(seen == 2);
}

TEST_CASE("Stirling numbers of the second kind") {
  CHECK(stirling2(3, 2) == 3);
  CHECK(stirling2(4, 2) == 7);
  CHECK(stirling2(5, 3) == 25);
  const StirlingTable table(10);
  for (int p = 1; p <= 10; ++p) {
    for (int l = 1; l <= p; ++l) REQUIRE(table(p, l) == count_partitions(p, l));
  }
  CHECK(stirling2(25, 12) == stirling2(24, 11) + 12 * stirling2(24, 12));
  CHECK_THROWS_AS(table(3, 4), std::domain_error);
  CHECK_THROWS_AS(table(11, 1), std::domain_error);
  CHECK_THROWS_AS(StirlingTable(26), std::domain_error);
}

TEST_CASE("moment bound values") {
  const std::vector<EnvNorm> st{infinitesimal_norm(StaticEnv{1.0}, 2, 1), infinitesimal_norm(StaticEnv{1.0}, 2, 2)};
  CHECK(moment_bound(1, 1.0, st) == doctest::Approx(4.0));
  CHECK(moment_bound(2, 1.0, st) == doctest::Approx(36.0));
  const std::vector<EnvNorm> dp{infinitesimal_norm(DynamicalPercolation{0.5, 1.0}, 2, 1),
                                infinitesimal_norm(DynamicalPercolation{0.5, 1.0}, 2, 2)};
  CHECK(moment_bound(2, 1.0, dp) == doctest::Approx(12.0));
  CHECK(moment_bound(1, 3.0, dp) == doctest::Approx(6.0));
  CHECK_THROWS_AS(moment_bound(2, 1.0, std::span<const EnvNorm>(st.data(), 1)), std::domain_error);
}

TEST_CASE("backward collision sums") {
  // Zero environment: the walk never moves, so each term is 1.
  const Lattice lat = Lattice::torus(2, 6);
  const TimeWindow w{-10.0, 0.0};
  const ConductanceTrajectory zero(lat, w, std::vector<Piecewise>(lat.num_edges(), Piecewise::constant(w, 0.0)));
  const auto s = backward_collision_sum(zero, Vertex{0, 0}, 10);
  REQUIRE(s.size() == 10);
  for (int m = 1; m <= 10; ++m) CHECK(s[static_cast<std::size_t>(m - 1)] == doctest::Approx(m));

  Stream rng = gen::stream(55, 0);
  const ConductanceTrajectory traj = gen::trajectory(rng, Lattice::torus(2, 4), TimeWindow{-4.0, 0.0});
  const auto sums = backward_collision_sum(traj, Vertex{1, 1}, 4);
  double expected = 0.0;
  for (int j = 1; j <= 4; ++j) {
    const KernelMatrix k = transition_kernel(traj, 0.0, -j);
    expected += k.entries.row(traj.lattice().vertex_id(Vertex{1, 1})).squaredNorm();
    CHECK(sums[static_cast<std::size_t>(j - 1)] == doctest::Approx(expected).epsilon(1e-10));
  }
  CHECK_THROWS_AS(backward_collision_sum(traj, Vertex{0, 0}, 5), std::domain_error);
}

TEST_CASE("Cauchy-Schwarz lower bound on ball collisions") {
  for (std::uint64_t c = 0; c < 20; ++c) {
    Stream rng = gen::stream(56, c);
    const Lattice lat = Lattice::torus(2, 7);
    const ConductanceTrajectory traj = gen::trajectory(rng, lat, TimeWindow{0.0, 2.0});
    const KernelMatrix k = transition_kernel(traj, 0.0, 2.0);
    std::vector<double> row(lat.num_vertices());
    for (std::size_t v = 0; v < row.size(); ++v) row[v] = k.entries(0, static_cast<Eigen::Index>(v));
    const CauchySchwarzBound b = cauchy_schwarz_bound(row, lat, Ball{Vertex{0, 0}, 2, Norm::L2});
    CHECK(b.ball_size == 13);
    CHECK(b.collision_sum >= b.bound - 1e-15);
    CHECK(b.bound == doctest::Approx(b.ball_mass * b.ball_mass / 13));
  }
}

TEST_CASE("mass transport holds for a static environment") {
  const MassTransport mt = mass_transport_check(StaticEnv{1.0}, Lattice::torus(2, 5), 2, 4, RandomSeed{3, {}});
  CHECK(mt.lhs == doctest::Approx(mt.rhs).epsilon(1e-10));
  CHECK(mt.agree);
  const MassTransport dp =
      mass_transport_check(DynamicalPercolation{0.5, 1.0}, Lattice::torus(2, 4), 2, 40, RandomSeed{4, {}});
  CHECK(dp.agree);
  CHECK(std::abs(dp.lhs - dp.rhs) <= dp.ci + 1e-12);
}

TEST_CASE("vertex cap") {
  const Lattice lat = Lattice::torus(2, 65);
  const TimeWindow w{0.0, 1.0};
  const ConductanceTrajectory traj(lat, w, std::vector<Piecewise>(lat.num_edges(), Piecewise::constant(w, 1.0)));
  CHECK_THROWS_AS(transition_kernel(traj, 0.0, 1.0), std::domain_error);
}
