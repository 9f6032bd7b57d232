#include "dynrcm/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <tuple>

#include "dynrcm/stats.hpp"

namespace dynrcm {

namespace {

// Largest lambda * dt handled by one uniformization sum; keeps exp(-m) well
// away from underflow.
constexpr double kMaxChunkMass = 20.0;
constexpr std::size_t kMaxTerms = 100000;

void check_size(const Lattice& lat) {
  if (lat.num_vertices() > kMaxKernelVertices) throw std::domain_error("lattice exceeds the kernel size cap");
}

struct Change {
  double time;
  EdgeId edge;
  double value;
};

class Uniformizer {
 public:
  Uniformizer(const Lattice& lat, std::vector<double> rates, double lambda, std::size_t rows, double tol)
      : lat_(lat), rates_(std::move(rates)), lambda_(lambda), rows_(rows), tol_(tol) {
    from_.resize(rates_.size());
    to_.resize(rates_.size());
    coeff_.resize(rates_.size());
    for (EdgeId e = 0; e < rates_.size(); ++e) {
      from_[e] = lat.edge_from(e);
      to_[e] = lat.edge_to(e);
      coeff_[e] = lambda_ > 0.0 ? rates_[e] / lambda_ : 0.0;
    }
    keep_.resize(lat.num_vertices());
    for (VertexId v = 0; v < keep_.size(); ++v) refresh_vertex(v);
  }

  void set_rate(EdgeId e, double value) {
    rates_[e] = value;
    coeff_[e] = value / lambda_;
    refresh_vertex(from_[e]);
    refresh_vertex(to_[e]);
  }

  /// data <- data * exp(L * dt). Returns the truncation bound added.
  double advance(std::vector<double>& data, double dt) {
    if (dt <= 0.0 || lambda_ <= 0.0) return 0.0;
    const double mass = lambda_ * dt;
    const auto chunks = static_cast<std::size_t>(std::ceil(mass / kMaxChunkMass));
    const double m = mass / static_cast<double>(chunks);
    double bound = 0.0;
    for (std::size_t c = 0; c < chunks; ++c) bound += chunk(data, m);
    return bound;
  }

 private:
  void refresh_vertex(VertexId v) {
    // Summed from scratch so repeated updates never accumulate rounding.
    double degree = 0.0;
    for (EdgeId e : lat_.incident(v)) degree += rates_[e];
    keep_[v] = lambda_ > 0.0 ? 1.0 - degree / lambda_ : 1.0;
  }

  double chunk(std::vector<double>& data, double m) {
    cur_ = data;
    double weight = std::exp(-m);
    double cumulative = weight;
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = weight * cur_[i];
    for (std::size_t k = 1; 1.0 - cumulative > tol_ && k < kMaxTerms; ++k) {
      step();
      weight *= m / static_cast<double>(k);
      // The remaining tail goes onto the last term so rows stay stochastic.
      const double w = 1.0 - (cumulative + weight) <= tol_ ? 1.0 - cumulative : weight;
      for (std::size_t i = 0; i < data.size(); ++i) data[i] += w * cur_[i];
      cumulative += weight;
    }
    return std::max(0.0, 2.0 * (1.0 - cumulative));
  }

  /// cur <- cur * P with P = I + L / lambda.
  void step() {
    next_.resize(cur_.size());
    const std::size_t n = keep_.size();
    if (rows_ == 1) {
      for (std::size_t v = 0; v < n; ++v) next_[v] = keep_[v] * cur_[v];
      for (std::size_t e = 0; e < coeff_.size(); ++e) {
        const double c = coeff_[e];
        const VertexId a = from_[e];
        const VertexId b = to_[e];
        next_[b] += c * cur_[a];
        next_[a] += c * cur_[b];
      }
    } else {
      for (std::size_t v = 0; v < n; ++v) {
        const double keep = keep_[v];
        for (std::size_t r = 0; r < rows_; ++r) next_[v * rows_ + r] = keep * cur_[v * rows_ + r];
      }
      for (std::size_t e = 0; e < coeff_.size(); ++e) {
        const double c = coeff_[e];
        if (c == 0.0) continue;
        const std::size_t a = from_[e] * rows_;
        const std::size_t b = to_[e] * rows_;
        for (std::size_t r = 0; r < rows_; ++r) {
          next_[b + r] += c * cur_[a + r];
          next_[a + r] += c * cur_[b + r];
        }
      }
    }
    cur_.swap(next_);
  }

  const Lattice& lat_;
  std::vector<double> rates_;
  std::vector<VertexId> from_;
  std::vector<VertexId> to_;
  std::vector<double> coeff_;
  std::vector<double> keep_;
  double lambda_;
  std::size_t rows_;
  double tol_;
  std::vector<double> cur_;
  std::vector<double> next_;
};

}  // namespace

GeneratorMatrix generator_at(const ConductanceTrajectory& traj, double t) {
  const Lattice& lat = traj.lattice();
  check_size(lat);
  if (!traj.window().contains(t)) throw std::domain_error("generator time outside the window");
  const auto n = static_cast<Eigen::Index>(lat.num_vertices());
  GeneratorMatrix g{lat, t, Eigen::MatrixXd::Zero(n, n)};
  for (EdgeId e = 0; e < lat.num_edges(); ++e) {
    const double c = traj.value(e, t);
    const auto a = static_cast<Eigen::Index>(lat.edge_from(e));
    const auto b = static_cast<Eigen::Index>(lat.edge_to(e));
    g.entries(a, b) += c;
    g.entries(b, a) += c;
    g.entries(a, a) -= c;
    g.entries(b, b) -= c;
  }
  return g;
}

double propagate_rows(const ConductanceTrajectory& traj, std::vector<double>& data, std::size_t rows, double s,
                      double t, double tol, std::span<const double> checkpoints,
                      const std::function<void(std::size_t, const std::vector<double>&)>& on_checkpoint) {
  if (!(tol > 0.0)) throw std::domain_error("uniformization tolerance must be > 0");
  if (!(s <= t)) throw std::domain_error("propagate_rows needs s <= t");
  const TimeWindow w = traj.window();
  if (!w.contains(s) || !w.contains(t)) throw std::domain_error("kernel times outside the trajectory window");
  const Lattice& lat = traj.lattice();
  if (data.size() != rows * lat.num_vertices()) throw std::domain_error("row block has the wrong size");
  for (std::size_t k = 0; k < checkpoints.size(); ++k) {
    if (!(checkpoints[k] > s && checkpoints[k] <= t) || (k > 0 && !(checkpoints[k] > checkpoints[k - 1]))) {
      throw std::domain_error("checkpoints must be increasing and inside (s, t]");
    }
  }

  std::vector<double> rates(lat.num_edges());
  std::vector<double> peak(lat.num_edges());
  std::vector<Change> changes;
  for (EdgeId e = 0; e < lat.num_edges(); ++e) {
    const Piecewise& pw = traj.pieces(e);
    std::size_t i = pw.piece_at(s);
    rates[e] = pw.values[i];
    peak[e] = rates[e];
    for (++i; i < pw.values.size() && pw.breakpoints[i] < t; ++i) {
      peak[e] = std::max(peak[e], pw.values[i]);
      if (pw.values[i] != pw.values[i - 1]) changes.push_back({pw.breakpoints[i], e, pw.values[i]});
    }
  }
  std::sort(changes.begin(), changes.end(),
            [](const Change& a, const Change& b) { return std::tie(a.time, a.edge) < std::tie(b.time, b.edge); });

  std::vector<double> vertex_peak(lat.num_vertices(), 0.0);
  for (EdgeId e = 0; e < lat.num_edges(); ++e) {
    vertex_peak[lat.edge_from(e)] += peak[e];
    vertex_peak[lat.edge_to(e)] += peak[e];
  }
  const double lambda = vertex_peak.empty() ? 0.0 : *std::max_element(vertex_peak.begin(), vertex_peak.end());

  Uniformizer uni(lat, std::move(rates), lambda, rows, tol);
  double bound = 0.0;
  double now = s;
  std::size_t ci = 0;
  std::size_t ki = 0;
  while (true) {
    double next = t;
    if (ci < changes.size()) next = std::min(next, changes[ci].time);
    if (ki < checkpoints.size()) next = std::min(next, checkpoints[ki]);
    bound += uni.advance(data, next - now);
    now = next;
    while (ci < changes.size() && changes[ci].time == now) {
      uni.set_rate(changes[ci].edge, changes[ci].value);
      ++ci;
    }
    while (ki < checkpoints.size() && checkpoints[ki] == now) {
      if (on_checkpoint) on_checkpoint(ki, data);
      ++ki;
    }
    if (now >= t) break;
  }
  return bound;
}

KernelMatrix transition_kernel(const ConductanceTrajectory& traj, double s, double t, double tol) {
  if (!(tol > 0.0)) throw std::domain_error("uniformization tolerance must be > 0");
  const Lattice& lat = traj.lattice();
  check_size(lat);
  if (!traj.window().contains(s) || !traj.window().contains(t)) {
    throw std::domain_error("kernel times outside the trajectory window");
  }
  const std::size_t n = lat.num_vertices();
  std::vector<double> data(n * n, 0.0);
  for (std::size_t v = 0; v < n; ++v) data[v * n + v] = 1.0;
  double bound = 0.0;
  if (s <= t) {
    bound = propagate_rows(traj, data, n, s, t, tol);
  } else {
    bound = propagate_rows(reverse_environment(traj), data, n, -s, -t, tol);
  }
  KernelMatrix k{lat, s, t, Eigen::MatrixXd(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)), bound};
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t r = 0; r < n; ++r) {
      k.entries(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(v)) = data[v * n + r];
    }
  }
  return k;
}

std::vector<double> backward_collision_sum(const ConductanceTrajectory& traj, const Vertex& origin, int max_m,
                                           double tol) {
  if (max_m < 1) throw std::domain_error("backward collision sum needs M >= 1");
  const Lattice& lat = traj.lattice();
  check_size(lat);
  if (!(traj.window().start <= -static_cast<double>(max_m)) || !(traj.window().end >= 0.0)) {
    throw std::domain_error("trajectory window must cover [-M, 0]");
  }
  const VertexId o = lat.vertex_id(origin);
  const ConductanceTrajectory reversed = reverse_environment(traj);
  std::vector<double> row(lat.num_vertices(), 0.0);
  row[o] = 1.0;
  std::vector<double> checkpoints;
  for (int m = 1; m <= max_m; ++m) checkpoints.push_back(m);
  std::vector<double> sums;
  sums.reserve(checkpoints.size());
  double running = 0.0;
  propagate_rows(reversed, row, 1, 0.0, static_cast<double>(max_m), tol, checkpoints,
                 [&](std::size_t, const std::vector<double>& v) {
                   std::vector<double> sq(v.size());
                   for (std::size_t i = 0; i < v.size(); ++i) sq[i] = v[i] * v[i];
                   running += pairwise_sum(sq);
                   sums.push_back(running);
                 });
  return sums;
}

CauchySchwarzBound cauchy_schwarz_bound(std::span<const double> kernel_row, const Lattice& lattice,
                                        const Ball& ball) {
  if (kernel_row.size() != lattice.num_vertices()) throw std::domain_error("kernel row has the wrong length");
  double total = 0.0;
  for (double p : kernel_row) {
    if (p < 0.0) throw std::domain_error("kernel row has negative entries");
    total += p;
  }
  if (total > 1.0 + 1e-9) throw std::domain_error("kernel row sums to more than 1");
  const auto members = lattice.ball_members(ball);
  if (members.empty()) throw std::domain_error("empty ball");
  CauchySchwarzBound out;
  out.ball_size = members.size();
  for (const Vertex& v : members) {
    const double p = kernel_row[lattice.vertex_id(v)];
    out.ball_mass += p;
    out.collision_sum += p * p;
  }
  out.bound = out.ball_mass * out.ball_mass / static_cast<double>(out.ball_size);
  return out;
}

MassTransport mass_transport_check(const EnvironmentKind& kind, const Lattice& torus, int m, int replicas,
                                   const RandomSeed& seed, double tol, int threads) {
  if (!torus.is_torus()) throw std::domain_error("mass transport check needs a torus");
  if (m < 1 || replicas < 1) throw std::domain_error("mass transport check needs m >= 1 and replicas >= 1");
  check_size(torus);
  const EnvironmentSpec spec{kind, torus, TimeWindow{0.0, static_cast<double>(m)}};
  spec.validate();
  const auto o = static_cast<Eigen::Index>(torus.vertex_id(torus.origin()));
  std::vector<double> lhs(static_cast<std::size_t>(replicas));
  std::vector<double> rhs(lhs.size());
  std::vector<double> diff(lhs.size());
  parallel_for(lhs.size(), threads, [&](std::size_t i) {
    const ConductanceTrajectory traj = sample_environment(spec, derive_seed(seed, i));
    const KernelMatrix k = transition_kernel(traj, 0.0, static_cast<double>(m), tol);
    lhs[i] = k.entries.row(o).squaredNorm();
    rhs[i] = k.entries.col(o).squaredNorm();
    diff[i] = lhs[i] - rhs[i];
  });
  const Summary l = summarize(lhs);
  const Summary r = summarize(rhs);
  const Summary d = summarize(diff);
  MassTransport out;
  out.lhs = l.mean;
  out.rhs = r.mean;
  out.lhs_standard_error = l.standard_error;
  out.rhs_standard_error = r.standard_error;
  out.difference_standard_error = d.standard_error;
  out.ci = 3.0 * d.standard_error;
  out.replicas = replicas;
  out.agree = std::abs(d.mean) <= out.ci + 1e-12;
  return out;
}

StirlingTable::StirlingTable(int max_p) : max_p_(max_p) {
  if (max_p < 1 || max_p > kLimit) throw std::domain_error("Stirling table size must lie in [1, 25]");
  values_.assign(static_cast<std::size_t>(max_p) + 1, std::vector<std::uint64_t>(static_cast<std::size_t>(max_p) + 1, 0));
  values_[0][0] = 1;
  for (std::size_t p = 1; p <= static_cast<std::size_t>(max_p); ++p) {
    for (std::size_t l = 1; l <= p; ++l) values_[p][l] = l * values_[p - 1][l] + values_[p - 1][l - 1];
  }
}

std::uint64_t StirlingTable::operator()(int p, int l) const {
  if (l < 1 || l > p || p > max_p_) throw std::domain_error("Stirling index out of range");
  return values_[static_cast<std::size_t>(p)][static_cast<std::size_t>(l)];
}

std::uint64_t stirling2(int p, int l) { return StirlingTable(std::max(1, p))(p, l); }

double moment_bound(int p, double length, std::span<const EnvNorm> norms) {
  if (p < 1) throw std::domain_error("moment order must be >= 1");
  if (length < 0.0) throw std::domain_error("interval length must be >= 0");
  const StirlingTable table(p);
  double bound = 0.0;
  double factorial = 1.0;
  for (int l = 1; l <= p; ++l) {
    factorial *= l;
    auto it = std::find_if(norms.begin(), norms.end(), [&](const EnvNorm& n) { return n.p == l; });
    if (it == norms.end()) throw std::domain_error("moment bound is missing the norm of order " + std::to_string(l));
    const double norm = it->value + it->ci_halfwidth;
    bound += static_cast<double>(table(p, l)) * factorial * std::pow(length * norm, l);
  }
  return bound;
}

void write_kernel_csv(const KernelMatrix& kernel, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(17);
  for (Eigen::Index r = 0; r < kernel.entries.rows(); ++r) {
    for (Eigen::Index c = 0; c < kernel.entries.cols(); ++c) {
      out << kernel.entries(r, c) << (c + 1 == kernel.entries.cols() ? '\n' : ',');
    }
  }
}

}  // namespace dynrcm
