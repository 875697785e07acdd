#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "layerlq/graphs.hpp"
#include "layerlq/types.hpp"

namespace layerlq {

/// External source k couples into `node` with gain b_pk; input k is the position in
/// the coupling list.
struct InputCoupling {
  Index node = 0;
  double gain = 1.0;
};

/// Taylor influenced-attitude-change layer
///   dy_p/dt = Σ_q a_pq (y_q - y_p) + Σ_k b_pk (s_k - y_p)
/// with the sources s_k acting as the control channel: a = -L(graph) - diag(Σ_k b_pk),
/// b(p, k) = b_pk.
struct TaylorLayer {
  Graph graph;
  std::vector<InputCoupling> inputs;
  Matrix a;
  Matrix b;
};

TaylorLayer taylor_layer(const Graph& graph, std::vector<InputCoupling> inputs);

enum class Controller { baseline, guaranteed };

struct SimulationConfig {
  Vector x0;
  double t_final = 50.0;
  double dt = 1e-3;
  Index record_stride = 1;
  /// Stop once ||x(t)|| <= convergence_ratio * ||x0||.
  double convergence_ratio = 1e-8;
  /// Truncate and flag the run once ||x(t)|| exceeds this.
  double divergence_norm = 1e12;
  Controller controller = Controller::guaranteed;

  void validate(Index dim) const;
};

struct SimulationTrace {
  std::vector<double> times;
  Matrix states;  // one row per recorded time
  Matrix inputs;  // u = -K x, one row per recorded time
  std::vector<double> running_cost;
  bool divergent = false;
  bool tail_converged = false;

  double final_cost() const { return running_cost.empty() ? 0.0 : running_cost.back(); }
};

/// Classical fixed-step RK4 on dx/dt = (A - B K) x with u = -K x. For this linear
/// time-invariant field one RK4 step equals multiplication by
/// I + hM + (hM)^2/2 + (hM)^3/6 + (hM)^4/24, M = A - BK, which is what is applied.
/// The running cost ∫ x^T Q x + u^T R u is accumulated with the trapezoid rule on
/// every step, whatever the record stride.
SimulationTrace integrate(const Matrix& a, const Matrix& b, const Matrix& k, const Matrix& q, const Matrix& r,
                          const SimulationConfig& cfg);

/// Trapezoid rule over the recorded samples of a trace.
double accumulate_cost(const SimulationTrace& trace, const Matrix& q, const Matrix& r);

struct CostReport {
  double j_sim = 0.0;
  double bound = 0.0;   // x0^T P⊗ x0
  double margin = 0.0;  // bound - j_sim
  double spectral_abscissa = 0.0;
  bool divergent = false;
  bool tail_converged = false;
  double t_end = 0.0;

  bool bound_satisfied(double rel_tol = 1e-3) const { return j_sim <= bound * (1.0 + rel_tol); }
};

/// CSV with header t,x_0..x_{n-1},u_0..u_{p-1},J; `stride` thins the recorded rows.
void write_trace_csv(std::ostream& out, const SimulationTrace& trace, Index stride = 1);

/// Deterministic pseudo-random unit vector from mt19937_64 with a portable mapping
/// to [-1, 1).
Vector random_unit_vector(Index n, std::uint64_t seed);

}  // namespace layerlq
