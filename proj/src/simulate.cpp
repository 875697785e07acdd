#include "layerlq/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <string>

#include "layerlq/error.hpp"

namespace layerlq {

TaylorLayer taylor_layer(const Graph& graph, std::vector<InputCoupling> inputs) {
  const Index n = graph.node_count();
  TaylorLayer layer{graph, std::move(inputs), {}, {}};
  layer.b = Matrix::Zero(n, static_cast<Index>(layer.inputs.size()));
  for (std::size_t k = 0; k < layer.inputs.size(); ++k) {
    const InputCoupling& c = layer.inputs[k];
    if (c.node < 0 || c.node >= n) {
      throw DimensionError("input " + std::to_string(k) + " couples into node " + std::to_string(c.node) +
                           " outside the graph");
    }
    layer.b(c.node, static_cast<Index>(k)) += c.gain;
  }
  layer.a = -matrices_of(graph).laplacian;
  layer.a.diagonal() -= layer.b.rowwise().sum();
  return layer;
}

void SimulationConfig::validate(Index dim) const {
  if (!(dt > 0.0)) throw DimensionError("dt must be positive");
  if (!(t_final >= dt)) throw DimensionError("t_final must be at least dt");
  if (x0.size() != dim) {
    throw DimensionError("x0 has " + std::to_string(x0.size()) + " entries, state has " + std::to_string(dim));
  }
  if (record_stride < 1) throw DimensionError("record stride must be positive");
}

SimulationTrace integrate(const Matrix& a, const Matrix& b, const Matrix& k, const Matrix& q, const Matrix& r,
                          const SimulationConfig& cfg) {
  const Index n = a.rows();
  if (a.cols() != n || b.rows() != n || k.rows() != b.cols() || k.cols() != n) {
    throw DimensionError("integrate: inconsistent A, B, K dimensions");
  }
  if (q.rows() != n || q.cols() != n || r.rows() != k.rows() || r.cols() != k.rows()) {
    throw DimensionError("integrate: cost weights do not match the plant");
  }
  cfg.validate(n);

  const double h = cfg.dt;
  const Matrix closed = a - b * k;
  const Matrix hm = h * closed;
  // I + hM (I + hM/2 (I + hM/3 (I + hM/4)))
  Matrix step = Matrix::Identity(n, n) + hm / 4.0;
  step = Matrix::Identity(n, n) + hm / 3.0 * step;
  step = Matrix::Identity(n, n) + hm / 2.0 * step;
  step = Matrix::Identity(n, n) + hm * step;
  const Matrix weight = q + k.transpose() * r * k;

  const auto steps = static_cast<long long>(std::ceil(cfg.t_final / h - 1e-9));
  const double x0_norm = cfg.x0.norm();
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<double> costs;

  Vector x = cfg.x0;
  Vector next(n);
  double integrand = x.dot(weight * x);
  double cost = 0.0;
  times.push_back(0.0);
  states.push_back(x);
  costs.push_back(0.0);

  SimulationTrace trace;
  long long i = 0;
  for (; i < steps; ++i) {
    next.noalias() = step * x;
    x.swap(next);
    const double integrand_next = x.dot(weight * x);
    cost += 0.5 * h * (integrand + integrand_next);
    integrand = integrand_next;
    const double norm = x.norm();
    const bool diverged = !std::isfinite(norm) || norm > cfg.divergence_norm;
    const bool settled = norm <= cfg.convergence_ratio * x0_norm;
    if ((i + 1) % cfg.record_stride == 0 || diverged || settled || i + 1 == steps) {
      times.push_back(static_cast<double>(i + 1) * h);
      states.push_back(x);
      costs.push_back(cost);
    }
    if (diverged) {
      trace.divergent = true;
      break;
    }
    if (settled) {
      trace.tail_converged = true;
      break;
    }
  }

  trace.times = std::move(times);
  trace.running_cost = std::move(costs);
  trace.states.resize(static_cast<Index>(states.size()), n);
  for (std::size_t s = 0; s < states.size(); ++s) trace.states.row(static_cast<Index>(s)) = states[s].transpose();
  trace.inputs = -(trace.states * k.transpose());
  return trace;
}

double accumulate_cost(const SimulationTrace& trace, const Matrix& q, const Matrix& r) {
  if (trace.states.cols() != q.rows() || trace.inputs.cols() != r.rows()) {
    throw DimensionError("accumulate_cost: weights do not match the trace");
  }
  double total = 0.0;
  double prev = 0.0;
  for (Index s = 0; s < trace.states.rows(); ++s) {
    const Vector x = trace.states.row(s).transpose();
    const Vector u = trace.inputs.row(s).transpose();
    const double value = x.dot(q * x) + u.dot(r * u);
    if (s > 0) total += 0.5 * (trace.times[s] - trace.times[s - 1]) * (prev + value);
    prev = value;
  }
  return total;
}

void write_trace_csv(std::ostream& out, const SimulationTrace& trace, Index stride) {
  stride = std::max<Index>(stride, 1);
  out << 't';
  for (Index i = 0; i < trace.states.cols(); ++i) out << ",x_" << i;
  for (Index i = 0; i < trace.inputs.cols(); ++i) out << ",u_" << i;
  out << ",J\n";
  const auto old_precision = out.precision(12);
  const Index rows = trace.states.rows();
  for (Index s = 0; s < rows; ++s) {
    if (s % stride != 0 && s + 1 != rows) continue;
    out << trace.times[s];
    for (Index i = 0; i < trace.states.cols(); ++i) out << ',' << trace.states(s, i);
    for (Index i = 0; i < trace.inputs.cols(); ++i) out << ',' << trace.inputs(s, i);
    out << ',' << trace.running_cost[s] << '\n';
  }
  out.precision(old_precision);
}

Vector random_unit_vector(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Vector v(n);
  for (Index i = 0; i < n; ++i) {
    // Top 53 bits to [0, 1), then to [-1, 1). Independent of <random> distributions,
    // which are not portable across standard libraries.
    const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    v(i) = 2.0 * unit - 1.0;
  }
  const double norm = v.norm();
  if (norm == 0.0) {
    v.setZero();
    v(0) = 1.0;
    return v;
  }
  return v / norm;
}

}  // namespace layerlq
