#include "layerlq/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "layerlq/error.hpp"
#include "layerlq/linalg.hpp"

namespace layerlq {

namespace {

constexpr double kResidualTolerance = 1e-8;
constexpr int kMaxNewtonSteps = 12;
constexpr std::size_t kGrowthWindow = 5;
constexpr double kGrowthFactor = 2.0;

Matrix gain(const Matrix& b, const Eigen::LLT<Matrix>& r_chol, const Matrix& p) {
  return r_chol.solve(b.transpose() * p);
}

double relative_scale(const Matrix& p) { return std::max(1.0, p.norm()); }

}  // namespace

void UncertaintyModel::validate(Index n) const {
  if (directions.size() != weight_bounds.size()) {
    throw DimensionError("uncertainty has " + std::to_string(directions.size()) +
                         " directions but " + std::to_string(weight_bounds.size()) + " weight bounds");
  }
  for (std::size_t j = 0; j < directions.size(); ++j) {
    const Matrix& d = directions[j];
    if (d.rows() != n || d.cols() != n) {
      throw DimensionError("uncertainty direction " + std::to_string(j) + " is " +
                           std::to_string(d.rows()) + "x" + std::to_string(d.cols()) + ", expected " +
                           std::to_string(n) + "x" + std::to_string(n));
    }
    if (!d.allFinite()) throw DimensionError("uncertainty direction has non-finite entries");
    if (!(weight_bounds[j] >= 0.0) || !std::isfinite(weight_bounds[j])) {
      throw DimensionError("weight bounds must be finite and nonnegative");
    }
  }
  if (realized_weights) {
    if (realized_weights->size() != directions.size()) {
      throw DimensionError("realized weights do not match the number of directions");
    }
    for (std::size_t j = 0; j < directions.size(); ++j) {
      if (std::abs((*realized_weights)[j]) > weight_bounds[j] * (1.0 + 1e-12)) {
        throw DimensionError("realized weight " + std::to_string((*realized_weights)[j]) +
                             " exceeds its bound " + std::to_string(weight_bounds[j]));
      }
    }
  }
}

Matrix UncertaintyModel::realize(const std::vector<double>& weights, Index n) const {
  if (weights.size() != directions.size()) {
    throw DimensionError("weight vector has " + std::to_string(weights.size()) + " entries, model has " +
                         std::to_string(directions.size()) + " directions");
  }
  Matrix out = Matrix::Zero(n, n);
  for (std::size_t j = 0; j < directions.size(); ++j) out += weights[j] * directions[j];
  return out;
}

std::vector<double> UncertaintyModel::realized_or_zero() const {
  if (realized_weights) return *realized_weights;
  return std::vector<double>(directions.size(), 0.0);
}

std::vector<std::vector<double>> UncertaintyModel::vertices() const {
  const std::size_t d = directions.size();
  std::vector<std::vector<double>> out;
  out.reserve(std::size_t{1} << d);
  for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
    std::vector<double> w(d);
    for (std::size_t j = 0; j < d; ++j) w[j] = (mask >> j & 1U) ? weight_bounds[j] : -weight_bounds[j];
    out.push_back(std::move(w));
  }
  return out;
}

void AreProblem::validate() const {
  const Index n = a.rows();
  if (a.cols() != n) throw DimensionError("A must be square");
  if (b.rows() != n) throw DimensionError("B must have as many rows as A");
  if (q.rows() != n || q.cols() != n) throw DimensionError("Q must match A");
  if (r.rows() != b.cols() || r.cols() != b.cols()) throw DimensionError("R must be p x p for B n x p");
  if ((q - q.transpose()).norm() > 1e-10 * std::max(1.0, q.norm())) {
    throw DimensionError("Q must be symmetric");
  }
  if ((r - r.transpose()).norm() > 1e-10 * std::max(1.0, r.norm())) {
    throw DimensionError("R must be symmetric");
  }
  if (!is_psd(q)) throw CheckFailed("Q must be positive semidefinite", min_eig(q));
  if (!is_pd(r)) throw CheckFailed("R must be positive definite", min_eig(r));
  if (uncertainty) uncertainty->validate(n);
}

double are_residual(const Matrix& a, const Matrix& b, const Matrix& q, const Matrix& r,
                    const Matrix& p) {
  const Matrix pb = p * b;
  return (a.transpose() * p + p * a + q - pb * r.llt().solve(pb.transpose())).norm();
}

namespace {

// Newton–Kleinman: each step solves (A - BK)^T X + X (A - BK) + Q + K^T R K = 0.
// Steps that do not lower the residual are rejected.
AreSolution newton_kleinman(const AreProblem& prob, const Eigen::LLT<Matrix>& r_chol, Matrix p) {
  AreSolution sol;
  sol.residual_norm = are_residual(prob.a, prob.b, prob.q, prob.r, p);
  while (sol.residual_norm > 0.01 * kResidualTolerance * relative_scale(p) &&
         sol.refinement_steps < kMaxNewtonSteps) {
    const Matrix k = gain(prob.b, r_chol, p);
    const Matrix closed = prob.a - prob.b * k;
    Matrix next;
    try {
      next = solve_lyapunov(closed, prob.q + k.transpose() * prob.r * k);
    } catch (const NoStabilizingSolution&) {
      break;
    }
    const double next_residual = are_residual(prob.a, prob.b, prob.q, prob.r, next);
    if (!(next_residual < sol.residual_norm)) break;
    p = next;
    sol.residual_norm = next_residual;
    ++sol.refinement_steps;
  }
  sol.p = std::move(p);
  sol.k = gain(prob.b, r_chol, sol.p);
  return sol;
}

bool stabilizes(const AreProblem& prob, const AreSolution& sol) {
  return spectral_abscissa(prob.a - prob.b * sol.k) < 0.0;
}

AreSolution solve_are_unchecked(const AreProblem& prob) {
  const Index n = prob.a.rows();
  const Eigen::LLT<Matrix> r_chol(prob.r);
  const Matrix s = prob.b * r_chol.solve(prob.b.transpose());

  Matrix h(2 * n, 2 * n);
  h << prob.a, -s, -prob.q, -prob.a.transpose();

  const double h_scale = std::max(h.cwiseAbs().maxCoeff(), 1.0);
  Index stable = 0;
  const ComplexMatrix u = ordered_schur_basis(h, stable, 1e-9 * h_scale);
  if (stable != n) {
    throw NoStabilizingSolution("Hamiltonian has " + std::to_string(stable) + " stable eigenvalues, expected " +
                                std::to_string(n));
  }
  const ComplexMatrix u1 = u.topLeftCorner(n, n);
  const ComplexMatrix u2 = u.bottomLeftCorner(n, n);
  Eigen::PartialPivLU<ComplexMatrix> lu(u1.transpose());
  const double rcond = lu.rcond();
  if (!(rcond > 1e3 * std::numeric_limits<double>::epsilon())) {
    throw NoStabilizingSolution("stable invariant subspace has no graph representation (rcond " +
                                std::to_string(rcond) + ")");
  }
  // P^T = U1^{-T} U2^T; P is symmetric so no final transpose.
  Matrix p = symmetrize(lu.solve(u2.transpose()).real());

  AreSolution sol = newton_kleinman(prob, r_chol, std::move(p));
  if (sol.residual_norm > kResidualTolerance * relative_scale(sol.p)) {
    throw NoStabilizingSolution("ARE residual " + std::to_string(sol.residual_norm) +
                                " above tolerance after refinement");
  }
  if (!stabilizes(prob, sol)) {
    throw NoStabilizingSolution("ARE solution does not stabilize A - BK (abscissa " +
                                std::to_string(spectral_abscissa(prob.a - prob.b * sol.k)) + ")");
  }
  return sol;
}

}  // namespace

AreSolution solve_are(const AreProblem& prob) {
  prob.validate();
  return solve_are_unchecked(prob);
}

Matrix build_majorant(const Matrix& p, const UncertaintyModel& model) {
  const Index n = p.rows();
  if (p.cols() != n) throw DimensionError("build_majorant: P must be square");
  model.validate(n);
  Matrix u = Matrix::Zero(n, n);
  for (std::size_t j = 0; j < model.size(); ++j) {
    if (model.weight_bounds[j] == 0.0) continue;
    const Matrix& d = model.directions[j];
    const SymmetricEigen e = eig_sym(symmetrize(d.transpose() * p + p * d));
    u += model.weight_bounds[j] *
         (e.vectors * e.values.cwiseAbs().asDiagonal() * e.vectors.transpose());
  }
  return symmetrize(u);
}

double guaranteed_residual(const AreProblem& prob, const Matrix& p) {
  const Matrix pb = p * prob.b;
  Matrix res = prob.a.transpose() * p + p * prob.a + prob.q - pb * prob.r.llt().solve(pb.transpose());
  if (prob.uncertainty) res += build_majorant(p, *prob.uncertainty);
  return res.norm();
}

GuaranteedSolution solve_guaranteed_are(const AreProblem& prob, const GuaranteedOptions& opts) {
  prob.validate();
  const UncertaintyModel& model = prob.uncertainty ? *prob.uncertainty : UncertaintyModel{};
  const Index n = prob.a.rows();

  AreProblem step = prob;
  step.uncertainty.reset();
  AreSolution current = solve_are_unchecked(step);
  const Eigen::LLT<Matrix> r_chol(prob.r);
  std::vector<double> trace{current.p.norm()};

  auto require_pd = [&](const Matrix& p, int iteration) {
    const double lo = min_eig(p);
    if (!(lo > kPdTolerance * std::max(spectral_norm(p), 1e-300))) {
      throw CheckFailed("iterate " + std::to_string(iteration) + " of the guaranteed-cost ARE is not positive definite",
                        lo);
    }
  };
  require_pd(current.p, 0);

  GuaranteedSolution out;
  if (model.empty()) {
    out.p = current.p;
    out.k = current.k;
    out.u_of_p = Matrix::Zero(n, n);
    out.residual_norm = current.residual_norm;
    return out;
  }

  const double blowup = 1e12 * std::max(1.0, trace.front());
  Matrix majorant = build_majorant(current.p, model);
  double previous_residual = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= opts.max_iterations; ++it) {
    step.q = symmetrize(prob.q + majorant);
    AreSolution next;
    try {
      // A and B do not change between iterates, so the previous gain stabilizes the
      // next problem and Newton–Kleinman from it stays on the stabilizing branch.
      next = newton_kleinman(step, r_chol, current.p);
      if (next.residual_norm > kResidualTolerance * relative_scale(next.p) || !stabilizes(step, next)) {
        next = solve_are_unchecked(step);
      }
    } catch (const NoStabilizingSolution& err) {
      throw FixedPointDivergence(std::string("guaranteed-cost iteration failed: ") + err.what(), trace);
    }
    const double change = (next.p - current.p).norm();
    trace.push_back(next.p.norm());
    if (!std::isfinite(trace.back()) || trace.back() > blowup) {
      throw FixedPointDivergence("guaranteed-cost iteration diverged (||P||_F = " +
                                     std::to_string(trace.back()) + ")",
                                 trace);
    }
    // Sustained geometric growth means the fixed point does not exist.
    if (trace.size() > kGrowthWindow) {
      bool growing = true;
      for (std::size_t i = trace.size() - kGrowthWindow; i < trace.size(); ++i) {
        growing = growing && trace[i] > kGrowthFactor * trace[i - 1];
      }
      if (growing) {
        throw FixedPointDivergence("guaranteed-cost iteration diverged (||P||_F at least doubled on each of the last " +
                                       std::to_string(kGrowthWindow) + " steps)",
                                   trace);
      }
    }
    require_pd(next.p, it);
    majorant = build_majorant(next.p, model);
    const Matrix pb = next.p * prob.b;
    const double residual = (prob.a.transpose() * next.p + next.p * prob.a + prob.q + majorant -
                             pb * r_chol.solve(pb.transpose()))
                                .norm();
    // Stop once the full residual is small, or once steps are negligible and the
    // residual has reached its rounding floor.
    const bool small = change <= opts.convergence_tolerance * relative_scale(current.p);
    const bool converged =
        residual <= opts.residual_target || (small && residual >= previous_residual);
    previous_residual = residual;
    current = std::move(next);
    if (converged) {
      out.p = current.p;
      out.k = current.k;
      out.u_of_p = majorant;
      out.residual_norm = residual;
      out.iterations = it;
      return out;
    }
  }
  throw FixedPointDivergence("guaranteed-cost iteration did not converge in " +
                                 std::to_string(opts.max_iterations) + " iterations",
                             trace);
}

double guaranteed_cost_bound(const GuaranteedSolution& sol, const Vector& x0) {
  if (x0.size() != sol.p.rows()) throw DimensionError("x0 does not match P");
  return x0.dot(sol.p * x0);
}

}  // namespace layerlq
