#pragma once

#include <optional>
#include <vector>

#include "layerlq/types.hpp"

namespace layerlq {

/// Structured perturbation ΔA = Σ_j w_j Ã_j with admissible |w_j| <= w̄_j.
struct UncertaintyModel {
  std::vector<Matrix> directions;
  std::vector<double> weight_bounds;
  std::optional<std::vector<double>> realized_weights;

  static UncertaintyModel none() { return {}; }

  std::size_t size() const noexcept { return directions.size(); }
  bool empty() const noexcept { return directions.empty(); }

  /// Throws DimensionError on mismatched sizes, negative bounds or inadmissible
  /// realized weights.
  void validate(Index n) const;

  /// Σ_j w_j Ã_j. An empty model realizes the n×n zero matrix.
  Matrix realize(const std::vector<double>& weights, Index n) const;

  /// The realized weights if set, zeros otherwise.
  std::vector<double> realized_or_zero() const;

  /// All 2^d sign combinations (±w̄_1, ..., ±w̄_d); one empty vector when d == 0.
  std::vector<std::vector<double>> vertices() const;
};

struct AreProblem {
  Matrix a;
  Matrix b;
  Matrix q;
  Matrix r;
  std::optional<UncertaintyModel> uncertainty;

  /// Checks dimensions, q symmetric PSD and r symmetric PD. Controllability is
  /// left to the solver, which fails loudly on unstabilizable data.
  void validate() const;
};

struct AreSolution {
  Matrix p;
  Matrix k;
  double residual_norm = 0.0;
  int refinement_steps = 0;
};

struct GuaranteedSolution {
  Matrix p;
  Matrix k;
  Matrix u_of_p;
  double residual_norm = 0.0;
  int iterations = 0;
};

/// ||A^T P + P A + Q - P B R^{-1} B^T P||_F.
double are_residual(const Matrix& a, const Matrix& b, const Matrix& q, const Matrix& r,
                    const Matrix& p);

/// Stabilizing solution of A^T P + P A + Q - P B R^{-1} B^T P = 0.
///
/// The stable invariant subspace of the Hamiltonian [[A, -B R^{-1} B^T], [-Q, -A^T]]
/// is extracted from an ordered Schur form, then Newton–Kleinman steps polish the
/// residual to 1e-8 * max(1, ||P||_F). Throws NoStabilizingSolution.
AreSolution solve_are(const AreProblem& prob);

/// 𝒰(P) = Σ_j w̄_j Q_j |Λ_j| Q_j^T where Q_j Λ_j Q_j^T = Ã_j^T P + P Ã_j. Dominates
/// ΔA^T P + P ΔA for every admissible ΔA.
Matrix build_majorant(const Matrix& p, const UncertaintyModel& model);

struct GuaranteedOptions {
  int max_iterations = 200;
  double convergence_tolerance = 1e-10;
  double residual_target = 1e-10;
};

/// P ≻ 0 solving A^T P + P A + Q - P B R^{-1} B^T P + 𝒰(P) = 0, by the fixed-point
/// iteration P_{k+1} = are(Q + 𝒰(P_k)) started from the nominal solution.
/// Throws FixedPointDivergence (with the ||P_k||_F trace) or CheckFailed when an
/// iterate loses positive definiteness.
GuaranteedSolution solve_guaranteed_are(const AreProblem& prob, const GuaranteedOptions& opts = {});

/// Residual of the modified equation, including 𝒰(P).
double guaranteed_residual(const AreProblem& prob, const Matrix& p);

/// x0^T P x0.
double guaranteed_cost_bound(const GuaranteedSolution& sol, const Vector& x0);

}  // namespace layerlq
