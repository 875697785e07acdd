#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "layerlq/riccati.hpp"
#include "layerlq/types.hpp"

namespace layerlq {

/// One layer's dynamics A_i, optional input matrix B_i and perturbation model ΔA_i.
/// Only the first layer's B enters the composed input map.
struct LayerSpec {
  Matrix a;
  std::optional<Matrix> b;
  UncertaintyModel uncertainty;

  Index dim() const noexcept { return a.rows(); }
  void validate() const;
};

/// Per-layer weight vectors, one entry per layer.
using LayerWeights = std::vector<std::vector<double>>;

struct ComposedPlant {
  Matrix a_oplus;                                 // ⊕_i A_i
  std::vector<UncertaintyModel> delta_structure;  // ΔA_i, kept factored
  Matrix b_otimes;                                // B_1 ⊗ I ⊗ ... ⊗ I
  std::vector<Index> layer_dims;
  std::vector<Matrix> layer_a;

  Index dim() const noexcept { return a_oplus.rows(); }

  /// ⊕_i ΔA_i(w_i).
  Matrix realized_delta(const LayerWeights& weights) const;
  /// Realized weights of every layer (zeros where unset).
  LayerWeights realized_weights() const;
  /// The per-layer models lifted to the composed state: direction Ã of layer i becomes
  /// I ⊗ ... ⊗ Ã ⊗ ... ⊗ I with the same bound.
  UncertaintyModel lifted_uncertainty() const;
};

/// Kronecker-sum composition. Requires at least one layer and B on the first.
ComposedPlant compose(std::span<const LayerSpec> layers);

enum class CertificateStrategy { identity, lyapunov, user };

std::optional<CertificateStrategy> parse_strategy(const std::string& name);
const char* to_string(CertificateStrategy s);

struct CertificateOptions {
  CertificateStrategy strategy = CertificateStrategy::identity;
  std::vector<Matrix> user_m;  // M_2..M_m for the user strategy
  bool strict = false;         // demand G_i ≺ 0 instead of G_i ⪯ 0
};

struct LayerCertificate {
  std::size_t layer = 0;  // zero-based index into the layer list (>= 1)
  Matrix m;
  Matrix f;  // A_i^T M_i + M_i A_i
  Matrix g;  // ΔA_i^T M_i + M_i ΔA_i at the vertex with the largest eigenvalue
  double m_min_eig = 0.0;
  double f_max_eig = 0.0;
  double g_max_eig = 0.0;
  bool g_strict = false;
};

struct CertificateSet {
  std::vector<LayerCertificate> layers;  // layers 2..m

  std::vector<Matrix> m_list() const;
  bool all_strict() const;
};

/// Picks M_i for layers 2..m and certifies F_i ⪯ 0 and G_i ⪯ 0 (or ≺ 0 in strict
/// mode) at every vertex of the weight box. Throws CheckFailed naming the layer.
CertificateSet default_certificates(std::span<const LayerSpec> layers, const CertificateOptions& opts = {});

struct GuaranteedDesign {
  GuaranteedSolution layer1;
  Matrix q1;
  Matrix r1;
  CertificateSet certificates;
  Matrix p_otimes;
  Matrix q_otimes;
  Matrix r_otimes;
  Matrix k_otimes;
  std::vector<Index> layer_dims;
  // NaN when assembled without definiteness checks.
  double p_min_eig = 0.0;
  double q_min_eig = 0.0;
  double r_min_eig = 0.0;
};

/// P⊗ = P_1 ⊗ M_2 ⊗ ... ⊗ M_m, R⊗ likewise, Q⊗ = Q_1 ⊗ M_2 ⊗ ... - P_1 ⊗ Σ_i (F_i in
/// slot i), K⊗ = K_1 ⊗ I ⊗ ... ⊗ I. With `check_definiteness` throws CheckFailed
/// when Q⊗ is not PSD.
GuaranteedDesign assemble(std::span<const LayerSpec> layers, const CertificateSet& certificates,
                          const Matrix& q1, const Matrix& r1, const GuaranteedSolution& layer1,
                          bool check_definiteness = true);

struct VerificationOptions {
  int random_samples = 16;
  std::uint64_t seed = 42;
  std::size_t max_vertex_samples = 256;
};

struct VerificationReport {
  double residual = 0.0;
  double tolerance = 0.0;
  bool residual_passed = false;
  double domination_min_eig = 0.0;  // worst min-eig of 𝒱 - ΔA⊕^T P⊗ - P⊗ ΔA⊕
  double domination_tolerance = 0.0;
  std::size_t domination_samples = 0;
  bool domination_passed = false;

  bool passed() const noexcept { return residual_passed && domination_passed; }
};

/// 𝒱 = 𝒰_1(P_1) ⊗ M_2 ⊗ ... ⊗ M_m.
Matrix composite_majorant(const GuaranteedDesign& design);

/// Generalized ARE residual on the full composed matrices plus the domination chain
/// at sampled admissible weights (box vertices, then uniform draws).
VerificationReport verify_generalized_are(const GuaranteedDesign& design, const ComposedPlant& plant,
                                          const VerificationOptions& opts = {});

/// Stack L with L^T L == Q⊗, built from Q_1 = D^T D, P_1 = H^T H, -F_i = N_i^T N_i
/// and M_i^{1/2}.
Matrix build_l_factor(const GuaranteedDesign& design);

struct StabilizabilityReport {
  Index dim = 0;
  Index controllability_rank = 0;
  Index observability_rank = 0;
  double closed_loop_abscissa = 0.0;
  double l_factor_residual = 0.0;  // ||L^T L - Q⊗||_F / max(1, ||Q⊗||_F)

  bool controllable() const noexcept { return controllability_rank == dim; }
  bool observable() const noexcept { return observability_rank == dim; }
  bool stable() const noexcept { return closed_loop_abscissa < 0.0; }
};

StabilizabilityReport check_stabilizability(const GuaranteedDesign& design, const ComposedPlant& plant);

struct SynthesisTimings {
  double layer_solve = 0.0;
  double certificates = 0.0;
  double assembly = 0.0;
  double definiteness = 0.0;
  double verification = 0.0;
  double stabilizability = 0.0;

  /// The factored path proper: layer-1 solve, certificates, structural assembly.
  double layered() const noexcept { return layer_solve + certificates + assembly; }
};

struct SynthesisResult {
  ComposedPlant plant;
  GuaranteedDesign design;
  VerificationReport verification;
  StabilizabilityReport stabilizability;
  SynthesisTimings timings;
  std::vector<std::string> warnings;

  /// Every check an acceptance tool should key on.
  bool passed() const;
};

struct SynthesisOptions {
  CertificateOptions certificates;
  GuaranteedOptions riccati;
  VerificationOptions verification;
};

/// compose, layer-1 guaranteed ARE, certificates, assembly, verification and
/// stabilizability in one call. Throws on hard failures (no layer-1 solution,
/// certificate or Q⊗ definiteness failure).
SynthesisResult synthesize(std::span<const LayerSpec> layers, const Matrix& q1, const Matrix& r1,
                           const SynthesisOptions& opts = {});

}  // namespace layerlq
