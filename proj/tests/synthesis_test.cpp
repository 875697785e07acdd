#include <gtest/gtest.h>

#include "layerlq/error.hpp"
#include "layerlq/graphs.hpp"
#include "layerlq/kron.hpp"
#include "layerlq/linalg.hpp"
#include "layerlq/scenario.hpp"
#include "layerlq/synthesis.hpp"
#include "support/oracles.hpp"

using namespace layerlq;
using oracle::rel_err;

namespace {

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

// a ⊗ I + I ⊗ b through the index oracle.
Matrix kron_sum_oracle(const Matrix& a, const Matrix& b) {
  return oracle::kron_by_index(a, Matrix::Identity(b.rows(), b.rows())) +
         oracle::kron_by_index(Matrix::Identity(a.rows(), a.rows()), b);
}

struct Designed {
  ComposedPlant plant;
  GuaranteedDesign design;
};

Designed design_for(const oracle::Instance& inst, const CertificateOptions& opts = {}) {
  const LayerSpec& l1 = inst.layers.front();
  const GuaranteedSolution g = solve_guaranteed_are({l1.a, *l1.b, inst.q1, inst.r1, l1.uncertainty});
  const CertificateSet certs = default_certificates(inst.layers, opts);
  return {compose(inst.layers), assemble(inst.layers, certs, inst.q1, inst.r1, g)};
}

std::vector<LayerSpec> florentine_two_layers() {
  Scenario s = florentine_scenario(1);
  s.layers.pop_back();
  return s.layers;
}

}  // namespace

TEST(Compose, SingleLayer) {
  oracle::Gen gen(41);
  const Matrix a = gen.normal(3, 3), b = gen.normal(3, 2);
  const std::vector<LayerSpec> layers{{a, b, {}}};
  const ComposedPlant p = compose(layers);
  EXPECT_EQ(p.a_oplus, a);
  EXPECT_EQ(p.b_otimes, b);
}

TEST(Compose, ScalarLayersAdd) {
  const std::vector<LayerSpec> layers{{scalar(2.0), scalar(1.0), {}}, {scalar(-7.0), std::nullopt, {}}};
  EXPECT_EQ(compose(layers).a_oplus, scalar(-5.0));
}

TEST(Compose, InputMapShape) {
  oracle::Gen gen(42);
  const std::vector<LayerSpec> layers{{gen.normal(2, 2), gen.normal(2, 3), {}},
                                      {gen.normal(4, 4), std::nullopt, {}},
                                      {gen.normal(5, 5), std::nullopt, {}}};
  const ComposedPlant p = compose(layers);
  EXPECT_EQ(p.b_otimes.rows(), 40);
  EXPECT_EQ(p.b_otimes.cols(), 3 * 4 * 5);
  EXPECT_EQ(p.b_otimes, oracle::kron_by_index(oracle::kron_by_index(*layers[0].b, Matrix::Identity(4, 4)),
                                              Matrix::Identity(5, 5)));
}

TEST(Compose, MissingInputAndBadLayers) {
  const std::vector<LayerSpec> no_b{{scalar(1.0), std::nullopt, {}}};
  EXPECT_THROW(compose(no_b), DimensionError);
  EXPECT_THROW(compose({}), DimensionError);
  const std::vector<LayerSpec> rect{{Matrix::Zero(2, 3), Matrix::Zero(2, 1), {}}};
  EXPECT_THROW(compose(rect), DimensionError);
}

TEST(Compose, PerturbedSumSplits) {
  oracle::Gen gen(43);
  for (int t = 0; t < 20; ++t) {
    std::vector<LayerSpec> layers{{gen.normal(2, 2), gen.normal(2, 1), {}}, {gen.normal(2, 2), std::nullopt, {}}};
    for (auto& l : layers) {
      l.uncertainty.directions = {gen.normal(2, 2), gen.normal(2, 2)};
      l.uncertainty.weight_bounds = {1.0, 1.0};
    }
    const ComposedPlant p = compose(layers);
    const LayerWeights w = oracle::random_weights(gen, layers);
    const Matrix d1 = layers[0].uncertainty.realize(w[0], 2);
    const Matrix d2 = layers[1].uncertainty.realize(w[1], 2);
    const Matrix direct = kron_sum_oracle(layers[0].a + d1, layers[1].a + d2);
    EXPECT_LE((direct - (p.a_oplus + p.realized_delta(w))).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((p.realized_delta(w) - kron_sum_oracle(d1, d2)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Compose, LiftedUncertaintyMatchesFactoredSum) {
  oracle::Gen gen(44);
  const oracle::Instance inst = oracle::random_instance(gen, 3);
  const ComposedPlant p = compose(inst.layers);
  const UncertaintyModel lifted = p.lifted_uncertainty();
  for (int t = 0; t < 5; ++t) {
    const LayerWeights w = oracle::random_weights(gen, inst.layers);
    std::vector<double> flat;
    for (const auto& wi : w) flat.insert(flat.end(), wi.begin(), wi.end());
    EXPECT_LE((lifted.realize(flat, p.dim()) - p.realized_delta(w)).norm(), 1e-12);
  }
}

TEST(Certificates, IdentityOnNegatedLaplacian) {
  const Graph g = Graph::undirected(3, {{0, 1, 1.0}, {1, 2, 2.0}});
  const Matrix lap = matrices_of(g).laplacian;
  const std::vector<LayerSpec> layers{{scalar(0.0), scalar(1.0), {}}, {-lap, std::nullopt, {}}};
  const CertificateSet c = default_certificates(layers);
  ASSERT_EQ(c.layers.size(), 1u);
  EXPECT_EQ(c.layers[0].f, -2.0 * lap);
  EXPECT_LE(c.layers[0].f_max_eig, 1e-12);
  // no perturbation: G = 0, accepted but not strict
  EXPECT_EQ(c.layers[0].g_max_eig, 0.0);
  EXPECT_FALSE(c.layers[0].g_strict);
  EXPECT_FALSE(c.all_strict());

  CertificateOptions strict;
  strict.strict = true;
  try {
    default_certificates(layers, strict);
    FAIL();
  } catch (const CheckFailed& e) {
    EXPECT_EQ(e.layer(), 1);
  }
}

TEST(Certificates, NonHurwitzLayerRejected) {
  Matrix a(2, 2);
  a << 0, 1, 0, 0;
  const std::vector<LayerSpec> layers{{scalar(0.0), scalar(1.0), {}}, {a, std::nullopt, {}}};
  try {
    default_certificates(layers);
    FAIL();
  } catch (const CheckFailed& e) {
    EXPECT_EQ(e.layer(), 1);
    EXPECT_GT(e.eigenvalue(), 0.0);  // max eigenvalue of A^T + A
  }
  CertificateOptions lyap;
  lyap.strategy = CertificateStrategy::lyapunov;
  EXPECT_THROW(default_certificates(layers, lyap), CheckFailed);
}

TEST(Certificates, LyapunovStrategyGivesMinusIdentity) {
  oracle::Gen gen(45);
  Matrix a = gen.normal(3, 3);
  a -= (spectral_abscissa(a) + 0.3) * Matrix::Identity(3, 3);
  const std::vector<LayerSpec> layers{{scalar(0.0), scalar(1.0), {}}, {a, std::nullopt, {}}};
  CertificateOptions opts;
  opts.strategy = CertificateStrategy::lyapunov;
  const CertificateSet c = default_certificates(layers, opts);
  EXPECT_LE((c.layers[0].f + Matrix::Identity(3, 3)).norm(), 1e-10);
  EXPECT_GT(c.layers[0].m_min_eig, 0.0);
}

TEST(Certificates, SymmetricBoxReachesPositiveVertex) {
  // The weight box is symmetric, so a nonzero symmetric direction gives G ⪰ 0 somewhere.
  Matrix dir = Matrix::Identity(2, 2);
  UncertaintyModel u;
  u.directions = {dir};
  u.weight_bounds = {0.5};
  const std::vector<LayerSpec> layers{{scalar(0.0), scalar(1.0), {}}, {-2.0 * Matrix::Identity(2, 2), std::nullopt, u}};
  try {
    default_certificates(layers);
    FAIL();
  } catch (const CheckFailed& e) {
    EXPECT_NEAR(e.eigenvalue(), 1.0, 1e-12);  // vertex w = +0.5 gives G = I
  }
}

TEST(Certificates, SkewPerturbationGivesZeroG) {
  oracle::Gen gen(46);
  UncertaintyModel u;
  u.directions = {gen.skew(3)};
  u.weight_bounds = {1.0};
  const std::vector<LayerSpec> layers{{scalar(0.0), scalar(1.0), {}}, {-Matrix::Identity(3, 3), std::nullopt, u}};
  const CertificateSet c = default_certificates(layers);
  EXPECT_LE(std::abs(c.layers[0].g_max_eig), 1e-14);
}

TEST(Certificates, UserMatrices) {
  const std::vector<LayerSpec> layers{{scalar(0.0), scalar(1.0), {}}, {-Matrix::Identity(2, 2), std::nullopt, {}}};
  CertificateOptions opts;
  opts.strategy = CertificateStrategy::user;
  opts.user_m = {3.0 * Matrix::Identity(2, 2)};
  EXPECT_EQ(default_certificates(layers, opts).layers[0].f, -6.0 * Matrix::Identity(2, 2));
  opts.user_m = {-Matrix::Identity(2, 2)};
  EXPECT_THROW(default_certificates(layers, opts), CheckFailed);
  opts.user_m = {};
  EXPECT_THROW(default_certificates(layers, opts), DimensionError);
  EXPECT_EQ(parse_strategy("lyapunov"), CertificateStrategy::lyapunov);
  EXPECT_FALSE(parse_strategy("sdp").has_value());
}

TEST(Assemble, SingleLayerIsLayerOne) {
  oracle::Gen gen(47);
  const oracle::Instance inst = oracle::random_instance(gen, 1);
  const Designed d = design_for(inst);
  EXPECT_EQ(d.design.p_otimes, d.design.layer1.p);
  EXPECT_EQ(d.design.q_otimes, inst.q1);
  EXPECT_EQ(d.design.r_otimes, inst.r1);
  EXPECT_EQ(d.design.k_otimes, d.design.layer1.k);
  const VerificationReport v = verify_generalized_are(d.design, d.plant);
  const LayerSpec& l1 = inst.layers.front();
  EXPECT_NEAR(v.residual, guaranteed_residual({l1.a, *l1.b, inst.q1, inst.r1, l1.uncertainty}, d.design.p_otimes),
              1e-12);
  // L = D
  const Matrix l = build_l_factor(d.design);
  EXPECT_LE((l.transpose() * l - inst.q1).norm(), 1e-10);
}

TEST(Assemble, TwoLayerIdentityCertificateFormula) {
  oracle::Gen gen(48);
  const Graph g = gen.graph(3, 0.8);
  const Matrix lap = matrices_of(g).laplacian;
  auto [a1, b1] = gen.controllable(2, 1);
  const std::vector<LayerSpec> layers{{a1, b1, {}}, {-lap, std::nullopt, {}}};
  const Matrix q1 = gen.spd(2), r1 = gen.spd(1);
  const GuaranteedSolution sol = solve_guaranteed_are({a1, b1, q1, r1, UncertaintyModel::none()});
  const GuaranteedDesign d = assemble(layers, default_certificates(layers), q1, r1, sol);
  const Matrix expected = oracle::kron_by_index(q1, Matrix::Identity(3, 3)) + 2.0 * oracle::kron_by_index(sol.p, lap);
  EXPECT_LE((d.q_otimes - expected).norm(), 1e-12 * expected.norm());

  // L stack [D ⊗ I; H ⊗ N2] with N2^T N2 = 2 L
  const Matrix l = build_l_factor(d);
  const Matrix d_fac = psd_factor(q1);
  const Matrix n2 = psd_factor(2.0 * lap);
  EXPECT_EQ(l.rows(), d_fac.rows() * 3 + 2 * n2.rows());
  EXPECT_LE((l.transpose() * l - expected).norm(), 1e-10 * expected.norm());
}

TEST(Assemble, GainMatchesMonolithicAndIsStructural) {
  oracle::Gen gen(49);
  for (int t = 0; t < 10; ++t) {
    const oracle::Instance inst = oracle::random_instance(gen, 2);
    const Designed d = design_for(inst);
    const Matrix& p = d.design.p_otimes;
    const Matrix mono = d.design.r_otimes.llt().solve(d.plant.b_otimes.transpose() * p);
    EXPECT_LE(rel_err(d.design.k_otimes, mono), 1e-9);
    const Matrix structural = oracle::kron_by_index(d.design.layer1.k, Matrix::Identity(inst.layers[1].dim(), inst.layers[1].dim()));
    EXPECT_EQ(d.design.k_otimes, structural);
  }
}

TEST(Assemble, CertificateScalingCovariance) {
  oracle::Gen gen(50);
  const oracle::Instance inst = oracle::random_instance(gen, 3);
  const LayerSpec& l1 = inst.layers.front();
  const GuaranteedSolution g = solve_guaranteed_are({l1.a, *l1.b, inst.q1, inst.r1, l1.uncertainty});
  CertificateOptions base;
  base.strategy = CertificateStrategy::user;
  for (std::size_t i = 1; i < inst.layers.size(); ++i) {
    const Index n = inst.layers[i].dim();
    base.user_m.push_back(Matrix::Identity(n, n));
  }
  CertificateOptions scaled = base;
  const double c = 2.5;
  scaled.user_m[0] *= c;
  const GuaranteedDesign d0 = assemble(inst.layers, default_certificates(inst.layers, base), inst.q1, inst.r1, g);
  const GuaranteedDesign d1 = assemble(inst.layers, default_certificates(inst.layers, scaled), inst.q1, inst.r1, g);
  EXPECT_LE(rel_err(d1.p_otimes, c * d0.p_otimes), 1e-14);
  EXPECT_LE(rel_err(d1.r_otimes, c * d0.r_otimes), 1e-14);
  EXPECT_LE((d1.k_otimes - d0.k_otimes).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Assemble, IndefiniteQRejected) {
  const std::vector<LayerSpec> layers{{scalar(0.0), scalar(1.0), {}}, {scalar(1.0), std::nullopt, {}}};
  CertificateSet forged;
  LayerCertificate c;
  c.layer = 1;
  c.m = scalar(1.0);
  c.f = scalar(2.0);  // would need F ⪯ 0
  forged.layers.push_back(c);
  const GuaranteedSolution g = solve_guaranteed_are({scalar(0.0), scalar(1.0), scalar(1.0), scalar(1.0), std::nullopt});
  try {
    assemble(layers, forged, scalar(1.0), scalar(1.0), g);
    FAIL();
  } catch (const CheckFailed& e) {
    EXPECT_NEAR(e.eigenvalue(), 1.0 - 2.0, 1e-12);
  }
  const GuaranteedDesign unchecked = assemble(layers, forged, scalar(1.0), scalar(1.0), g, false);
  EXPECT_TRUE(std::isnan(unchecked.q_min_eig));
}

TEST(Verify, LayeredResidualOnRandomInstances) {
  oracle::Gen gen(51);
  for (int t = 0; t < 25; ++t) {
    const int m = t < 20 ? 2 : 3;
    const oracle::Instance inst = oracle::random_instance(gen, m);
    const Designed d = design_for(inst);
    const VerificationReport v = verify_generalized_are(d.design, d.plant);
    EXPECT_TRUE(v.residual_passed) << "trial " << t << " residual " << v.residual;
    EXPECT_TRUE(v.domination_passed) << "trial " << t << " min eig " << v.domination_min_eig;
    std::size_t directions = 0;
    for (const auto& layer : inst.layers) directions += layer.uncertainty.size();
    EXPECT_EQ(v.domination_samples > 1u, directions > 0);
  }
}

TEST(Verify, CorruptedSolutionFails) {
  const std::vector<LayerSpec> layers = florentine_two_layers();
  const Scenario s = florentine_scenario(1);
  SynthesisResult r = synthesize(layers, s.q1, s.r1);
  EXPECT_TRUE(r.verification.residual_passed);
  EXPECT_LE(r.verification.residual, 1e-7 * std::max(1.0, r.design.p_otimes.norm()));
  r.design.p_otimes += 0.1 * Matrix::Identity(r.plant.dim(), r.plant.dim());
  EXPECT_FALSE(verify_generalized_are(r.design, r.plant).residual_passed);
}

TEST(LFactor, SingularStateWeight) {
  oracle::Gen gen(52);
  oracle::Instance inst = oracle::random_instance(gen, 2);
  const Index n1 = inst.layers.front().dim();
  const Vector v = gen.normal(n1, 1);
  inst.q1 = v * v.transpose();  // rank one
  const Designed d = design_for(inst);
  const Matrix l = build_l_factor(d.design);
  EXPECT_LE((l.transpose() * l - d.design.q_otimes).norm(), 1e-8 * std::max(1.0, d.design.q_otimes.norm()));
}

TEST(Stabilizability, ScalarStableLayer) {
  const std::vector<LayerSpec> layers{{scalar(-1.0), scalar(1.0), {}}};
  const SynthesisResult r = synthesize(layers, scalar(1.0), scalar(1.0));
  EXPECT_EQ(r.stabilizability.controllability_rank, 1);
  EXPECT_EQ(r.stabilizability.observability_rank, 1);
  EXPECT_TRUE(r.stabilizability.stable());
  EXPECT_TRUE(r.passed());
}

TEST(Stabilizability, ZeroInputFlagged) {
  const std::vector<LayerSpec> layers{{scalar(-1.0), scalar(0.0), {}}};
  const GuaranteedSolution g = solve_guaranteed_are({scalar(-1.0), scalar(0.0), scalar(1.0), scalar(1.0), std::nullopt});
  const GuaranteedDesign d = assemble(layers, CertificateSet{}, scalar(1.0), scalar(1.0), g);
  const StabilizabilityReport rep = check_stabilizability(d, compose(layers));
  EXPECT_EQ(rep.controllability_rank, 0);
  EXPECT_FALSE(rep.controllable());
}

TEST(Stabilizability, FlorentineTwoLayerFullRank) {
  const Scenario s = florentine_scenario(1);
  const SynthesisResult r = synthesize(florentine_two_layers(), s.q1, s.r1);
  EXPECT_EQ(r.stabilizability.dim, 60);
  EXPECT_TRUE(r.stabilizability.controllable());
  EXPECT_TRUE(r.stabilizability.observable());
  EXPECT_LT(r.stabilizability.closed_loop_abscissa, 0.0);
  EXPECT_LE(r.stabilizability.l_factor_residual, 1e-8);
  EXPECT_TRUE(r.passed());
  EXPECT_FALSE(r.warnings.empty());  // G_2 = 0 is only semidefinite
}
