#include "layerlq/synthesis.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "layerlq/error.hpp"
#include "layerlq/kron.hpp"
#include "layerlq/linalg.hpp"

namespace layerlq {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string layer_name(std::size_t i) { return "layer " + std::to_string(i + 1); }

// Natural magnitude of X^T M + M X for certificate tolerances.
double certificate_scale(const Matrix& m, const Matrix& x) {
  return std::max(spectral_norm(m) * spectral_norm(x), std::numeric_limits<double>::min());
}

}  // namespace

void LayerSpec::validate() const {
  if (a.rows() == 0 || a.rows() != a.cols()) throw DimensionError("layer matrix A must be square and nonempty");
  if (!a.allFinite()) throw DimensionError("layer matrix A has non-finite entries");
  if (b && b->rows() != a.rows()) throw DimensionError("layer input matrix B must have as many rows as A");
  uncertainty.validate(a.rows());
}

Matrix ComposedPlant::realized_delta(const LayerWeights& weights) const {
  if (weights.size() != delta_structure.size()) {
    throw DimensionError("expected weights for " + std::to_string(delta_structure.size()) + " layers");
  }
  std::vector<Matrix> deltas;
  deltas.reserve(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    deltas.push_back(delta_structure[i].realize(weights[i], layer_dims[i]));
  }
  return kron_sum_many(deltas);
}

LayerWeights ComposedPlant::realized_weights() const {
  LayerWeights out;
  out.reserve(delta_structure.size());
  for (const auto& model : delta_structure) out.push_back(model.realized_or_zero());
  return out;
}

UncertaintyModel ComposedPlant::lifted_uncertainty() const {
  const std::vector<Matrix> eye = identities(layer_dims);
  UncertaintyModel lifted;
  std::vector<double> realized;
  for (std::size_t i = 0; i < delta_structure.size(); ++i) {
    const UncertaintyModel& model = delta_structure[i];
    for (std::size_t j = 0; j < model.size(); ++j) {
      lifted.directions.push_back(slot_product(eye, i, model.directions[j]));
      lifted.weight_bounds.push_back(model.weight_bounds[j]);
    }
    const auto w = model.realized_or_zero();
    realized.insert(realized.end(), w.begin(), w.end());
  }
  lifted.realized_weights = std::move(realized);
  return lifted;
}

ComposedPlant compose(std::span<const LayerSpec> layers) {
  if (layers.empty()) throw DimensionError("compose needs at least one layer");
  for (const LayerSpec& layer : layers) layer.validate();
  if (!layers.front().b) throw DimensionError("layer 1 must carry an input matrix B");

  ComposedPlant plant;
  for (const LayerSpec& layer : layers) {
    plant.layer_a.push_back(layer.a);
    plant.layer_dims.push_back(layer.dim());
    plant.delta_structure.push_back(layer.uncertainty);
  }
  plant.a_oplus = kron_sum_many(plant.layer_a);
  plant.b_otimes = slot_product(identities(plant.layer_dims), 0, *layers.front().b);
  return plant;
}

std::optional<CertificateStrategy> parse_strategy(const std::string& name) {
  if (name == "identity") return CertificateStrategy::identity;
  if (name == "lyapunov") return CertificateStrategy::lyapunov;
  if (name == "user") return CertificateStrategy::user;
  return std::nullopt;
}

const char* to_string(CertificateStrategy s) {
  switch (s) {
    case CertificateStrategy::identity: return "identity";
    case CertificateStrategy::lyapunov: return "lyapunov";
    case CertificateStrategy::user: return "user";
  }
  return "unknown";
}

std::vector<Matrix> CertificateSet::m_list() const {
  std::vector<Matrix> out;
  out.reserve(layers.size());
  for (const auto& c : layers) out.push_back(c.m);
  return out;
}

bool CertificateSet::all_strict() const {
  return std::all_of(layers.begin(), layers.end(), [](const LayerCertificate& c) { return c.g_strict; });
}

CertificateSet default_certificates(std::span<const LayerSpec> layers, const CertificateOptions& opts) {
  if (opts.strategy == CertificateStrategy::user && opts.user_m.size() + 1 != layers.size()) {
    throw DimensionError("user certificates: expected " + std::to_string(layers.size() - 1) + " matrices, got " +
                         std::to_string(opts.user_m.size()));
  }
  CertificateSet set;
  for (std::size_t i = 1; i < layers.size(); ++i) {
    const LayerSpec& layer = layers[i];
    layer.validate();
    const Index n = layer.dim();
    LayerCertificate cert;
    cert.layer = i;
    switch (opts.strategy) {
      case CertificateStrategy::identity:
        cert.m = Matrix::Identity(n, n);
        break;
      case CertificateStrategy::lyapunov: {
        const double abscissa = spectral_abscissa(layer.a);
        if (!(abscissa < 0.0)) {
          throw CheckFailed(layer_name(i) + ": lyapunov certificate needs a Hurwitz A (spectral abscissa " +
                                std::to_string(abscissa) + ")",
                            abscissa, static_cast<int>(i));
        }
        cert.m = solve_lyapunov(layer.a, Matrix::Identity(n, n));
        break;
      }
      case CertificateStrategy::user:
        cert.m = opts.user_m[i - 1];
        if (cert.m.rows() != n || cert.m.cols() != n) {
          throw DimensionError(layer_name(i) + ": certificate M has the wrong size");
        }
        break;
    }
    cert.m_min_eig = min_eig(cert.m);
    if (!is_pd(cert.m)) {
      throw CheckFailed(layer_name(i) + ": certificate M is not positive definite", cert.m_min_eig,
                        static_cast<int>(i));
    }
    cert.f = symmetrize(layer.a.transpose() * cert.m + cert.m * layer.a);
    cert.f_max_eig = max_eig(cert.f);
    if (cert.f_max_eig > kPsdTolerance * certificate_scale(cert.m, layer.a)) {
      throw CheckFailed(layer_name(i) + ": F = A^T M + M A is not negative semidefinite (max eigenvalue " +
                            std::to_string(cert.f_max_eig) + ")",
                        cert.f_max_eig, static_cast<int>(i));
    }

    double g_scale = std::numeric_limits<double>::min();
    for (std::size_t j = 0; j < layer.uncertainty.size(); ++j) {
      g_scale += layer.uncertainty.weight_bounds[j] * certificate_scale(cert.m, layer.uncertainty.directions[j]);
    }
    cert.g_max_eig = -std::numeric_limits<double>::infinity();
    for (const auto& vertex : layer.uncertainty.vertices()) {
      const Matrix delta = layer.uncertainty.realize(vertex, n);
      const Matrix g = symmetrize(delta.transpose() * cert.m + cert.m * delta);
      const double top = max_eig(g);
      if (top > cert.g_max_eig) {
        cert.g_max_eig = top;
        cert.g = g;
      }
    }
    cert.g_strict = cert.g_max_eig < -kPdTolerance * std::max(spectral_norm(cert.g), g_scale);
    if (cert.g_max_eig > kPsdTolerance * g_scale) {
      throw CheckFailed(layer_name(i) + ": G = dA^T M + M dA is not negative semidefinite at a vertex (max eigenvalue " +
                            std::to_string(cert.g_max_eig) + ")",
                        cert.g_max_eig, static_cast<int>(i));
    }
    if (opts.strict && !cert.g_strict) {
      throw CheckFailed(layer_name(i) + ": strict certificates require G negative definite (max eigenvalue " +
                            std::to_string(cert.g_max_eig) + ")",
                        cert.g_max_eig, static_cast<int>(i));
    }
    set.layers.push_back(std::move(cert));
  }
  return set;
}

GuaranteedDesign assemble(std::span<const LayerSpec> layers, const CertificateSet& certificates,
                          const Matrix& q1, const Matrix& r1, const GuaranteedSolution& layer1,
                          bool check_definiteness) {
  if (layers.empty()) throw DimensionError("assemble needs at least one layer");
  if (certificates.layers.size() + 1 != layers.size()) {
    throw DimensionError("certificate count does not match the layer count");
  }
  const Index n1 = layers.front().dim();
  if (layer1.p.rows() != n1 || q1.rows() != n1 || q1.cols() != n1) {
    throw DimensionError("layer-1 solution and Q_1 must match layer 1");
  }

  GuaranteedDesign d;
  d.layer1 = layer1;
  d.q1 = q1;
  d.r1 = r1;
  d.certificates = certificates;
  for (const LayerSpec& layer : layers) d.layer_dims.push_back(layer.dim());

  // Slot 0 carries the layer-1 factor; slots 1.. carry M_2..M_m.
  std::vector<Matrix> factors{Matrix::Identity(n1, n1)};
  for (const Matrix& m : certificates.m_list()) factors.push_back(m);

  d.p_otimes = slot_product(factors, 0, layer1.p);
  d.r_otimes = slot_product(factors, 0, r1);
  d.q_otimes = slot_product(factors, 0, q1);
  if (layers.size() > 1) {
    const std::span<const Matrix> higher(factors.begin() + 1, factors.end());
    const Index rest = d.p_otimes.rows() / n1;
    Matrix coupling = Matrix::Zero(rest, rest);
    for (std::size_t i = 0; i < certificates.layers.size(); ++i) {
      coupling += slot_product(higher, i, certificates.layers[i].f);
    }
    d.q_otimes -= kron(layer1.p, coupling);
  }
  d.q_otimes = symmetrize(d.q_otimes);
  d.k_otimes = slot_product(identities(d.layer_dims), 0, layer1.k);

  if (!check_definiteness) {
    d.p_min_eig = d.q_min_eig = d.r_min_eig = std::numeric_limits<double>::quiet_NaN();
    return d;
  }
  d.p_min_eig = min_eig(d.p_otimes);
  d.r_min_eig = min_eig(d.r_otimes);
  d.q_min_eig = min_eig(d.q_otimes);
  if (!is_pd(d.p_otimes)) throw CheckFailed("P⊗ is not positive definite", d.p_min_eig);
  if (!is_pd(d.r_otimes)) throw CheckFailed("R⊗ is not positive definite", d.r_min_eig);
  if (d.q_min_eig < -kPsdTolerance * std::max(spectral_norm(d.q_otimes), 1e-300)) {
    throw CheckFailed("Q⊗ is not positive semidefinite (min eigenvalue " + std::to_string(d.q_min_eig) + ")",
                      d.q_min_eig);
  }
  return d;
}

Matrix composite_majorant(const GuaranteedDesign& design) {
  std::vector<Matrix> factors{design.layer1.u_of_p};
  for (const Matrix& m : design.certificates.m_list()) factors.push_back(m);
  return kron_many(factors);
}

VerificationReport verify_generalized_are(const GuaranteedDesign& design, const ComposedPlant& plant,
                                          const VerificationOptions& opts) {
  if (plant.dim() != design.p_otimes.rows()) throw DimensionError("design and plant dimensions differ");
  VerificationReport rep;
  const Matrix& p = design.p_otimes;
  const Matrix v = composite_majorant(design);
  const Matrix pb = p * plant.b_otimes;
  const Matrix residual = plant.a_oplus.transpose() * p + p * plant.a_oplus + design.q_otimes -
                          pb * design.r_otimes.llt().solve(pb.transpose()) + v;
  rep.residual = residual.norm();
  rep.tolerance = 1e-7 * std::max(1.0, p.norm());
  rep.residual_passed = rep.residual <= rep.tolerance;

  // Weight samples: joint box vertices (capped), then uniform draws from the box.
  LayerWeights zero = plant.realized_weights();
  for (auto& w : zero) std::fill(w.begin(), w.end(), 0.0);
  std::vector<LayerWeights> samples{zero};
  std::vector<std::pair<std::size_t, std::size_t>> coords;
  for (std::size_t i = 0; i < plant.delta_structure.size(); ++i) {
    for (std::size_t j = 0; j < plant.delta_structure[i].size(); ++j) coords.emplace_back(i, j);
  }
  const std::size_t vertex_count =
      coords.size() < 32 ? std::min(std::size_t{1} << coords.size(), opts.max_vertex_samples) : opts.max_vertex_samples;
  for (std::size_t mask = 0; mask < vertex_count && !coords.empty(); ++mask) {
    LayerWeights w = zero;
    for (std::size_t c = 0; c < coords.size(); ++c) {
      const auto [i, j] = coords[c];
      const double bound = plant.delta_structure[i].weight_bounds[j];
      w[i][j] = (c < 32 && (mask >> c & 1U)) ? bound : -bound;
    }
    samples.push_back(std::move(w));
  }
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int s = 0; s < opts.random_samples && !coords.empty(); ++s) {
    LayerWeights w = zero;
    for (const auto& [i, j] : coords) w[i][j] = unit(rng) * plant.delta_structure[i].weight_bounds[j];
    samples.push_back(std::move(w));
  }

  rep.domination_min_eig = std::numeric_limits<double>::infinity();
  for (const LayerWeights& w : samples) {
    const Matrix delta = plant.realized_delta(w);
    const Matrix gap = symmetrize(v - delta.transpose() * p - p * delta);
    rep.domination_min_eig = std::min(rep.domination_min_eig, min_eig(gap));
  }
  rep.domination_samples = samples.size();
  rep.domination_tolerance = 1e-9 * std::max(1.0, spectral_norm(v));
  rep.domination_passed = rep.domination_min_eig >= -rep.domination_tolerance;
  return rep;
}

Matrix build_l_factor(const GuaranteedDesign& design) {
  const Matrix d_factor = psd_factor(design.q1);
  const Matrix h_factor = cholesky(design.layer1.p).transpose();
  const auto& certs = design.certificates.layers;
  if (certs.empty()) return d_factor;

  std::vector<Matrix> roots{Matrix()};
  for (const auto& c : certs) roots.push_back(sqrt_psd(c.m));

  std::vector<Matrix> blocks;
  blocks.push_back(slot_product(roots, 0, d_factor));
  roots.front() = h_factor;
  for (std::size_t i = 0; i < certs.size(); ++i) {
    blocks.push_back(slot_product(roots, i + 1, psd_factor(-certs[i].f)));
  }
  Index rows = 0;
  for (const Matrix& b : blocks) rows += b.rows();
  Matrix l(rows, design.q_otimes.cols());
  Index at = 0;
  for (const Matrix& b : blocks) {
    l.middleRows(at, b.rows()) = b;
    at += b.rows();
  }
  return l;
}

StabilizabilityReport check_stabilizability(const GuaranteedDesign& design, const ComposedPlant& plant) {
  StabilizabilityReport rep;
  rep.dim = plant.dim();
  const Matrix l = build_l_factor(design);
  rep.l_factor_residual = (l.transpose() * l - design.q_otimes).norm() / std::max(1.0, design.q_otimes.norm());
  rep.observability_rank = observability_rank(plant.a_oplus, l);
  rep.controllability_rank = controllability_rank(plant.a_oplus, plant.b_otimes);
  rep.closed_loop_abscissa = spectral_abscissa(plant.a_oplus - plant.b_otimes * design.k_otimes);
  return rep;
}

bool SynthesisResult::passed() const {
  return verification.passed() && stabilizability.controllable() && stabilizability.observable() &&
         stabilizability.stable() && stabilizability.l_factor_residual <= 1e-8;
}

SynthesisResult synthesize(std::span<const LayerSpec> layers, const Matrix& q1, const Matrix& r1,
                           const SynthesisOptions& opts) {
  SynthesisResult out;
  out.plant = compose(layers);

  auto start = Clock::now();
  AreProblem prob{layers.front().a, *layers.front().b, q1, r1, layers.front().uncertainty};
  const GuaranteedSolution layer1 = solve_guaranteed_are(prob, opts.riccati);
  out.timings.layer_solve = seconds_since(start);

  start = Clock::now();
  const CertificateSet certs = default_certificates(layers, opts.certificates);
  out.timings.certificates = seconds_since(start);
  for (const auto& c : certs.layers) {
    if (!c.g_strict) out.warnings.push_back(layer_name(c.layer) + ": G is only negative semidefinite");
  }

  start = Clock::now();
  out.design = assemble(layers, certs, q1, r1, layer1, false);
  out.timings.assembly = seconds_since(start);

  start = Clock::now();
  out.design = assemble(layers, certs, q1, r1, layer1, true);
  out.timings.definiteness = seconds_since(start);

  start = Clock::now();
  out.verification = verify_generalized_are(out.design, out.plant, opts.verification);
  out.timings.verification = seconds_since(start);

  start = Clock::now();
  out.stabilizability = check_stabilizability(out.design, out.plant);
  out.timings.stabilizability = seconds_since(start);
  return out;
}

}  // namespace layerlq
