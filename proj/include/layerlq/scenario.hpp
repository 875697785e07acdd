#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "layerlq/graphs.hpp"
#include "layerlq/simulate.hpp"
#include "layerlq/synthesis.hpp"

namespace layerlq {

inline constexpr std::uint64_t kDefaultSeed = 42;

/// LAYERLQ_SEED if set and parseable, else kDefaultSeed.
std::uint64_t seed_from_env();

struct Scenario {
  std::string name;
  std::vector<LayerSpec> layers;
  Matrix q1;
  Matrix r1;
  CertificateOptions certificates;
  SimulationConfig simulation;
  std::uint64_t seed = kDefaultSeed;

  Index dim() const;
  /// Realized weights of every layer.
  LayerWeights realized_weights() const;
};

/// Knobs of the bundled three-layer case study.
struct FlorentineOptions {
  /// Uniform magnitude of every family-layer tie.
  double family_coupling = 3.0;
  /// Family layer on {social, political, business, financial}; weights are multiplied
  /// by family_coupling. The social–political tie is the negative one.
  std::vector<Edge> family_edges{{0, 1, -1.0}, {0, 2, 1.0}, {0, 3, 1.0}, {1, 3, 1.0}};
  /// Laplacian perturbation direction e_i e_j^T + e_j e_i^T.
  Index perturbed_first = 0;
  Index perturbed_second = 1;
  double weight_bound = 2.0;
  double realized_weight = 2.0;
  Index input_node = 3;
};

Graph florentine_family_graph(const FlorentineOptions& opts = {});
/// Marriage ties among 15 Florentine elite families.
Graph florentine_elite_graph();
std::vector<std::string> florentine_family_names();
/// Star centred on Florence over the first `provinces` of Florence, Rome, Venice,
/// Milan; unit weights.
Graph province_graph(int provinces);

/// Three layers: family (4) □ elite families (15) □ provinces (1..4). Layer matrices
/// are A_i = -L_i (minus input coupling), the Laplacian perturbation is negated into
/// the A convention, Q_1 = I, R_1 = 1, x0 a seeded random unit vector.
Scenario florentine_scenario(int provinces, std::uint64_t seed = kDefaultSeed,
                             const FlorentineOptions& opts = {});

/// Reads a JSON scenario. Graph paths resolve relative to the scenario file.
/// ParseError for malformed content, DimensionError for inconsistent sizes.
Scenario load_scenario(const std::string& path, std::uint64_t seed = kDefaultSeed);
Scenario parse_scenario(const std::string& text, const std::string& base_dir, std::uint64_t seed = kDefaultSeed);

SynthesisOptions synthesis_options(const Scenario& scenario);

struct ControllerRun {
  Controller controller = Controller::guaranteed;
  Matrix k_otimes;
  CostReport report;
  SimulationTrace trace;
};

/// Simulates one controller on the plant realized at `weights`. The baseline is the
/// nominal LQR gain K_1 ⊗ I ⊗ ... ⊗ I designed without the uncertainty; the cost of
/// either run is measured with the guaranteed design's Q⊗ and R⊗, and `bound` is
/// x0^T P⊗ x0.
ControllerRun run_controller(const Scenario& scenario, const SynthesisResult& synthesis, Controller controller,
                             const LayerWeights& weights);

struct Comparison {
  SynthesisResult synthesis;
  ControllerRun baseline;
  ControllerRun guaranteed;
};

Comparison compare_controllers(const Scenario& scenario);

struct BenchRow {
  int provinces = 0;
  Index dim = 0;
  double layered_seconds = 0.0;     // median over repetitions
  double monolithic_seconds = 0.0;
  int layered_iterations = 0;
  int monolithic_iterations = 0;
  double agreement = 0.0;           // ||P_mono - P⊗||_F / ||P⊗||_F
};

/// Layered synthesis versus a monolithic guaranteed-cost ARE on the full composed
/// plant, for 1..max_provinces.
std::vector<BenchRow> run_bench(int max_provinces, int repetitions = 5, std::uint64_t seed = kDefaultSeed);

}  // namespace layerlq
