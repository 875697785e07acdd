#include "layerlq/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "layerlq/error.hpp"
#include "layerlq/kron.hpp"
#include "layerlq/linalg.hpp"

namespace layerlq {

using json = nlohmann::json;

std::uint64_t seed_from_env() {
  const char* raw = std::getenv("LAYERLQ_SEED");
  if (raw == nullptr || *raw == '\0') return kDefaultSeed;
  char* end = nullptr;
  const unsigned long long value = std::strtoull(raw, &end, 10);
  if (end == raw || *end != '\0') return kDefaultSeed;
  return value;
}

Index Scenario::dim() const {
  Index n = 1;
  for (const auto& layer : layers) n *= layer.dim();
  return n;
}

LayerWeights Scenario::realized_weights() const {
  LayerWeights out;
  for (const auto& layer : layers) out.push_back(layer.uncertainty.realized_or_zero());
  return out;
}

Graph florentine_family_graph(const FlorentineOptions& opts) {
  std::vector<Edge> edges = opts.family_edges;
  for (Edge& e : edges) e.weight *= opts.family_coupling;
  return Graph::undirected(4, edges);
}

std::vector<std::string> florentine_family_names() {
  return {"Acciaiuoli", "Albizzi", "Barbadori", "Bischeri",  "Castellani",
          "Ginori",     "Guadagni", "Lamberteschi", "Medici", "Pazzi",
          "Peruzzi",    "Ridolfi",  "Salviati",  "Strozzi",  "Tornabuoni"};
}

Graph florentine_elite_graph() {
  return Graph::undirected(15, {{0, 8, 1},   {8, 2, 1},   {8, 11, 1},  {8, 14, 1},  {8, 1, 1},
                                {8, 12, 1},  {4, 10, 1},  {4, 13, 1},  {4, 2, 1},   {10, 13, 1},
                                {10, 3, 1},  {13, 11, 1}, {13, 3, 1},  {11, 14, 1}, {14, 6, 1},
                                {1, 5, 1},   {1, 6, 1},   {12, 9, 1},  {3, 6, 1},   {6, 7, 1}});
}

Graph province_graph(int provinces) {
  if (provinces < 1) throw DimensionError("province count must be at least 1");
  std::vector<Edge> edges;
  for (int p = 1; p < provinces; ++p) edges.push_back({0, p, 1.0});
  return Graph::undirected(provinces, edges);
}

Scenario florentine_scenario(int provinces, std::uint64_t seed, const FlorentineOptions& opts) {
  if (provinces < 1 || provinces > 4) {
    throw DimensionError("florentine scenario supports 1..4 provinces, got " + std::to_string(provinces));
  }
  Scenario s;
  s.name = "florentine-" + std::to_string(provinces);
  s.seed = seed;

  const TaylorLayer family = taylor_layer(florentine_family_graph(opts), {{opts.input_node, 1.0}});
  Matrix direction = Matrix::Zero(4, 4);
  direction(opts.perturbed_first, opts.perturbed_second) = 1.0;
  direction(opts.perturbed_second, opts.perturbed_first) = 1.0;
  LayerSpec first{family.a, family.b, {}};
  // The perturbation is stated on the Laplacian; A = -L carries it negated.
  first.uncertainty.directions.push_back(-direction);
  first.uncertainty.weight_bounds.push_back(opts.weight_bound);
  first.uncertainty.realized_weights = std::vector<double>{opts.realized_weight};

  s.layers.push_back(std::move(first));
  s.layers.push_back({taylor_layer(florentine_elite_graph(), {}).a, std::nullopt, {}});
  s.layers.push_back({taylor_layer(province_graph(provinces), {}).a, std::nullopt, {}});

  s.q1 = Matrix::Identity(4, 4);
  s.r1 = Matrix::Identity(1, 1);
  s.simulation.x0 = random_unit_vector(s.dim(), seed);
  return s;
}

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ParseError(where + ": " + what);
}

double number_at(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

Index index_at(const json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return static_cast<Index>(j.get<long long>());
}

std::vector<double> numbers_at(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number_at(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

Matrix dense_at(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(where, "expected a nonempty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  Matrix m(static_cast<Index>(j.size()), static_cast<Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const std::vector<double> row = numbers_at(j[r], where + "[" + std::to_string(r) + "]");
    if (row.size() != cols) fail(where, "ragged matrix rows");
    for (std::size_t c = 0; c < cols; ++c) m(static_cast<Index>(r), static_cast<Index>(c)) = row[c];
  }
  return m;
}

// {"diagonal": [...]}, {"full": [[...]]}, {"identity": scale} or a bare number (scaled identity).
Matrix weight_matrix_at(const json& j, Index n, const std::string& where) {
  Matrix m;
  if (j.is_number()) {
    m = j.get<double>() * Matrix::Identity(n, n);
  } else if (j.is_object() && j.contains("diagonal")) {
    const std::vector<double> d = numbers_at(j["diagonal"], where + ".diagonal");
    m = Eigen::Map<const Vector>(d.data(), static_cast<Index>(d.size())).asDiagonal();
  } else if (j.is_object() && j.contains("full")) {
    m = dense_at(j["full"], where + ".full");
  } else if (j.is_object() && j.contains("identity")) {
    m = number_at(j["identity"], where + ".identity") * Matrix::Identity(n, n);
  } else {
    fail(where, "expected a number or an object with 'diagonal', 'full' or 'identity'");
  }
  if (m.rows() != n || m.cols() != n) {
    throw DimensionError(where + " is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                         ", expected " + std::to_string(n) + "x" + std::to_string(n));
  }
  return m;
}

Graph graph_at(const json& layer, const std::string& base_dir, const std::string& where) {
  if (layer.contains("graph")) {
    if (!layer["graph"].is_string()) fail(where + ".graph", "expected a file path");
    std::filesystem::path path(layer["graph"].get<std::string>());
    if (path.is_relative()) path = std::filesystem::path(base_dir) / path;
    if (!std::filesystem::exists(path)) fail(where + ".graph", "file '" + path.string() + "' does not exist");
    return load_graph(path.string());
  }
  if (!layer.contains("nodes")) fail(where, "needs either 'graph' or 'nodes' with inline 'edges'");
  const Index nodes = index_at(layer["nodes"], where + ".nodes");
  const bool undirected = layer.value("undirected", true);
  std::vector<Edge> edges;
  if (layer.contains("edges")) {
    const json& list = layer["edges"];
    if (!list.is_array()) fail(where + ".edges", "expected an array of [tail, head, weight]");
    for (std::size_t e = 0; e < list.size(); ++e) {
      const std::string at = where + ".edges[" + std::to_string(e) + "]";
      if (!list[e].is_array() || list[e].size() != 3) fail(at, "expected [tail, head, weight]");
      edges.push_back({index_at(list[e][0], at), index_at(list[e][1], at), number_at(list[e][2], at)});
    }
  }
  if (nodes <= 0) throw DimensionError(where + ".nodes must be positive");
  return undirected ? Graph::undirected(nodes, edges) : Graph::directed(nodes, edges);
}

UncertaintyModel uncertainty_at(const json& j, Index n, const std::string& where) {
  UncertaintyModel model;
  if (!j.is_object()) fail(where, "expected an object");
  if (j.contains("directions")) {
    const json& dirs = j["directions"];
    if (!dirs.is_array()) fail(where + ".directions", "expected an array of triplet lists");
    for (std::size_t d = 0; d < dirs.size(); ++d) {
      const std::string at = where + ".directions[" + std::to_string(d) + "]";
      if (!dirs[d].is_array()) fail(at, "expected an array of [i, j, value]");
      Matrix m = Matrix::Zero(n, n);
      for (std::size_t t = 0; t < dirs[d].size(); ++t) {
        const json& trip = dirs[d][t];
        const std::string tat = at + "[" + std::to_string(t) + "]";
        if (!trip.is_array() || trip.size() != 3) fail(tat, "expected [i, j, value]");
        const Index r = index_at(trip[0], tat);
        const Index c = index_at(trip[1], tat);
        if (r < 0 || r >= n || c < 0 || c >= n) throw DimensionError(tat + " indexes outside the layer");
        m(r, c) += number_at(trip[2], tat);
      }
      // Directions perturb the Laplacian; the layer matrix is its negation.
      model.directions.push_back(-m);
    }
  }
  if (j.contains("weight_bounds")) model.weight_bounds = numbers_at(j["weight_bounds"], where + ".weight_bounds");
  if (j.contains("realized_weights")) {
    model.realized_weights = numbers_at(j["realized_weights"], where + ".realized_weights");
  }
  model.validate(n);
  return model;
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& base_dir, std::uint64_t seed) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& err) {
    throw ParseError(std::string("invalid JSON: ") + err.what());
  }
  if (!root.is_object()) throw ParseError("scenario must be a JSON object");

  Scenario s;
  s.seed = seed;
  s.name = root.value("name", std::string("scenario"));
  if (!root.contains("layers") || !root["layers"].is_array() || root["layers"].empty()) {
    throw ParseError("scenario needs a nonempty 'layers' array");
  }
  const json& layers = root["layers"];
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const std::string where = "layers[" + std::to_string(i) + "]";
    const json& lj = layers[i];
    if (!lj.is_object()) fail(where, "expected an object");
    const Graph graph = graph_at(lj, base_dir, where);
    std::vector<InputCoupling> inputs;
    if (lj.contains("input_nodes")) {
      const json& list = lj["input_nodes"];
      if (!list.is_array()) fail(where + ".input_nodes", "expected an array of [node, gain]");
      for (std::size_t k = 0; k < list.size(); ++k) {
        const std::string at = where + ".input_nodes[" + std::to_string(k) + "]";
        if (!list[k].is_array() || list[k].size() != 2) fail(at, "expected [node, gain]");
        inputs.push_back({index_at(list[k][0], at), number_at(list[k][1], at)});
      }
    }
    const TaylorLayer taylor = taylor_layer(graph, inputs);
    LayerSpec spec{taylor.a, std::nullopt, {}};
    if (i == 0 && !inputs.empty()) spec.b = taylor.b;
    if (lj.contains("uncertainty")) spec.uncertainty = uncertainty_at(lj["uncertainty"], graph.node_count(), where + ".uncertainty");
    s.layers.push_back(std::move(spec));
  }
  if (!s.layers.front().b) throw DimensionError("layers[0] needs 'input_nodes' (the composed input map uses B_1)");

  const Index n1 = s.layers.front().dim();
  const Index p1 = s.layers.front().b->cols();
  s.q1 = root.contains("q1") ? weight_matrix_at(root["q1"], n1, "q1") : Matrix::Identity(n1, n1);
  s.r1 = root.contains("r1") ? weight_matrix_at(root["r1"], p1, "r1") : Matrix::Identity(p1, p1);

  if (root.contains("certificates")) {
    const json& cj = root["certificates"];
    if (!cj.is_object()) fail("certificates", "expected an object");
    const std::string name = cj.value("strategy", std::string("identity"));
    const auto strategy = parse_strategy(name);
    if (!strategy) fail("certificates.strategy", "unknown strategy '" + name + "'");
    s.certificates.strategy = *strategy;
    s.certificates.strict = cj.value("strict", false);
    if (cj.contains("matrices")) {
      const json& ms = cj["matrices"];
      if (!ms.is_array()) fail("certificates.matrices", "expected an array of matrices");
      for (std::size_t i = 0; i < ms.size(); ++i) {
        s.certificates.user_m.push_back(dense_at(ms[i], "certificates.matrices[" + std::to_string(i) + "]"));
      }
    }
  }

  s.simulation.x0 = random_unit_vector(s.dim(), seed);
  if (root.contains("simulation")) {
    const json& sj = root["simulation"];
    if (!sj.is_object()) fail("simulation", "expected an object");
    if (sj.contains("x0")) {
      const std::vector<double> x0 = numbers_at(sj["x0"], "simulation.x0");
      s.simulation.x0 = Eigen::Map<const Vector>(x0.data(), static_cast<Index>(x0.size()));
    }
    if (sj.contains("t_final")) s.simulation.t_final = number_at(sj["t_final"], "simulation.t_final");
    if (sj.contains("dt")) s.simulation.dt = number_at(sj["dt"], "simulation.dt");
    if (sj.contains("record_stride")) s.simulation.record_stride = index_at(sj["record_stride"], "simulation.record_stride");
    if (sj.contains("controller")) {
      const std::string c = sj["controller"].is_string() ? sj["controller"].get<std::string>() : "";
      if (c == "baseline") s.simulation.controller = Controller::baseline;
      else if (c == "guaranteed") s.simulation.controller = Controller::guaranteed;
      else fail("simulation.controller", "expected 'baseline' or 'guaranteed'");
    }
  }
  s.simulation.validate(s.dim());
  return s;
}

Scenario load_scenario(const std::string& path, std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string base = std::filesystem::path(path).parent_path().string();
  return parse_scenario(buffer.str(), base.empty() ? "." : base, seed);
}

SynthesisOptions synthesis_options(const Scenario& scenario) {
  SynthesisOptions opts;
  opts.certificates = scenario.certificates;
  opts.verification.seed = scenario.seed;
  return opts;
}

ControllerRun run_controller(const Scenario& scenario, const SynthesisResult& synthesis, Controller controller,
                             const LayerWeights& weights) {
  const ComposedPlant& plant = synthesis.plant;
  const GuaranteedDesign& design = synthesis.design;
  ControllerRun run;
  run.controller = controller;
  if (controller == Controller::guaranteed) {
    run.k_otimes = design.k_otimes;
  } else {
    const LayerSpec& first = scenario.layers.front();
    const AreSolution nominal = solve_are({first.a, *first.b, scenario.q1, scenario.r1, std::nullopt});
    run.k_otimes = slot_product(identities(plant.layer_dims), 0, nominal.k);
  }
  const Matrix realized = plant.a_oplus + plant.realized_delta(weights);
  run.trace = integrate(realized, plant.b_otimes, run.k_otimes, design.q_otimes, design.r_otimes, scenario.simulation);
  run.report.j_sim = run.trace.final_cost();
  run.report.bound = scenario.simulation.x0.dot(design.p_otimes * scenario.simulation.x0);
  run.report.margin = run.report.bound - run.report.j_sim;
  run.report.spectral_abscissa = spectral_abscissa(realized - plant.b_otimes * run.k_otimes);
  run.report.divergent = run.trace.divergent;
  run.report.tail_converged = run.trace.tail_converged;
  run.report.t_end = run.trace.times.back();
  return run;
}

Comparison compare_controllers(const Scenario& scenario) {
  Comparison out;
  out.synthesis = synthesize(scenario.layers, scenario.q1, scenario.r1, synthesis_options(scenario));
  const LayerWeights weights = scenario.realized_weights();
  out.baseline = run_controller(scenario, out.synthesis, Controller::baseline, weights);
  out.guaranteed = run_controller(scenario, out.synthesis, Controller::guaranteed, weights);
  return out;
}

std::vector<BenchRow> run_bench(int max_provinces, int repetitions, std::uint64_t seed) {
  if (max_provinces < 1) throw Error(ErrorCode::usage, "bench needs at least one province size");
  repetitions = std::max(repetitions, 1);
  std::vector<BenchRow> rows;
  for (int provinces = 1; provinces <= max_provinces; ++provinces) {
    FlorentineOptions fopts;
    Scenario s = provinces <= 4 ? florentine_scenario(provinces, seed) : florentine_scenario(4, seed);
    if (provinces > 4) {
      s.layers.back().a = taylor_layer(province_graph(provinces), {}).a;
      s.simulation.x0 = random_unit_vector(s.dim(), seed);
    }
    const SynthesisOptions opts = synthesis_options(s);

    BenchRow row;
    row.provinces = provinces;
    row.dim = s.dim();
    std::vector<double> layered;
    SynthesisResult result;
    for (int r = 0; r < repetitions; ++r) {
      result = synthesize(s.layers, s.q1, s.r1, opts);
      layered.push_back(result.timings.layered());
    }
    std::nth_element(layered.begin(), layered.begin() + layered.size() / 2, layered.end());
    row.layered_seconds = layered[layered.size() / 2];
    row.layered_iterations = result.design.layer1.iterations;

    const AreProblem mono{result.plant.a_oplus, result.plant.b_otimes, result.design.q_otimes,
                          result.design.r_otimes, result.plant.lifted_uncertainty()};
    const auto start = std::chrono::steady_clock::now();
    const GuaranteedSolution sol = solve_guaranteed_are(mono);
    row.monolithic_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    row.monolithic_iterations = sol.iterations;
    row.agreement = (sol.p - result.design.p_otimes).norm() / result.design.p_otimes.norm();
    rows.push_back(row);
  }
  return rows;
}

}  // namespace layerlq
