#include "layerlq/report.hpp"

#include <cmath>
#include <ostream>

#include "layerlq/linalg.hpp"

namespace layerlq {

using json = nlohmann::json;

namespace {

json dims_json(const std::vector<Index>& dims) {
  json out = json::array();
  for (Index d : dims) out.push_back(d);
  return out;
}

json header(const std::string& command, const Scenario& scenario) {
  return {{"schema_version", kSchemaVersion},
          {"command", command},
          {"scenario", scenario.name},
          {"seed", scenario.seed}};
}

const char* controller_name(Controller c) { return c == Controller::baseline ? "baseline" : "guaranteed"; }

}  // namespace

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json compose_report(const Scenario& scenario, const ComposedPlant& plant) {
  json out = header("compose", scenario);
  json uncertainty = json::array();
  for (const auto& u : plant.delta_structure) {
    uncertainty.push_back({{"directions", u.size()}, {"weight_bounds", u.weight_bounds}});
  }
  out["asserted"] = {{"layer_dims", dims_json(plant.layer_dims)},
                     {"dim", plant.dim()},
                     {"inputs", plant.b_otimes.cols()},
                     {"uncertainty", uncertainty}};
  out["diagnostic"] = {{"a_oplus_nonzeros", (plant.a_oplus.array() != 0.0).count()},
                       {"a_oplus_spectral_abscissa", spectral_abscissa(plant.a_oplus)}};
  return out;
}

json synthesis_report(const Scenario& scenario, const SynthesisResult& result) {
  const auto& d = result.design;
  const auto& v = result.verification;
  const auto& s = result.stabilizability;
  json out = header("synthesize", scenario);

  json certs = json::array();
  for (const auto& c : d.certificates.layers) {
    certs.push_back({{"layer", c.layer + 1},
                     {"m_min_eig", c.m_min_eig},
                     {"f_max_eig", c.f_max_eig},
                     {"g_max_eig", c.g_max_eig},
                     {"g_strict", c.g_strict}});
  }
  out["asserted"] = {
      {"passed", result.passed()},
      {"dim", result.plant.dim()},
      {"layer_dims", dims_json(result.plant.layer_dims)},
      {"certificate_strategy", to_string(scenario.certificates.strategy)},
      {"certificates", certs},
      {"layer1",
       {{"iterations", d.layer1.iterations},
        {"residual", d.layer1.residual_norm},
        {"p_min_eig", min_eig(d.layer1.p)},
        {"k", matrix_json(d.layer1.k)}}},
      {"definiteness", {{"p_min_eig", d.p_min_eig}, {"q_min_eig", d.q_min_eig}, {"r_min_eig", d.r_min_eig}}},
      {"generalized_are",
       {{"residual", v.residual}, {"tolerance", v.tolerance}, {"passed", v.residual_passed}}},
      {"domination",
       {{"min_eig", v.domination_min_eig},
        {"tolerance", v.domination_tolerance},
        {"samples", v.domination_samples},
        {"passed", v.domination_passed}}},
      {"rank",
       {{"dim", s.dim},
        {"controllability", s.controllability_rank},
        {"observability", s.observability_rank},
        {"controllable", s.controllable()},
        {"observable", s.observable()}}},
      {"l_factor_residual", s.l_factor_residual},
      {"closed_loop_abscissa", s.closed_loop_abscissa},
      {"cost_bound", scenario.simulation.x0.dot(d.p_otimes * scenario.simulation.x0)},
  };
  const auto& t = result.timings;
  out["diagnostic"] = {{"warnings", result.warnings},
                       {"timings_seconds",
                        {{"layer_solve", t.layer_solve},
                         {"certificates", t.certificates},
                         {"assembly", t.assembly},
                         {"definiteness", t.definiteness},
                         {"verification", t.verification},
                         {"stabilizability", t.stabilizability},
                         {"layered", t.layered()}}}};
  return out;
}

json cost_report_json(const CostReport& r) {
  return {{"j_sim", r.j_sim},
          {"bound", r.bound},
          {"bound_satisfied", r.bound_satisfied()},
          {"spectral_abscissa", r.spectral_abscissa},
          {"divergent", r.divergent},
          {"tail_converged", r.tail_converged}};
}

json simulation_report(const Scenario& scenario, const ControllerRun& run) {
  json out = header("simulate", scenario);
  out["controller"] = controller_name(run.controller);
  out["asserted"] = cost_report_json(run.report);
  out["diagnostic"] = {{"margin", run.report.margin},
                       {"t_end", run.report.t_end},
                       {"recorded_samples", run.trace.times.size()}};
  return out;
}

json comparison_report(const Scenario& scenario, const Comparison& c) {
  json out = header("casestudy", scenario);
  out["asserted"] = {{"dim", c.synthesis.plant.dim()},
                     {"synthesis_passed", c.synthesis.passed()},
                     {"generalized_residual", c.synthesis.verification.residual},
                     {"baseline", cost_report_json(c.baseline.report)},
                     {"guaranteed", cost_report_json(c.guaranteed.report)},
                     {"realized_weights", scenario.realized_weights()}};
  out["diagnostic"] = {{"baseline_margin", c.baseline.report.margin},
                       {"guaranteed_margin", c.guaranteed.report.margin},
                       {"baseline_t_end", c.baseline.report.t_end},
                       {"guaranteed_t_end", c.guaranteed.report.t_end},
                       {"layered_seconds", c.synthesis.timings.layered()}};
  return out;
}

json bench_report(const std::vector<BenchRow>& rows) {
  json out = {{"schema_version", kSchemaVersion}, {"command", "bench"}};
  json asserted = json::array();
  json diagnostic = json::array();
  for (const auto& r : rows) {
    asserted.push_back({{"provinces", r.provinces},
                        {"dim", r.dim},
                        {"layered_iterations", r.layered_iterations},
                        {"monolithic_iterations", r.monolithic_iterations}});
    diagnostic.push_back({{"provinces", r.provinces},
                          {"layered_seconds", r.layered_seconds},
                          {"monolithic_seconds", r.monolithic_seconds},
                          {"agreement", r.agreement}});
  }
  out["asserted"] = {{"rows", asserted}};
  out["diagnostic"] = {{"rows", diagnostic}};
  return out;
}

json rank_report(const Scenario& scenario, Index layer1_rank, Index composed_rank) {
  json out = header("synthesize", scenario);
  const Index n1 = scenario.layers.front().dim();
  const Index n = scenario.dim();
  out["asserted"] = {{"passed", false},
                     {"dim", n},
                     {"rank",
                      {{"layer1_dim", n1},
                       {"layer1_controllability", layer1_rank},
                       {"dim", n},
                       {"controllability", composed_rank},
                       {"controllable", composed_rank == n && layer1_rank == n1}}}};
  out["diagnostic"] = json::object();
  return out;
}

json error_json(ErrorCode code, const std::string& message) {
  return {{"schema_version", kSchemaVersion},
          {"error", {{"reason", to_string(code)}, {"code", static_cast<int>(code)}, {"message", message}}}};
}

json error_json(const Error& err) {
  json out = error_json(err.code(), err.what());
  if (const auto* p = dynamic_cast<const ParseError*>(&err); p != nullptr && p->line() > 0) {
    out["error"]["line"] = p->line();
  }
  if (const auto* c = dynamic_cast<const CheckFailed*>(&err); c != nullptr) {
    out["error"]["eigenvalue"] = c->eigenvalue();
    if (c->layer() >= 0) out["error"]["layer"] = c->layer() + 1;
  }
  if (const auto* f = dynamic_cast<const FixedPointDivergence*>(&err); f != nullptr) {
    out["error"]["norm_trace"] = f->trace();
  }
  return out;
}

json strip_diagnostics(json report) {
  if (report.is_object()) {
    report.erase("diagnostic");
    for (auto& value : report) value = strip_diagnostics(value);
  }
  return report;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << "provinces,dim,layered_seconds,monolithic_seconds,layered_iterations,monolithic_iterations,agreement\n";
  for (const auto& r : rows) {
    out << r.provinces << ',' << r.dim << ',' << r.layered_seconds << ',' << r.monolithic_seconds << ','
        << r.layered_iterations << ',' << r.monolithic_iterations << ',' << r.agreement << '\n';
  }
}

}  // namespace layerlq
