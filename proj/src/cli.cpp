#include "layerlq/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "layerlq/kron.hpp"
#include "layerlq/linalg.hpp"
#include "layerlq/report.hpp"

namespace layerlq {

using json = nlohmann::json;

namespace {

struct ScenarioSource {
  std::string path;
  int florentine = 0;
  std::optional<std::uint64_t> seed;
  std::vector<double> weights;  // layer-1 realized weights override
};

void add_source(CLI::App* cmd, ScenarioSource& src) {
  cmd->add_option("scenario", src.path, "scenario JSON file");
  cmd->add_option("--florentine", src.florentine, "use the bundled case study with N provinces (1..4)");
  cmd->add_option("--seed", src.seed, "seed for x0 and sampling (default LAYERLQ_SEED or 42)");
  cmd->add_option("--weights", src.weights, "realized layer-1 uncertainty weights")->delimiter(',');
}

Scenario load(const ScenarioSource& src) {
  const std::uint64_t seed = src.seed.value_or(seed_from_env());
  if (src.path.empty() == (src.florentine == 0)) {
    throw Error(ErrorCode::usage, "give exactly one of a scenario file or --florentine N");
  }
  Scenario s = src.path.empty() ? florentine_scenario(src.florentine, seed) : load_scenario(src.path, seed);
  if (!src.weights.empty()) {
    UncertaintyModel& u = s.layers.front().uncertainty;
    if (src.weights.size() != u.size()) {
      throw DimensionError("--weights has " + std::to_string(src.weights.size()) + " entries, layer 1 has " +
                           std::to_string(u.size()) + " directions");
    }
    u.realized_weights = src.weights;
    u.validate(s.layers.front().dim());
  }
  return s;
}

void emit(const json& report, const std::string& path, std::ostream& out) {
  const std::string text = report.dump(2) + "\n";
  out << text;
  if (path.empty()) return;
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorCode::usage, "cannot write report '" + path + "'");
  file << text;
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::usage, "cannot write '" + path.string() + "'");
  f << std::setprecision(17);
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) f << (c ? "," : "") << m(r, c);
    f << '\n';
  }
}

void write_trace(const std::string& path, const SimulationTrace& trace, Index stride) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::usage, "cannot write trace '" + path + "'");
  write_trace_csv(f, trace, stride);
}

int cmd_compose(const ScenarioSource& src, const std::string& matrix_dir, std::ostream& out) {
  const Scenario s = load(src);
  const ComposedPlant plant = compose(s.layers);
  if (!matrix_dir.empty()) {
    std::filesystem::create_directories(matrix_dir);
    write_matrix_csv(std::filesystem::path(matrix_dir) / "a_oplus.csv", plant.a_oplus);
    write_matrix_csv(std::filesystem::path(matrix_dir) / "b_otimes.csv", plant.b_otimes);
  }
  emit(compose_report(s, plant), {}, out);
  return 0;
}

int cmd_synthesize(const ScenarioSource& src, bool strict, const std::string& report_path, std::ostream& out,
                   std::ostream& err) {
  Scenario s = load(src);
  if (strict) s.certificates.strict = true;

  const LayerSpec& first = s.layers.front();
  if (first.b) {
    const Index r1 = controllability_rank(first.a, *first.b);
    if (r1 < first.dim()) {
      const ComposedPlant plant = compose(s.layers);
      const Index rc = controllability_rank(plant.a_oplus, plant.b_otimes);
      emit(rank_report(s, r1, rc), report_path, out);
      err << error_json(ErrorCode::check_failed, "layer 1 (A, B) is not controllable: rank " + std::to_string(r1) +
                                                     " of " + std::to_string(first.dim()))
                 .dump()
          << '\n';
      return static_cast<int>(ErrorCode::check_failed);
    }
  }

  try {
    const SynthesisResult result = synthesize(s.layers, s.q1, s.r1, synthesis_options(s));
    emit(synthesis_report(s, result), report_path, out);
    if (!result.passed()) {
      err << error_json(ErrorCode::check_failed, "synthesis checks did not pass").dump() << '\n';
      return static_cast<int>(ErrorCode::check_failed);
    }
    return 0;
  } catch (const CheckFailed& e) {
    json report = {{"schema_version", kSchemaVersion},
                   {"command", "synthesize"},
                   {"scenario", s.name},
                   {"seed", s.seed},
                   {"asserted", {{"passed", false}, {"failure", error_json(e)["error"]}}},
                   {"diagnostic", json::object()}};
    emit(report, report_path, out);
    throw;
  }
}

int cmd_simulate(const ScenarioSource& src, const std::string& controller, const std::string& trace_path,
                 Index stride, const std::string& report_path, std::ostream& out) {
  Scenario s = load(src);
  const Controller c = controller == "baseline" ? Controller::baseline : Controller::guaranteed;
  const SynthesisResult result = synthesize(s.layers, s.q1, s.r1, synthesis_options(s));
  const ControllerRun run = run_controller(s, result, c, s.realized_weights());
  if (!trace_path.empty()) write_trace(trace_path, run.trace, stride);
  emit(simulation_report(s, run), report_path, out);
  return 0;
}

int cmd_casestudy(int provinces, std::optional<std::uint64_t> seed, const std::string& trace_dir, Index stride,
                  const std::string& report_path, std::ostream& out) {
  const Scenario s = florentine_scenario(provinces, seed.value_or(seed_from_env()));
  const Comparison c = compare_controllers(s);
  if (!trace_dir.empty()) {
    std::filesystem::create_directories(trace_dir);
    write_trace((std::filesystem::path(trace_dir) / "baseline.csv").string(), c.baseline.trace, stride);
    write_trace((std::filesystem::path(trace_dir) / "guaranteed.csv").string(), c.guaranteed.trace, stride);
  }
  emit(comparison_report(s, c), report_path, out);
  return 0;
}

int cmd_bench(int max_provinces, int repetitions, std::optional<std::uint64_t> seed, const std::string& csv_path,
              const std::string& report_path, std::ostream& out, std::ostream& err) {
  if (max_provinces < 1) throw Error(ErrorCode::usage, "bench needs max_provinces >= 1");
  if (max_provinces > 4) {
    err << "warning: sizes above 4 extend the province star beyond the bundled graph\n";
  }
  const auto rows = run_bench(max_provinces, repetitions, seed.value_or(seed_from_env()));
  out << std::left << std::setw(10) << "provinces" << std::setw(6) << "dim" << std::setw(14) << "layered[s]"
      << std::setw(16) << "monolithic[s]" << std::setw(10) << "speedup" << "agreement\n";
  for (const auto& r : rows) {
    out << std::setw(10) << r.provinces << std::setw(6) << r.dim << std::setw(14) << std::setprecision(4)
        << r.layered_seconds << std::setw(16) << r.monolithic_seconds << std::setw(10)
        << r.monolithic_seconds / std::max(r.layered_seconds, 1e-12) << r.agreement << '\n';
  }
  if (!csv_path.empty()) {
    std::ofstream f(csv_path);
    if (!f) throw Error(ErrorCode::usage, "cannot write '" + csv_path + "'");
    write_bench_csv(f, rows);
  }
  if (!report_path.empty()) {
    std::ofstream f(report_path);
    if (!f) throw Error(ErrorCode::usage, "cannot write report '" + report_path + "'");
    f << bench_report(rows).dump(2) << '\n';
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Compositional guaranteed-cost LQ synthesis on layered networks", "layerlq"};
  app.require_subcommand(1);

  ScenarioSource compose_src;
  std::string matrix_dir;
  auto* compose_cmd = app.add_subcommand("compose", "compose the layered plant and report its dimensions");
  add_source(compose_cmd, compose_src);
  compose_cmd->add_option("--write-matrices", matrix_dir, "directory for a_oplus.csv and b_otimes.csv");

  ScenarioSource synth_src;
  bool strict = false;
  std::string synth_report;
  auto* synth_cmd = app.add_subcommand("synthesize", "guaranteed-cost design and its checks");
  add_source(synth_cmd, synth_src);
  synth_cmd->add_flag("--strict-certificates", strict, "require G_i negative definite");
  synth_cmd->add_option("--report", synth_report, "write the JSON report here as well");

  ScenarioSource sim_src;
  std::string controller = "guaranteed";
  std::string trace_path;
  std::string sim_report;
  Index stride = 1;
  auto* sim_cmd = app.add_subcommand("simulate", "simulate one controller on the realized plant");
  add_source(sim_cmd, sim_src);
  sim_cmd->add_option("--controller", controller, "baseline (nominal LQR) or guaranteed")->check(CLI::IsMember({"baseline", "guaranteed"}));
  sim_cmd->add_option("--trace", trace_path, "CSV trace output");
  sim_cmd->add_option("--stride", stride, "keep every n-th recorded row in the trace")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--report", sim_report, "write the JSON report here as well");

  int max_provinces = 4;
  int repetitions = 5;
  std::optional<std::uint64_t> bench_seed;
  std::string bench_csv;
  std::string bench_json;
  auto* bench_cmd = app.add_subcommand("bench", "layered versus monolithic timing");
  bench_cmd->add_option("max_provinces", max_provinces, "largest province count");
  bench_cmd->add_option("--repetitions", repetitions, "layered repetitions per size (median reported)");
  bench_cmd->add_option("--seed", bench_seed, "seed for x0 (default LAYERLQ_SEED or 42)");
  bench_cmd->add_option("--csv", bench_csv, "timing table as CSV");
  bench_cmd->add_option("--report", bench_json, "JSON report");

  int provinces = 1;
  std::optional<std::uint64_t> case_seed;
  std::string trace_dir;
  std::string case_report;
  Index case_stride = 100;
  auto* case_cmd = app.add_subcommand("casestudy", "bundled case studies");
  case_cmd->require_subcommand(1);
  auto* flor_cmd = case_cmd->add_subcommand("florentine", "baseline LQR versus guaranteed design");
  flor_cmd->add_option("--provinces", provinces, "number of provinces in layer 3")->check(CLI::Range(1, 4));
  flor_cmd->add_option("--seed", case_seed, "seed for x0 (default LAYERLQ_SEED or 42)");
  flor_cmd->add_option("--trace-dir", trace_dir, "write baseline.csv and guaranteed.csv here");
  flor_cmd->add_option("--stride", case_stride, "keep every n-th recorded row in the traces")->check(CLI::PositiveNumber);
  flor_cmd->add_option("--report", case_report, "write the JSON report here as well");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << error_json(ErrorCode::usage, e.what()).dump() << '\n';
    return static_cast<int>(ErrorCode::usage);
  }

  try {
    if (*compose_cmd) return cmd_compose(compose_src, matrix_dir, out);
    if (*synth_cmd) return cmd_synthesize(synth_src, strict, synth_report, out, err);
    if (*sim_cmd) return cmd_simulate(sim_src, controller, trace_path, stride, sim_report, out);
    if (*bench_cmd) return cmd_bench(max_provinces, repetitions, bench_seed, bench_csv, bench_json, out, err);
    if (*flor_cmd) return cmd_casestudy(provinces, case_seed, trace_dir, case_stride, case_report, out);
  } catch (const Error& e) {
    err << error_json(e).dump() << '\n';
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    err << error_json(ErrorCode::numerical, e.what()).dump() << '\n';
    return static_cast<int>(ErrorCode::numerical);
  }
  return static_cast<int>(ErrorCode::usage);
}

}  // namespace layerlq
