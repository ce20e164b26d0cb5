#include "cli_app.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <optional>

#include "CLI11.hpp"
#include "config.hpp"
#include "json.hpp"
#include "output.hpp"
#include "roughflow/errors.hpp"
#include "scenarios.hpp"

#ifndef ROUGHFLOW_VERSION
#define ROUGHFLOW_VERSION "0.0.0"
#endif

namespace roughflow::cli {

using nlohmann::json;

namespace {

struct Inputs {
  std::string command;
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::string> seed;
  bool circle = false, pair = false;
  std::optional<std::string> levels, gamma, d;
};

void add_common(CLI::App& app, Inputs& in) {
  app.add_option("command", in.command, "Experiment: lift, rde, flow, transport, euler, study-wongzakai, study-convergence");
  app.add_option("--config", in.config_path, "Configuration file (sectioned key = value text, or JSON)");
  app.add_option("--set", in.sets, "Override one key, e.g. --set grid.steps=512")->allow_extra_args(false);
  app.add_option("--seed", in.seed, "64-bit seed for stochastic noise");
  app.add_flag("--circle", in.circle, "lift: unit-circle driver");
  app.add_option("--levels", in.levels, "lift: finest dyadic level of the circle table");
  app.add_flag("--pair", in.pair, "euler: co-rotating vortex pair");
  app.add_option("--gamma", in.gamma, "euler: circulation");
  app.add_option("--d", in.d, "euler: pair separation");
}

/// Merges the file, positional command, sugar flags, --set and --seed into
/// one flat configuration.
json gather(const Inputs& in, std::vector<Violation>& violations) {
  json flat = json::object();
  if (!in.config_path.empty()) flat = load_config_file(in.config_path, violations);
  if (!in.command.empty()) flat["command"] = in.command;
  if (in.circle) flat["noise.kind"] = "circle";
  if (in.levels) flat["grid.level"] = *in.levels;
  if (in.pair) flat["euler.pair"] = true;
  if (in.gamma) flat["euler.gamma"] = *in.gamma;
  if (in.d) flat["euler.d"] = *in.d;
  for (const auto& s : in.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) {
      violations.push_back({"--set", "expected key=value, got '" + s + "'"});
      continue;
    }
    flat[s.substr(0, eq)] = s.substr(eq + 1);
  }
  if (in.seed) flat["seed"] = *in.seed;
  if (in.pair) {
    if (!flat.contains("noise.kind")) flat["noise.kind"] = "zero";
    if (!flat.contains("grid.steps")) flat["grid.steps"] = 4200;
  }
  return flat;
}

json error_record(const std::string& kind, const std::string& message) {
  return {{"error", kind}, {"message", message}};
}

int run(const Inputs& in, const std::string& out_flag, unsigned threads, const std::string& format, const std::string& plots,
        const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<Violation> violations;
  json flat;
  try {
    flat = gather(in, violations);
  } catch (const IoError& e) {
    err << error_record("io", e.what()).dump() << "\n";
    return kConfigError;
  }
  auto result = validate_config(flat);
  violations.insert(violations.end(), result.violations.begin(), result.violations.end());
  if (!violations.empty()) {
    err << json{{"error", "config"}, {"violations", violations_to_json(violations)}}.dump() << "\n";
    return kConfigError;
  }
  const json& cfg = result.resolved;
  std::optional<std::uint64_t> seed;
  if (cfg.contains("seed")) seed = cfg["seed"].get<std::uint64_t>();
  const std::string hash = hash_hex(config_hash(cfg));

  std::string dir = out_flag;
  if (const char* env = std::getenv("ROUGHFLOW_OUT"); env && *env) dir = env;

  const auto start = std::chrono::steady_clock::now();
  try {
    ResultWriter writer(dir, cfg["command"], hash, seed, format == "json" ? Format::Json : Format::Csv, plots == "on", err);
    json summary = json::object();
    run_scenario(cfg, writer, threads, summary);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json manifest = {
        {"tool", "roughflow"},
        {"version", ROUGHFLOW_VERSION},
        {"compiler", __VERSION__},
        {"command", cfg["command"]},
        {"config", cfg},
        {"config_hash", hash},
        {"seed", seed ? json(*seed) : json(nullptr)},
        {"threads", threads},
        {"format", format},
        {"inputs", {{"config_file", in.config_path.empty() ? json(nullptr) : json(in.config_path)},
                    {"arguments", std::vector<std::string>(args.begin() + 1, args.end())}}},
        {"outputs", writer.files()},
        {"results", summary},
        {"wall_time_seconds", wall},
    };
    writer.write_json("manifest", manifest);
    out << json{{"status", "ok"}, {"out", dir}, {"results", summary}}.dump(2) << "\n";
    return kOk;
  } catch (const DivergenceError& e) {
    json rec = error_record("numeric", e.what());
    rec["step"] = e.step();
    rec["seed"] = e.seed();
    err << rec.dump() << "\n";
    return kNumericError;
  } catch (const NumericError& e) {
    err << error_record("numeric", e.what()).dump() << "\n";
    return kNumericError;
  } catch (const IoError& e) {
    err << error_record("io", e.what()).dump() << "\n";
    return kIoError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << error_record("io", e.what()).dump() << "\n";
    return kIoError;
  } catch (const Error& e) {
    err << error_record("config", e.what()).dump() << "\n";
    return kConfigError;
  }
}

int validate(const Inputs& in, std::ostream& out, std::ostream& err) {
  std::vector<Violation> violations;
  json flat;
  try {
    flat = gather(in, violations);
  } catch (const IoError& e) {
    err << error_record("io", e.what()).dump() << "\n";
    return kConfigError;
  }
  const auto result = validate_config(flat);
  violations.insert(violations.end(), result.violations.begin(), result.violations.end());
  json report = {{"valid", violations.empty()}, {"violations", violations_to_json(violations)}};
  if (violations.empty()) report["config_hash"] = hash_hex(config_hash(result.resolved));
  out << report.dump(2) << "\n";
  return violations.empty() ? kOk : kConfigError;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Rough paths, rough transport and rough 2D Euler experiments", "roughflow"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ROUGHFLOW_VERSION);

  Inputs run_in, val_in;
  std::string out_dir = "roughflow-out", format = "csv", plots = "on";
  unsigned threads = 1;

  auto* run_cmd = app.add_subcommand("run", "Run an experiment and write its results");
  add_common(*run_cmd, run_in);
  run_cmd->add_option("--out", out_dir, "Output directory (ROUGHFLOW_OUT overrides)");
  run_cmd->add_option("--threads", threads, "Worker threads")->check(CLI::Range(1u, 1024u));
  run_cmd->add_option("--format", format, "Table format")->check(CLI::IsMember({"csv", "json"}));
  run_cmd->add_option("--plots", plots, "SVG plots")->check(CLI::IsMember({"on", "off"}));

  auto* val_cmd = app.add_subcommand("validate", "Check a configuration without running it");
  add_common(*val_cmd, val_in);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  if (argv.empty()) argv.push_back("roughflow");
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  if (*val_cmd) return validate(val_in, out, err);
  try {
    return run(run_in, out_dir, threads, format, plots, args, out, err);
  } catch (const std::exception& e) {
    err << error_record("internal", e.what()).dump() << "\n";
    return kInternal;
  }
}

}  // namespace roughflow::cli
