/**
 * Copyright 2026 The FedReID-Sim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// fedreid: command-line front end over the C interface.
//
// Exit codes: 0 success, 1 usage, 2 config, 3 runtime.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fedreid/fedreid.h"
#include "json.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

// Carries a failed C call out of a subcommand.
struct CallFailed {
  fr_status status;
  std::string message;
};

void Check(fr_status status, const std::string &context = "") {
  if (status != FR_OK) {
    std::string message = fr_last_error();
    if (!context.empty()) {
      message = context + ": " + message;
    }
    throw CallFailed{status, message};
  }
}

int ExitCodeFor(fr_status status) {
  switch (status) {
    case FR_OK:
      return kExitOk;
    case FR_ERR_CONFIG:
      return kExitConfig;
    default:
      return kExitRuntime;
  }
}

struct ConfigDeleter {
  void operator()(fr_config *c) const { fr_config_free(c); }
};
struct WorldDeleter {
  void operator()(fr_world *w) const { fr_world_free(w); }
};
struct ReportDeleter {
  void operator()(fr_report *r) const { fr_report_free(r); }
};
struct StringDeleter {
  void operator()(char *s) const { fr_string_free(s); }
};

using ConfigPtr = std::unique_ptr<fr_config, ConfigDeleter>;
using WorldPtr = std::unique_ptr<fr_world, WorldDeleter>;
using ReportPtr = std::unique_ptr<fr_report, ReportDeleter>;
using StringPtr = std::unique_ptr<char, StringDeleter>;

// Options shared by every subcommand that needs a configuration.
struct ConfigOptions {
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::string> strategy;
  std::optional<int> rounds;
  std::optional<unsigned long long> seed;

  void Register(CLI::App *app, bool training) {
    app->add_option("--config,-c", config_path, "JSON config file (defaults when omitted)");
    app->add_option("--set,-s", sets, "Override a config key, e.g. --set world.noise=0.2")->take_all();
    if (training) {
      app->add_option("--strategy", strategy, "Aggregation strategy, e.g. fedpav+kd+cdw");
      app->add_option("--rounds,-T", rounds, "Communication rounds");
    }
    app->add_option("--seed", seed, "Experiment seed (also seeds the world unless world.seed is set)");
  }

  ConfigPtr Load() const {
    std::vector<std::string> all = sets;
    if (strategy) {
      all.push_back("strategy=" + nlohmann::json(*strategy).dump());
    }
    if (rounds) {
      all.push_back("rounds=" + std::to_string(*rounds));
    }
    if (seed) {
      all.push_back("seed=" + std::to_string(*seed));
    }
    std::vector<const char *> raw;
    for (const auto &s : all) {
      raw.push_back(s.c_str());
    }
    fr_config *config = nullptr;
    Check(fr_config_load(config_path.empty() ? nullptr : config_path.c_str(), raw.data(), raw.size(), &config));
    return ConfigPtr(config);
  }
};

nlohmann::json ConfigJson(const fr_config *config) {
  char *text = nullptr;
  Check(fr_config_to_json(config, &text));
  StringPtr owned(text);
  return nlohmann::json::parse(owned.get());
}

WorldPtr ObtainWorld(const fr_config *config, const std::string &world_path) {
  fr_world *world = nullptr;
  if (world_path.empty()) {
    Check(fr_world_generate(config, &world), "world generation");
  } else {
    Check(fr_world_load(world_path.c_str(), &world), world_path);
  }
  return WorldPtr(world);
}

std::string WorldHash(const fr_world *world) {
  char hash[17] = {};
  Check(fr_world_hash(world, hash));
  return hash;
}

void PrintReport(const fr_report *report) {
  char *table = nullptr;
  Check(fr_report_table(report, &table));
  StringPtr owned(table);
  std::cout << owned.get();
}

ReportPtr RunOne(const fr_config *config, const fr_world *world, fr_run_kind kind, const std::string &out_dir) {
  fr_report *report = nullptr;
  const fr_status status = fr_run(config, world, kind, out_dir.c_str(), &report);
  if (status != FR_OK) {
    std::string message = fr_last_error();
    if (std::filesystem::exists(std::filesystem::path(out_dir) / "manifest.json")) {
      message += "\npartial trace retained in " + out_dir + " (manifest status: failed)";
    }
    throw CallFailed{status, message};
  }
  return ReportPtr(report);
}

std::string DefaultRunDir(const nlohmann::json &config) {
  return "runs/" + config.at("strategy").get<std::string>() + "_seed" +
         std::to_string(config.at("seed").get<unsigned long long>());
}

int CmdRun(const ConfigOptions &opts, const std::string &world_path, std::string out_dir, bool print_config) {
  ConfigPtr config = opts.Load();
  const nlohmann::json resolved = ConfigJson(config.get());
  if (print_config) {
    std::cout << resolved.dump(2) << "\n";
    return kExitOk;
  }
  if (out_dir.empty()) {
    out_dir = DefaultRunDir(resolved);
  }
  WorldPtr world = ObtainWorld(config.get(), world_path);
  std::cout << "strategy " << resolved.at("strategy").get<std::string>() << ", " << resolved.at("rounds")
            << " rounds, seed " << resolved.at("seed") << ", world " << WorldHash(world.get()) << "\n";
  ReportPtr report = RunOne(config.get(), world.get(), FR_RUN_FEDERATED, out_dir);
  PrintReport(report.get());
  std::cout << "artifacts: " << out_dir << "\n";
  return kExitOk;
}

int CmdBaselines(const ConfigOptions &opts, const std::string &world_path, std::string out_dir) {
  ConfigPtr config = opts.Load();
  const nlohmann::json resolved = ConfigJson(config.get());
  if (out_dir.empty()) {
    out_dir = "runs/baselines_seed" + std::to_string(resolved.at("seed").get<unsigned long long>());
  }
  WorldPtr world = ObtainWorld(config.get(), world_path);
  const std::string standalone_dir = (std::filesystem::path(out_dir) / "standalone").string();
  const std::string centralized_dir = (std::filesystem::path(out_dir) / "centralized").string();

  std::cout << "standalone\n";
  ReportPtr standalone = RunOne(config.get(), world.get(), FR_RUN_STANDALONE, standalone_dir);
  PrintReport(standalone.get());
  std::cout << "\ncentralized\n";
  ReportPtr centralized = RunOne(config.get(), world.get(), FR_RUN_CENTRALIZED, centralized_dir);
  PrintReport(centralized.get());
  std::cout << "artifacts: " << standalone_dir << ", " << centralized_dir << "\n";
  return kExitOk;
}

int CmdCompare(const std::vector<std::string> &dirs, const std::string &model) {
  std::vector<const char *> raw;
  for (const auto &d : dirs) {
    raw.push_back(d.c_str());
  }
  char *table = nullptr;
  Check(fr_compare(raw.data(), raw.size(), model.c_str(), &table));
  StringPtr owned(table);
  std::cout << owned.get();
  return kExitOk;
}

int CmdEval(const ConfigOptions &opts, const std::string &world_path, const std::string &checkpoint) {
  ConfigPtr config = opts.Load();
  WorldPtr world = ObtainWorld(config.get(), world_path);
  char *table = nullptr;
  Check(fr_eval_checkpoint(checkpoint.c_str(), world.get(), &table));
  StringPtr owned(table);
  std::cout << owned.get();
  return kExitOk;
}

int CmdExportWorld(const ConfigOptions &opts, const std::string &out_path) {
  ConfigPtr config = opts.Load();
  WorldPtr world = ObtainWorld(config.get(), "");
  Check(fr_world_save(world.get(), out_path.c_str()), out_path);
  std::cout << "wrote " << out_path << " (" << fr_world_client_count(world.get()) << " clients, hash "
            << WorldHash(world.get()) << ")\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Federated person re-identification simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(fr_version()));

  std::string log_level = "warning";
  const std::map<std::string, fr_log_level> levels = {{"debug", FR_LOG_DEBUG},
                                                      {"info", FR_LOG_INFO},
                                                      {"warning", FR_LOG_WARNING},
                                                      {"error", FR_LOG_ERROR},
                                                      {"off", FR_LOG_OFF}};
  app.add_option("--log-level", log_level, "debug, info, warning, error or off")
      ->check(CLI::IsMember({"debug", "info", "warning", "error", "off"}));

  ConfigOptions run_opts, base_opts, eval_opts, export_opts;
  std::string run_world, run_out, base_world, base_out, eval_world, checkpoint, export_out;
  bool print_config = false;
  std::vector<std::string> compare_dirs;
  std::string compare_model = "local";

  CLI::App *run = app.add_subcommand("run", "Run one federated experiment");
  run_opts.Register(run, true);
  run->add_option("--world,-w", run_world, "Use an exported world instead of generating one");
  run->add_option("--out,-o", run_out, "Output directory (default runs/<strategy>_seed<seed>)");
  run->add_flag("--print-config", print_config, "Print the resolved config and exit");

  CLI::App *compare = app.add_subcommand("compare", "Rank-1 deltas of runs against the first (baseline) run");
  compare->add_option("runs", compare_dirs, "Completed run directories; the first is the baseline")
      ->required()
      ->expected(2, -1);
  compare->add_option("--model,-m", compare_model, "Compare local or global models")
      ->check(CLI::IsMember({"local", "global"}));

  CLI::App *baselines = app.add_subcommand("baselines", "Standalone and centralized reference runs");
  base_opts.Register(baselines, true);
  baselines->add_option("--world,-w", base_world, "Use an exported world instead of generating one");
  baselines->add_option("--out,-o", base_out, "Output directory (default runs/baselines_seed<seed>)");

  CLI::App *eval = app.add_subcommand("eval", "Evaluate a backbone checkpoint on a world");
  eval_opts.Register(eval, false);
  eval->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  eval->add_option("--world,-w", eval_world, "Exported world (generated from the config when omitted)");

  CLI::App *export_world = app.add_subcommand("export-world", "Generate a world and write it as TSV");
  export_opts.Register(export_world, false);
  export_world->add_option("--out,-o", export_out, "Output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  fr_set_log_level(levels.at(log_level));
  try {
    if (run->parsed()) {
      return CmdRun(run_opts, run_world, run_out, print_config);
    }
    if (compare->parsed()) {
      return CmdCompare(compare_dirs, compare_model);
    }
    if (baselines->parsed()) {
      return CmdBaselines(base_opts, base_world, base_out);
    }
    if (eval->parsed()) {
      return CmdEval(eval_opts, eval_world, checkpoint);
    }
    if (export_world->parsed()) {
      return CmdExportWorld(export_opts, export_out);
    }
  } catch (const CallFailed &e) {
    std::cerr << "error: " << e.message << "\n";
    return ExitCodeFor(e.status);
  } catch (const nlohmann::json::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
