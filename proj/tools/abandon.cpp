/*
 * Copyright 2026 The Abandon Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "abandon/config.hpp"
#include "abandon/error.hpp"
#include "abandon/pipeline.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string levels;
  std::optional<int> jobs;
  std::string format;
};

abandon::RunConfig load_config(const CommonFlags& flags) {
  abandon::RunConfig config;
  if (!flags.config.empty()) {
    std::ifstream is(flags.config);
    if (!is) throw abandon::Error("cannot read config " + flags.config);
    config = abandon::parse_run_config(is);
  }
  if (flags.seed) config.seed = *flags.seed;
  if (!flags.levels.empty()) config.levels = abandon::parse_levels(flags.levels);
  if (flags.jobs) config.jobs = *flags.jobs;
  if (!flags.out.empty()) config.output_dir = flags.out;
  if (!flags.format.empty()) config.formats = {flags.format};
  return config;
}

void add_common(CLI::App* cmd, CommonFlags& flags, bool run_flags) {
  cmd->add_option("--config", flags.config, "Config file (INI sections; see print-default-config)");
  cmd->add_option("--out", flags.out, "Output directory");
  cmd->add_option("--seed", flags.seed, "Override [run] seed");
  if (run_flags) {
    cmd->add_option("--levels", flags.levels, "Levels, e.g. 1-5 or 1,3");
    cmd->add_option("--jobs", flags.jobs, "Levels evaluated concurrently")
        ->check(CLI::PositiveNumber);
  }
  cmd->add_option("--format", flags.format, "Restrict outputs to one format")
      ->check(CLI::IsMember({"json", "text", "csv"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Level-abandonment prediction pipeline"};
  app.require_subcommand(0, 1);
  bool print_default = false;
  app.add_flag("--print-default-config", print_default, "Print the default config and exit");

  CommonFlags sim_flags, run_flags, explain_flags;
  auto* simulate = app.add_subcommand("simulate", "Write a synthetic game log");
  add_common(simulate, sim_flags, false);

  auto* run = app.add_subcommand("run", "Evaluate models per level and write reports");
  add_common(run, run_flags, true);

  std::string model_path, matrix_path;
  auto* explain = app.add_subcommand("explain", "Importance and odds ratios for a saved model");
  add_common(explain, explain_flags, true);
  explain->add_option("--model", model_path, "Serialized model JSON")->required();
  explain->add_option("--matrix", matrix_path, "Matrix CSV (learner_id,label,features...)")
      ->required();

  auto* print = app.add_subcommand("print-default-config", "Print the default config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (print_default || print->parsed()) {
      std::cout << abandon::render_config(abandon::RunConfig{});
      return 0;
    }
    if (simulate->parsed()) {
      const auto config = load_config(sim_flags);
      abandon::cmd_simulate(config, config.output_dir);
      return 0;
    }
    if (run->parsed()) {
      abandon::cmd_run(load_config(run_flags));
      return 0;
    }
    if (explain->parsed()) {
      const auto config = load_config(explain_flags);
      const int level = explain_flags.levels.empty() ? 0 : config.levels.front();
      abandon::cmd_explain(model_path, matrix_path, config.output_dir, config, level);
      return 0;
    }
    std::cerr << app.help();
    return 2;
  } catch (const abandon::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
}
