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

// Command implementations shared by the CLI and the tests.

#ifndef ABANDON_PIPELINE_HPP_
#define ABANDON_PIPELINE_HPP_

#include <openssl/evp.h>

#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "abandon/config.hpp"
#include "abandon/error.hpp"
#include "abandon/evaluation.hpp"
#include "abandon/features.hpp"
#include "abandon/interpret.hpp"
#include "abandon/log_ingest.hpp"
#include "abandon/models.hpp"
#include "abandon/preprocess.hpp"
#include "abandon/simgen.hpp"
#include "json.hpp"

namespace abandon {

inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 15];
  }
  return out;
}

// Writes files under a root directory, each via a temporary file and a
// rename, and remembers their checksums.
class OutputTree {
 public:
  explicit OutputTree(std::filesystem::path root) : root_(std::move(root)) {}

  void write(const std::string& relative, const std::string& content) {
    const auto path = root_ / relative;
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw Error("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    auto tmp = path;
    tmp += ".tmp";
    {
      std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
      if (!os) throw Error("cannot write " + path.string());
      os << content;
      os.close();
      if (!os) throw Error("cannot write " + path.string());
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error("cannot write " + path.string() + ": " + ec.message());
    checksums_[relative] = sha256_hex(content);
  }

  void write_json(const std::string& relative, const nlohmann::ordered_json& j) {
    write(relative, j.dump(2) + "\n");
  }

  const std::map<std::string, std::string>& checksums() const { return checksums_; }
  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
  std::map<std::string, std::string> checksums_;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

inline nlohmann::ordered_json manifest_json(const RunConfig& config, std::string_view status,
                                            const nlohmann::ordered_json& errors,
                                            const std::map<std::string, std::string>& files) {
  nlohmann::ordered_json m;
  m["config_sha256"] = sha256_hex(render_config(config, true));
  m["seed"] = config.seed;
  m["status"] = status;
  m["levels"] = config.levels;
  m["errors"] = errors;
  nlohmann::ordered_json f = nlohmann::ordered_json::object();
  for (const auto& [name, sum] : files) f[name] = sum;
  m["files"] = std::move(f);
  return m;
}

// Writes records.csv, profiles.csv, truth.json, and manifest.json.
inline void cmd_simulate(const RunConfig& config, const std::filesystem::path& out_dir) {
  const SimConfig sim = config.effective_sim_config();
  sim.validate();
  const auto result = generate(sim);
  OutputTree out(out_dir);
  std::ostringstream records, profiles;
  write_records_csv(records, result.log);
  write_profiles_csv(profiles, result.log);
  out.write("records.csv", records.str());
  out.write("profiles.csv", profiles.str());
  out.write_json("truth.json", truth_to_json(result.truth));
  out.write_json("manifest.json",
                 manifest_json(config, "complete", nlohmann::ordered_json::array(), out.checksums()));
}

inline GameLog load_input(const RunConfig& config) {
  if (config.records_path.empty()) return generate(config.effective_sim_config()).log;
  std::ifstream records(config.records_path, std::ios::binary);
  if (!records) throw Error("cannot read " + config.records_path);
  std::ifstream profiles(config.profiles_path, std::ios::binary);
  if (!profiles) throw Error("cannot read " + config.profiles_path);
  return parse_log(records, profiles, config.record_format);
}

struct LevelOutcome {
  LevelResult result;
  OddsRatioTable odds;
  std::optional<ImportanceReport> importance;
};

inline LevelOutcome analyze_level(const GameLog& log, int level, const RunConfig& config) {
  const EvalConfig eval = config.eval_config();
  LevelOutcome out;
  out.result = run_level(assemble_matrix(log, level, config.features), eval);
  const auto& train = out.result.data.train;
  out.odds = odds_ratios(train.values, train.labels, train.feature_names, config.interpret, level);
  if (const auto* g = out.result.find("gbdt")) {
    out.importance = gain_importance(g->model, level);
    attach_correlation(*out.importance, train.values);
  }
  return out;
}

namespace detail {

inline void write_level(OutputTree& out, const RunConfig& config, const LevelOutcome& o) {
  const auto& r = o.result;
  const std::string dir = "level_" + std::to_string(r.level) + "/";
  const auto reports = r.reports();
  if (config.wants("json")) out.write_json(dir + "report.json", reports_to_json(reports));
  if (config.wants("text")) out.write(dir + "report.txt", reports_to_text(reports));
  if (config.wants("csv")) {
    std::ostringstream roc;
    bool header = true;
    for (const auto& m : r.models) {
      write_roc_csv(roc, r.level, m.name, roc_curve(r.data.test.labels, m.test_scores), header);
      header = false;
    }
    out.write(dir + "roc.csv", roc.str());
  }
  for (const auto& m : r.models)
    out.write_json(dir + "model_" + m.name + ".json", model_to_json(m.model, m.config));
  out.write_json(dir + "normalization.json", normalization_stats_to_json(r.data.stats));
  std::ostringstream matrix;
  write_matrix_csv(matrix, r.data.train);
  out.write(dir + "train_matrix.csv", matrix.str());
  if (o.importance) {
    if (config.wants("csv")) {
      std::ostringstream imp;
      write_importance_csv(imp, *o.importance);
      out.write(dir + "importance.csv", imp.str());
    }
    if (config.wants("json")) out.write_json(dir + "importance.json", importance_to_json(*o.importance));
  }
  nlohmann::ordered_json warnings = r.data.warnings;
  for (const auto& w : o.odds.warnings) warnings.push_back("odds ratios: " + w);
  for (const auto& m : r.models)
    if (const auto* l = std::get_if<LinearModel>(&m.model))
      for (const auto& w : l->info.warnings) warnings.push_back(m.name + ": " + w);
  out.write_json(dir + "warnings.json", warnings);
}

}  // namespace detail

struct RunOutcome {
  bool complete = true;
  std::vector<std::pair<int, std::string>> errors;
  std::exception_ptr first_error;
};

// Evaluates every configured level (up to config.jobs at once) and writes
// reports, models, interpretation files, and a manifest. Output bytes do not
// depend on the job count. If any level fails, the remaining outputs are
// still written, the manifest is marked partial, and the first failure (in
// level order) is rethrown.
inline RunOutcome cmd_run(const RunConfig& config) {
  config.validate();
  OutputTree out(config.output_dir);
  const GameLog log = load_input(config);
  const auto report = validate(log);
  if (!report.ok()) {
    std::string msg = "input validation failed:";
    for (std::size_t i = 0; i < std::min<std::size_t>(report.errors.size(), 5); ++i)
      msg += "\n  " + report.errors[i].locator + ": " + report.errors[i].message;
    throw Error(msg);
  }

  const std::size_t n = config.levels.size();
  std::vector<std::optional<LevelOutcome>> outcomes(n);
  std::vector<std::exception_ptr> failures(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        outcomes[i] = analyze_level(log, config.levels[i], config);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  const auto jobs = std::min<std::size_t>(static_cast<std::size_t>(config.jobs), n);
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < jobs; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  RunOutcome run;
  nlohmann::ordered_json errors = nlohmann::ordered_json::array();
  std::vector<EvaluationReport> all_reports;
  std::vector<OddsRatioTable> odds;
  for (std::size_t i = 0; i < n; ++i) {
    if (failures[i]) {
      std::string msg;
      try {
        std::rethrow_exception(failures[i]);
      } catch (const std::exception& e) {
        msg = e.what();
      }
      run.complete = false;
      run.errors.emplace_back(config.levels[i], msg);
      if (!run.first_error) run.first_error = failures[i];
      errors.push_back({{"level", config.levels[i]}, {"message", msg}});
      continue;
    }
    detail::write_level(out, config, *outcomes[i]);
    const auto reports = outcomes[i]->result.reports();
    all_reports.insert(all_reports.end(), reports.begin(), reports.end());
    odds.push_back(outcomes[i]->odds);
  }

  if (!all_reports.empty()) {
    if (config.wants("json")) out.write_json("reports.json", reports_to_json(all_reports));
    if (config.wants("text")) out.write("reports.txt", reports_to_text(all_reports));
  }
  if (!odds.empty()) {
    if (config.wants("csv")) {
      std::ostringstream os;
      write_odds_ratio_csv(os, odds);
      out.write("odds_ratios.csv", os.str());
    }
    if (config.wants("json")) out.write_json("odds_ratios.json", odds_ratios_to_json(odds));
  }
  if (odds.size() >= 2) {
    std::ostringstream os;
    write_consistency_csv(os, consistency_table(odds));
    out.write("consistency.csv", os.str());
  }
  out.write_json("manifest.json", manifest_json(config, run.complete ? "complete" : "partial",
                                                errors, out.checksums()));
  if (run.first_error) std::rethrow_exception(run.first_error);
  return run;
}

// Importance (GBDT models) and odds ratios for a serialized model and a
// matrix CSV whose columns match the model's feature order.
inline void cmd_explain(const std::filesystem::path& model_path,
                        const std::filesystem::path& matrix_path,
                        const std::filesystem::path& out_dir, const RunConfig& config,
                        int level = 0) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(model_path));
  } catch (const nlohmann::json::exception& e) {
    throw Error("cannot parse model " + model_path.string() + ": " + e.what());
  }
  ModelEnvelope env;
  try {
    env = model_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed model " + model_path.string() + ": " + e.what());
  }
  std::ifstream is(matrix_path, std::ios::binary);
  if (!is) throw Error("cannot read " + matrix_path.string());
  const auto matrix = read_matrix_csv(is, level);
  if (matrix.feature_names != model_features(env.model))
    throw Error("model/matrix feature mismatch");
  for (double v : matrix.values.data())
    if (!std::isfinite(v)) throw Error("matrix must be complete and numeric");

  OutputTree out(out_dir);
  if (!std::holds_alternative<LinearModel>(env.model)) {
    auto imp = gain_importance(env.model, level);
    attach_correlation(imp, matrix.values);
    std::ostringstream os;
    write_importance_csv(os, imp);
    out.write("importance.csv", os.str());
    if (config.wants("json")) out.write_json("importance.json", importance_to_json(imp));
  }
  const std::vector<OddsRatioTable> odds = {
      odds_ratios(matrix.values, matrix.labels, matrix.feature_names, config.interpret, level)};
  std::ostringstream os;
  write_odds_ratio_csv(os, odds);
  out.write("odds_ratios.csv", os.str());
  if (config.wants("json")) out.write_json("odds_ratios.json", odds_ratios_to_json(odds));
}

}  // namespace abandon

#endif  // ABANDON_PIPELINE_HPP_
