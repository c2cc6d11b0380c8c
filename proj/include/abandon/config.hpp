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

// Run configuration: an INI-style file with one section per stage.

#ifndef ABANDON_CONFIG_HPP_
#define ABANDON_CONFIG_HPP_

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "abandon/error.hpp"
#include "abandon/evaluation.hpp"
#include "abandon/features.hpp"
#include "abandon/interpret.hpp"
#include "abandon/log_ingest.hpp"
#include "abandon/models.hpp"
#include "abandon/preprocess.hpp"
#include "abandon/simgen.hpp"
#include "abandon/text.hpp"

namespace abandon {

struct RunConfig {
  std::uint64_t seed = 42;
  std::vector<int> levels = {1, 2, 3, 4, 5};
  std::string output_dir = "out";
  std::vector<std::string> formats = {"json", "text", "csv"};
  int jobs = 1;

  // Empty records path: simulate the input from [simulate].
  std::string records_path;
  std::string profiles_path;
  RecordFormat record_format = RecordFormat::automatic;
  FeatureOptions features;

  SimConfig simulate = default_paper_shaped_config();
  std::optional<std::uint64_t> simulate_seed;  // unset: use `seed`

  PreprocessConfig preprocess;
  double test_fraction = 0.2;
  bool stratified = false;
  int cv_folds = 10;
  bool tune_threshold = false;
  double threshold = kDefaultThreshold;
  bool baselines = true;
  std::vector<ModelKind> models = {ModelKind::gbdt, ModelKind::random_forest,
                                   ModelKind::logreg_l1};
  TrainConfig gbdt = default_train_config(ModelKind::gbdt);
  TrainConfig rf = default_train_config(ModelKind::random_forest);
  TrainConfig lr = default_train_config(ModelKind::logreg_l1);
  TrainConfig interpret = interpretation_config();

  std::uint64_t effective_simulate_seed() const { return simulate_seed.value_or(seed); }

  bool wants(std::string_view format) const {
    return std::find(formats.begin(), formats.end(), format) != formats.end();
  }

  const TrainConfig& train_config(ModelKind kind) const {
    switch (kind) {
      case ModelKind::gbdt: return gbdt;
      case ModelKind::random_forest: return rf;
      case ModelKind::logreg_l1: return lr;
    }
    return gbdt;
  }

  SimConfig effective_sim_config() const {
    SimConfig s = simulate;
    s.seed = effective_simulate_seed();
    return s;
  }

  EvalConfig eval_config() const {
    EvalConfig e;
    e.features = features;
    e.preprocess = preprocess;
    e.models.clear();
    for (auto kind : models) {
      TrainConfig tc = train_config(kind);
      tc.kind = kind;
      tc.seed = seed;
      e.models.push_back(tc);
    }
    e.include_baselines = baselines;
    e.test_fraction = test_fraction;
    e.stratified = stratified;
    e.cv_folds = cv_folds;
    e.tune_threshold = tune_threshold;
    e.threshold = threshold;
    e.seed = seed;
    return e;
  }

  void validate() const {
    if (levels.empty()) throw Error("no levels requested");
    for (int l : levels)
      if (l < 1) throw Error("levels must be >= 1");
    if (jobs < 1) throw Error("jobs must be >= 1");
    for (const auto& f : formats)
      if (f != "json" && f != "text" && f != "csv") throw Error("unknown format '" + f + "'");
    if (!records_path.empty() && profiles_path.empty())
      throw Error("input.records is set but input.profiles is not");
    if (records_path.empty()) effective_sim_config().validate();
    if (models.empty()) throw Error("no models requested");
    eval_config().validate();
    interpret.validate();
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
      throw Error("test_fraction must lie in (0, 1)");
  }
};

// "1-5", "1,3,4", or a mix like "1-3,5".
inline std::vector<int> parse_levels(std::string_view spec) {
  std::set<int> out;
  for (const auto& part : text::split(spec, ',')) {
    const auto p = text::trim(part);
    if (p.empty()) continue;
    const auto dash = p.find('-');
    if (dash == std::string_view::npos) {
      const auto v = text::parse_int(p);
      if (!v) throw Error("bad level '" + std::string(p) + "'");
      out.insert(static_cast<int>(*v));
    } else {
      const auto a = text::parse_int(text::trim(p.substr(0, dash)));
      const auto b = text::parse_int(text::trim(p.substr(dash + 1)));
      if (!a || !b || *a > *b) throw Error("bad level range '" + std::string(p) + "'");
      for (auto l = *a; l <= *b; ++l) out.insert(static_cast<int>(l));
    }
  }
  if (out.empty()) throw Error("empty level list");
  for (int l : out)
    if (l < 1) throw Error("levels must be >= 1");
  return {out.begin(), out.end()};
}

inline std::string format_levels(const std::vector<int>& levels) {
  std::string out;
  for (std::size_t i = 0; i < levels.size();) {
    std::size_t j = i;
    while (j + 1 < levels.size() && levels[j + 1] == levels[j] + 1) ++j;
    if (!out.empty()) out += ',';
    out += std::to_string(levels[i]);
    if (j > i) out += '-' + std::to_string(levels[j]);
    i = j + 1;
  }
  return out;
}

namespace detail {

inline std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : ",") + p;
  return out;
}

inline std::string join_doubles(std::span<const double> v) {
  std::vector<std::string> parts;
  for (double x : v) parts.push_back(text::format_double(x));
  return join(parts);
}

inline std::string bool_text(bool b) { return b ? "true" : "false"; }

inline std::string weight_text(const std::optional<double>& w) {
  return w ? text::format_double(*w) : "auto";
}

// A section's key/value pairs in output order, with optional comments.
struct IniSection {
  std::string name;
  std::vector<std::tuple<std::string, std::string, std::string>> entries;

  void add(std::string key, std::string value, std::string comment = "") {
    entries.emplace_back(std::move(key), std::move(value), std::move(comment));
  }
};

inline std::string model_list(const std::vector<ModelKind>& kinds) {
  std::vector<std::string> parts;
  for (auto k : kinds) parts.emplace_back(to_string(k));
  return join(parts);
}

inline std::vector<IniSection> config_sections(const RunConfig& c, bool canonical) {
  std::vector<IniSection> s;
  IniSection run{"run", {}};
  run.add("seed", std::to_string(c.seed), "master seed for splits, models, and simulation");
  run.add("levels", format_levels(c.levels), "levels to analyze, e.g. 1-5 or 1,3");
  if (!canonical) {
    run.add("output_dir", c.output_dir, "overridden by --out");
    run.add("jobs", std::to_string(c.jobs), "levels evaluated concurrently; overridden by --jobs");
  }
  run.add("formats", join(c.formats), "any of json,text,csv");
  s.push_back(run);

  IniSection in{"input", {}};
  in.add("records", c.records_path, "empty: simulate input from [simulate]");
  in.add("profiles", c.profiles_path);
  in.add("format", c.record_format == RecordFormat::csv     ? "csv"
                   : c.record_format == RecordFormat::jsonl ? "jsonl"
                                                           : "auto",
         "auto, csv, or jsonl");
  in.add("feature_mode", std::string(to_string(c.features.mode)), "cumulative or extended");
  in.add("exclude_never_attempted", bool_text(c.features.exclude_never_attempted));
  s.push_back(in);

  const auto& sim = c.simulate;
  IniSection si{"simulate", {}};
  si.add("n_learners", std::to_string(sim.n_learners));
  si.add("n_levels", std::to_string(sim.n_levels));
  if (canonical || c.simulate_seed)
    si.add("seed", std::to_string(c.effective_simulate_seed()));
  si.add("activation_rate", text::format_double(sim.activation_rate));
  si.add("first_level_failure", text::format_double(sim.first_level_failure));
  si.add("base_log_odds", join_doubles(sim.base_log_odds), "one per level 1 .. n_levels-1");
  si.add("activated_coef", text::format_double(sim.activated_coefficient));
  si.add("engagement_coef", text::format_double(sim.engagement_coefficient));
  si.add("never_attempt_fraction", text::format_double(sim.never_attempt_fraction));
  for (std::size_t f = 0; f < kNumMeasures; ++f) {
    const std::string m(kMeasureNames[f]);
    si.add(m + "_coef", text::format_double(sim.coefficients[f]));
    si.add(m + "_mu", text::format_double(sim.measures[f].mu));
    si.add(m + "_loading", text::format_double(sim.measures[f].loading));
    if (!is_count_measure(f)) si.add(m + "_noise", text::format_double(sim.measures[f].noise));
    si.add(m + "_missing", text::format_double(sim.missing_rates[f]));
  }
  s.push_back(si);

  IniSection pre{"preprocess", {}};
  pre.add("drop_threshold", text::format_double(c.preprocess.drop_threshold));
  pre.add("knn_k", std::to_string(c.preprocess.knn_k));
  pre.add("normalization_mode", std::string(to_string(c.preprocess.normalization_mode)),
          "train_only or paper_faithful_full_dataset");
  s.push_back(pre);

  IniSection ev{"evaluate", {}};
  ev.add("models", model_list(c.models), "any of gbdt,rf,lr");
  ev.add("baselines", bool_text(c.baselines));
  ev.add("test_fraction", text::format_double(c.test_fraction));
  ev.add("stratified", bool_text(c.stratified));
  ev.add("cv_folds", std::to_string(c.cv_folds));
  ev.add("tune_threshold", bool_text(c.tune_threshold), "F1-tuned threshold from out-of-fold scores");
  ev.add("threshold", text::format_double(c.threshold), "used when tune_threshold is false");
  s.push_back(ev);

  IniSection gb{"gbdt", {}};
  gb.add("n_trees", std::to_string(c.gbdt.n_trees));
  gb.add("max_depth", std::to_string(c.gbdt.max_depth));
  gb.add("min_leaf", std::to_string(c.gbdt.min_leaf));
  gb.add("learning_rate", text::format_double(c.gbdt.learning_rate));
  gb.add("reg_lambda", text::format_double(c.gbdt.reg_lambda));
  gb.add("gamma", text::format_double(c.gbdt.gamma));
  gb.add("positive_weight", weight_text(c.gbdt.positive_weight), "auto = negatives/positives");
  s.push_back(gb);

  IniSection rf{"rf", {}};
  rf.add("n_trees", std::to_string(c.rf.n_trees));
  rf.add("max_depth", std::to_string(c.rf.max_depth));
  rf.add("min_leaf", std::to_string(c.rf.min_leaf));
  rf.add("feature_subset_size", std::to_string(c.rf.feature_subset_size), "0 = ceil(sqrt(d))");
  rf.add("bootstrap", bool_text(c.rf.bootstrap));
  rf.add("positive_weight", weight_text(c.rf.positive_weight));
  s.push_back(rf);

  IniSection lr{"lr", {}};
  lr.add("lambda", text::format_double(c.lr.lambda), "used when lambda_grid is empty");
  lr.add("lambda_grid", join_doubles(c.lr.lambda_grid), "selected by cross-validated logloss");
  lr.add("tolerance", text::format_double(c.lr.tolerance));
  lr.add("max_iterations", std::to_string(c.lr.max_iterations));
  lr.add("positive_weight", weight_text(c.lr.positive_weight));
  s.push_back(lr);

  IniSection ip{"interpret", {}};
  ip.add("lambda", text::format_double(c.interpret.lambda), "odds-ratio regression penalty");
  ip.add("tolerance", text::format_double(c.interpret.tolerance));
  ip.add("max_iterations", std::to_string(c.interpret.max_iterations));
  ip.add("positive_weight", weight_text(c.interpret.positive_weight));
  s.push_back(ip);
  return s;
}

}  // namespace detail

// Full config text. The canonical form omits comments and the keys that do
// not affect results (output_dir, jobs); it is what the manifest hashes.
inline std::string render_config(const RunConfig& c, bool canonical = false) {
  std::ostringstream os;
  bool first = true;
  for (const auto& section : detail::config_sections(c, canonical)) {
    if (!first) os << '\n';
    first = false;
    os << '[' << section.name << "]\n";
    for (const auto& [k, v, comment] : section.entries) {
      if (!canonical && !comment.empty()) os << "; " << comment << '\n';
      os << k << " = " << v << '\n';
    }
  }
  return os.str();
}

namespace detail {

class SectionReader {
 public:
  SectionReader(const boost::property_tree::ptree* tree, std::string name)
      : tree_(tree), name_(std::move(name)) {}

  std::optional<std::string> raw(const std::string& key) {
    used_.insert(key);
    if (tree_ == nullptr) return std::nullopt;
    const auto child = tree_->get_child_optional(boost::property_tree::ptree::path_type(key, '\0'));
    if (!child) return std::nullopt;
    return std::string(text::trim(child->data()));
  }

  void string(const std::string& key, std::string& out) {
    if (auto v = raw(key)) out = *v;
  }

  void number(const std::string& key, double& out) {
    if (auto v = raw(key)) {
      auto d = text::parse_double(*v);
      if (!d) throw bad(key, *v);
      out = *d;
    }
  }

  template <class Int>
  void integer(const std::string& key, Int& out) {
    if (auto v = raw(key)) {
      auto i = text::parse_int(*v);
      if (!i || *i < 0) throw bad(key, *v);
      out = static_cast<Int>(*i);
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (auto v = raw(key)) {
      if (*v == "true") out = true;
      else if (*v == "false") out = false;
      else throw bad(key, *v);
    }
  }

  void doubles(const std::string& key, std::vector<double>& out) {
    if (auto v = raw(key)) {
      out.clear();
      for (const auto& part : text::split(*v, ',')) {
        const auto p = text::trim(part);
        if (p.empty()) continue;
        auto d = text::parse_double(p);
        if (!d) throw bad(key, *v);
        out.push_back(*d);
      }
    }
  }

  void weight(const std::string& key, std::optional<double>& out) {
    if (auto v = raw(key)) {
      if (*v == "auto") {
        out.reset();
      } else {
        auto d = text::parse_double(*v);
        if (!d) throw bad(key, *v);
        out = *d;
      }
    }
  }

  void check_unknown() const {
    if (tree_ == nullptr) return;
    for (const auto& [key, value] : *tree_)
      if (!used_.count(key)) throw Error("unknown key '" + key + "' in [" + name_ + "]");
  }

 private:
  Error bad(const std::string& key, const std::string& value) const {
    return Error("bad value '" + value + "' for " + name_ + "." + key);
  }

  const boost::property_tree::ptree* tree_;
  std::string name_;
  std::set<std::string> used_;
};

inline void read_train(SectionReader& r, TrainConfig& t, bool trees, bool linear) {
  if (trees) {
    r.integer("n_trees", t.n_trees);
    r.integer("max_depth", t.max_depth);
    r.integer("min_leaf", t.min_leaf);
  }
  if (linear) {
    r.number("lambda", t.lambda);
    r.number("tolerance", t.tolerance);
    r.integer("max_iterations", t.max_iterations);
  }
  r.weight("positive_weight", t.positive_weight);
}

}  // namespace detail

// Keys absent from the file keep their defaults; unknown sections or keys are
// errors.
inline RunConfig parse_run_config(std::istream& in) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error("config: " + e.message() + " at line " + std::to_string(e.line()));
  }
  const std::set<std::string> sections = {"run", "input", "simulate", "preprocess",
                                          "evaluate", "gbdt", "rf", "lr", "interpret"};
  for (const auto& [name, child] : tree) {
    if (!sections.count(name)) throw Error("unknown config section [" + name + "]");
  }
  auto section = [&](const std::string& name) {
    const auto child = tree.get_child_optional(name);
    return detail::SectionReader(child ? &*child : nullptr, name);
  };

  RunConfig c;
  {
    auto r = section("run");
    r.integer("seed", c.seed);
    if (auto v = r.raw("levels")) c.levels = parse_levels(*v);
    r.string("output_dir", c.output_dir);
    r.integer("jobs", c.jobs);
    if (auto v = r.raw("formats")) {
      c.formats.clear();
      for (const auto& f : text::split(*v, ','))
        if (!text::trim(f).empty()) c.formats.emplace_back(text::trim(f));
    }
    r.check_unknown();
  }
  {
    auto r = section("input");
    r.string("records", c.records_path);
    r.string("profiles", c.profiles_path);
    if (auto v = r.raw("format")) {
      if (*v == "auto") c.record_format = RecordFormat::automatic;
      else if (*v == "csv") c.record_format = RecordFormat::csv;
      else if (*v == "jsonl") c.record_format = RecordFormat::jsonl;
      else throw Error("bad value '" + *v + "' for input.format");
    }
    if (auto v = r.raw("feature_mode")) {
      if (*v == "cumulative") c.features.mode = FeatureMode::cumulative;
      else if (*v == "extended") c.features.mode = FeatureMode::extended;
      else throw Error("bad value '" + *v + "' for input.feature_mode");
    }
    r.boolean("exclude_never_attempted", c.features.exclude_never_attempted);
    r.check_unknown();
  }
  {
    auto r = section("simulate");
    auto& s = c.simulate;
    r.integer("n_learners", s.n_learners);
    r.integer("n_levels", s.n_levels);
    std::uint64_t seed = 0;
    if (r.raw("seed")) {
      r.integer("seed", seed);
      c.simulate_seed = seed;
    }
    r.number("activation_rate", s.activation_rate);
    r.number("first_level_failure", s.first_level_failure);
    r.doubles("base_log_odds", s.base_log_odds);
    r.number("activated_coef", s.activated_coefficient);
    r.number("engagement_coef", s.engagement_coefficient);
    r.number("never_attempt_fraction", s.never_attempt_fraction);
    for (std::size_t f = 0; f < kNumMeasures; ++f) {
      const std::string m(kMeasureNames[f]);
      r.number(m + "_coef", s.coefficients[f]);
      r.number(m + "_mu", s.measures[f].mu);
      r.number(m + "_loading", s.measures[f].loading);
      if (!is_count_measure(f)) r.number(m + "_noise", s.measures[f].noise);
      r.number(m + "_missing", s.missing_rates[f]);
    }
    r.check_unknown();
  }
  {
    auto r = section("preprocess");
    r.number("drop_threshold", c.preprocess.drop_threshold);
    r.integer("knn_k", c.preprocess.knn_k);
    if (auto v = r.raw("normalization_mode")) {
      if (*v == "train_only") c.preprocess.normalization_mode = NormalizationMode::train_only;
      else if (*v == "paper_faithful_full_dataset")
        c.preprocess.normalization_mode = NormalizationMode::paper_faithful_full_dataset;
      else throw Error("bad value '" + *v + "' for preprocess.normalization_mode");
    }
    r.check_unknown();
  }
  {
    auto r = section("evaluate");
    if (auto v = r.raw("models")) {
      c.models.clear();
      for (const auto& part : text::split(*v, ',')) {
        const auto p = text::trim(part);
        if (p.empty()) continue;
        auto k = model_kind_from_string(p);
        if (!k) throw Error("unknown model '" + std::string(p) + "'");
        c.models.push_back(*k);
      }
    }
    r.boolean("baselines", c.baselines);
    r.number("test_fraction", c.test_fraction);
    r.boolean("stratified", c.stratified);
    r.integer("cv_folds", c.cv_folds);
    r.boolean("tune_threshold", c.tune_threshold);
    r.number("threshold", c.threshold);
    r.check_unknown();
  }
  {
    auto r = section("gbdt");
    detail::read_train(r, c.gbdt, true, false);
    r.number("learning_rate", c.gbdt.learning_rate);
    r.number("reg_lambda", c.gbdt.reg_lambda);
    r.number("gamma", c.gbdt.gamma);
    r.check_unknown();
  }
  {
    auto r = section("rf");
    detail::read_train(r, c.rf, true, false);
    r.integer("feature_subset_size", c.rf.feature_subset_size);
    r.boolean("bootstrap", c.rf.bootstrap);
    r.check_unknown();
  }
  {
    auto r = section("lr");
    detail::read_train(r, c.lr, false, true);
    r.doubles("lambda_grid", c.lr.lambda_grid);
    r.check_unknown();
  }
  {
    auto r = section("interpret");
    detail::read_train(r, c.interpret, false, true);
    r.check_unknown();
  }
  return c;
}

inline RunConfig parse_run_config(const std::string& text_in) {
  std::istringstream is(text_in);
  return parse_run_config(is);
}

}  // namespace abandon

#endif  // ABANDON_CONFIG_HPP_
