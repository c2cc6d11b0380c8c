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

// Per-learner, per-level activity logs: parsing, replay merging, validation.

#ifndef ABANDON_LOG_INGEST_HPP_
#define ABANDON_LOG_INGEST_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "abandon/error.hpp"
#include "abandon/text.hpp"
#include "json.hpp"

namespace abandon {

inline constexpr std::size_t kNumMeasures = 11;

// Per-level activity measures, in record-file column order. Durations are
// seconds; the last four are click counts.
inline constexpr std::array<std::string_view, kNumMeasures> kMeasureNames = {
    "total_dur", "idle_time",  "code_time", "test_time",
    "help_time", "mission_time", "world_time", "n_restart",
    "n_step",    "n_line",      "n_play"};

inline constexpr std::size_t kFirstCountMeasure = 7;

inline bool is_count_measure(std::size_t m) { return m >= kFirstCountMeasure; }

inline std::optional<std::size_t> measure_index(std::string_view name) {
  for (std::size_t i = 0; i < kNumMeasures; ++i)
    if (kMeasureNames[i] == name) return i;
  return std::nullopt;
}

struct LevelPlayRecord {
  std::string learner_id;
  int level = 1;
  bool completed = false;
  std::array<std::optional<double>, kNumMeasures> measures{};

  friend bool operator==(const LevelPlayRecord&, const LevelPlayRecord&) = default;
};

struct LearnerProfile {
  std::string learner_id;
  int activated = 0;

  friend bool operator==(const LearnerProfile&, const LearnerProfile&) = default;
};

namespace detail {

// Total order over records used to canonicalize replays before merging, so
// that the merged sums do not depend on input line order.
inline bool record_less(const LevelPlayRecord& a, const LevelPlayRecord& b) {
  if (a.learner_id != b.learner_id) return a.learner_id < b.learner_id;
  if (a.level != b.level) return a.level < b.level;
  if (a.completed != b.completed) return a.completed < b.completed;
  for (std::size_t m = 0; m < kNumMeasures; ++m) {
    const auto& x = a.measures[m];
    const auto& y = b.measures[m];
    if (x.has_value() != y.has_value()) return !x.has_value();
    if (x && *x != *y) return *x < *y;
  }
  return false;
}

// Replays of one level: durations and counts add, completion ORs, and a
// missing constituent leaves the merged value missing.
inline void merge_replay(LevelPlayRecord& into, const LevelPlayRecord& replay) {
  into.completed = into.completed || replay.completed;
  for (std::size_t m = 0; m < kNumMeasures; ++m) {
    if (into.measures[m] && replay.measures[m]) {
      *into.measures[m] += *replay.measures[m];
    } else {
      into.measures[m].reset();
    }
  }
}

}  // namespace detail

// Canonical in-memory log: one record per (learner_id, level), records sorted
// by (learner_id, level), profiles sorted by learner_id. Immutable after
// construction.
class GameLog {
 public:
  GameLog() = default;

  GameLog(std::vector<LevelPlayRecord> records, std::vector<LearnerProfile> profiles)
      : profiles_(std::move(profiles)) {
    std::sort(records.begin(), records.end(), detail::record_less);
    for (auto& r : records) {
      if (!records_.empty() && records_.back().learner_id == r.learner_id &&
          records_.back().level == r.level) {
        detail::merge_replay(records_.back(), r);
      } else {
        records_.push_back(std::move(r));
      }
    }
    std::stable_sort(profiles_.begin(), profiles_.end(),
                     [](const auto& a, const auto& b) {
                       if (a.learner_id != b.learner_id) return a.learner_id < b.learner_id;
                       return a.activated < b.activated;
                     });
  }

  const std::vector<LevelPlayRecord>& records() const { return records_; }
  const std::vector<LearnerProfile>& profiles() const { return profiles_; }

  // Records of one learner in ascending level order.
  std::span<const LevelPlayRecord> records_for(std::string_view learner_id) const {
    auto lo = std::lower_bound(records_.begin(), records_.end(), learner_id,
                               [](const LevelPlayRecord& r, std::string_view id) {
                                 return r.learner_id < id;
                               });
    auto hi = std::upper_bound(lo, records_.end(), learner_id,
                               [](std::string_view id, const LevelPlayRecord& r) {
                                 return id < r.learner_id;
                               });
    return {lo, hi};
  }

  const LevelPlayRecord* find(std::string_view learner_id, int level) const {
    for (const auto& r : records_for(learner_id))
      if (r.level == level) return &r;
    return nullptr;
  }

  const LearnerProfile* profile(std::string_view learner_id) const {
    auto it = std::lower_bound(profiles_.begin(), profiles_.end(), learner_id,
                               [](const LearnerProfile& p, std::string_view id) {
                                 return p.learner_id < id;
                               });
    if (it == profiles_.end() || it->learner_id != learner_id) return nullptr;
    return &*it;
  }

  bool has_learner(std::string_view learner_id) const {
    return !records_for(learner_id).empty() || profile(learner_id) != nullptr;
  }

  friend bool operator==(const GameLog&, const GameLog&) = default;

 private:
  std::vector<LevelPlayRecord> records_;
  std::vector<LearnerProfile> profiles_;
};

enum class RecordFormat { automatic, csv, jsonl };

namespace detail {

inline RecordFormat sniff_format(std::istream& in) {
  while (true) {
    const int c = in.peek();
    if (c == std::char_traits<char>::eof()) return RecordFormat::csv;
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      in.get();
      continue;
    }
    return c == '{' ? RecordFormat::jsonl : RecordFormat::csv;
  }
}

inline bool blank(std::string_view line) { return text::trim(line).empty(); }

inline double parse_measure_cell(std::size_t line, std::string_view name,
                                 std::string_view cell) {
  auto v = text::parse_double(cell);
  if (!v || !std::isfinite(*v))
    throw ParseError(line, "field '" + std::string(name) + "' is not a number: '" +
                               std::string(cell) + "'");
  return *v;
}

inline int parse_level_cell(std::size_t line, std::string_view cell) {
  auto v = text::parse_int(cell);
  if (!v) throw ParseError(line, "field 'level' is not an integer: '" + std::string(cell) + "'");
  if (*v < std::numeric_limits<int>::min() || *v > std::numeric_limits<int>::max())
    throw ParseError(line, "field 'level' out of integer range");
  return static_cast<int>(*v);
}

inline bool parse_completed_cell(std::size_t line, std::string_view cell) {
  cell = text::trim(cell);
  if (cell == "1" || cell == "true") return true;
  if (cell == "0" || cell == "false") return false;
  throw ParseError(line, "field 'completed' must be 0 or 1, got '" + std::string(cell) + "'");
}

inline std::vector<LevelPlayRecord> parse_records_csv(std::istream& in) {
  std::vector<LevelPlayRecord> out;
  std::string line;
  std::size_t lineno = 0;
  // Column index -> field; -1 learner_id, -2 level, -3 completed, >= 0 measure.
  std::vector<int> columns;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    auto cells = text::split_csv_line(line);
    if (!cells) throw ParseError(lineno, "unterminated quoted field");
    if (!have_header) {
      bool seen_id = false, seen_level = false, seen_completed = false;
      std::vector<bool> seen_measure(kNumMeasures, false);
      for (const auto& raw : *cells) {
        const auto name = text::trim(raw);
        if (name == "learner_id") {
          if (seen_id) throw ParseError(lineno, "duplicate field 'learner_id'");
          seen_id = true;
          columns.push_back(-1);
        } else if (name == "level") {
          if (seen_level) throw ParseError(lineno, "duplicate field 'level'");
          seen_level = true;
          columns.push_back(-2);
        } else if (name == "completed") {
          if (seen_completed) throw ParseError(lineno, "duplicate field 'completed'");
          seen_completed = true;
          columns.push_back(-3);
        } else if (auto m = measure_index(name)) {
          if (seen_measure[*m])
            throw ParseError(lineno, "duplicate field '" + std::string(name) + "'");
          seen_measure[*m] = true;
          columns.push_back(static_cast<int>(*m));
        } else {
          throw ParseError(lineno, "unknown field '" + std::string(name) + "'");
        }
      }
      if (!seen_id) throw ParseError(lineno, "missing field 'learner_id'");
      if (!seen_level) throw ParseError(lineno, "missing field 'level'");
      if (!seen_completed) throw ParseError(lineno, "missing field 'completed'");
      have_header = true;
      continue;
    }
    if (cells->size() != columns.size())
      throw ParseError(lineno, "expected " + std::to_string(columns.size()) +
                                   " fields, got " + std::to_string(cells->size()));
    LevelPlayRecord rec;
    for (std::size_t i = 0; i < columns.size(); ++i) {
      const std::string_view cell = (*cells)[i];
      switch (columns[i]) {
        case -1:
          rec.learner_id = std::string(text::trim(cell));
          if (rec.learner_id.empty()) throw ParseError(lineno, "missing learner_id");
          break;
        case -2:
          if (text::trim(cell).empty()) throw ParseError(lineno, "missing level");
          rec.level = parse_level_cell(lineno, cell);
          break;
        case -3:
          rec.completed = parse_completed_cell(lineno, cell);
          break;
        default: {
          const auto m = static_cast<std::size_t>(columns[i]);
          if (!text::trim(cell).empty())
            rec.measures[m] = parse_measure_cell(lineno, kMeasureNames[m], cell);
        }
      }
    }
    out.push_back(std::move(rec));
  }
  return out;
}

inline std::vector<LevelPlayRecord> parse_records_jsonl(std::istream& in) {
  std::vector<LevelPlayRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(lineno, std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError(lineno, "expected a JSON object");
    LevelPlayRecord rec;
    bool seen_id = false, seen_level = false;
    for (const auto& [key, value] : j.items()) {
      if (key == "learner_id") {
        if (!value.is_string()) throw ParseError(lineno, "learner_id must be a string");
        rec.learner_id = value.get<std::string>();
        seen_id = !rec.learner_id.empty();
      } else if (key == "level") {
        if (!value.is_number_integer()) throw ParseError(lineno, "level must be an integer");
        rec.level = value.get<int>();
        seen_level = true;
      } else if (key == "completed") {
        if (value.is_boolean()) {
          rec.completed = value.get<bool>();
        } else if (value.is_number_integer() && (value == 0 || value == 1)) {
          rec.completed = value.get<int>() == 1;
        } else {
          throw ParseError(lineno, "field 'completed' must be 0 or 1");
        }
      } else if (auto m = measure_index(key)) {
        if (value.is_null()) continue;
        if (!value.is_number())
          throw ParseError(lineno, "field '" + key + "' is not a number");
        rec.measures[*m] = value.get<double>();
      } else {
        throw ParseError(lineno, "unknown field '" + key + "'");
      }
    }
    if (!seen_id) throw ParseError(lineno, "missing learner_id");
    if (!seen_level) throw ParseError(lineno, "missing level");
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace detail

inline std::vector<LevelPlayRecord> parse_records(std::istream& in,
                                                  RecordFormat format = RecordFormat::automatic) {
  if (format == RecordFormat::automatic) format = detail::sniff_format(in);
  return format == RecordFormat::jsonl ? detail::parse_records_jsonl(in)
                                       : detail::parse_records_csv(in);
}

inline std::vector<LearnerProfile> parse_profiles(std::istream& in) {
  std::vector<LearnerProfile> out;
  std::string line;
  std::size_t lineno = 0;
  int id_col = -1, act_col = -1;
  std::size_t n_cols = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::blank(line)) continue;
    auto cells = text::split_csv_line(line);
    if (!cells) throw ParseError(lineno, "unterminated quoted field");
    if (!have_header) {
      for (std::size_t i = 0; i < cells->size(); ++i) {
        const auto name = text::trim((*cells)[i]);
        if (name == "learner_id" && id_col < 0) {
          id_col = static_cast<int>(i);
        } else if (name == "activated" && act_col < 0) {
          act_col = static_cast<int>(i);
        } else {
          throw ParseError(lineno, "unknown field '" + std::string(name) + "'");
        }
      }
      if (id_col < 0) throw ParseError(lineno, "missing field 'learner_id'");
      if (act_col < 0) throw ParseError(lineno, "missing field 'activated'");
      n_cols = cells->size();
      have_header = true;
      continue;
    }
    if (cells->size() != n_cols)
      throw ParseError(lineno, "expected " + std::to_string(n_cols) + " fields, got " +
                                   std::to_string(cells->size()));
    LearnerProfile p;
    p.learner_id = std::string(text::trim((*cells)[id_col]));
    if (p.learner_id.empty()) throw ParseError(lineno, "missing learner_id");
    auto act = text::parse_int((*cells)[act_col]);
    if (!act) throw ParseError(lineno, "field 'activated' is not an integer");
    if (*act < std::numeric_limits<int>::min() || *act > std::numeric_limits<int>::max())
      throw ParseError(lineno, "field 'activated' out of range");
    p.activated = static_cast<int>(*act);
    out.push_back(std::move(p));
  }
  return out;
}

// Reads a record stream (CSV or JSON lines) and a profile CSV stream into a
// merged GameLog.
inline GameLog parse_log(std::istream& records, std::istream& profiles,
                         RecordFormat format = RecordFormat::automatic) {
  return GameLog(parse_records(records, format), parse_profiles(profiles));
}

inline constexpr std::string_view kRecordCsvHeader =
    "learner_id,level,completed,total_dur,idle_time,code_time,test_time,help_time,"
    "mission_time,world_time,n_restart,n_step,n_line,n_play";

inline void write_records_csv(std::ostream& os, const GameLog& log) {
  os << kRecordCsvHeader << '\n';
  for (const auto& r : log.records()) {
    os << text::csv_escape(r.learner_id) << ',' << r.level << ',' << (r.completed ? 1 : 0);
    for (const auto& m : r.measures) {
      os << ',';
      if (m) os << text::format_double(*m);
    }
    os << '\n';
  }
}

inline void write_records_jsonl(std::ostream& os, const GameLog& log) {
  for (const auto& r : log.records()) {
    nlohmann::ordered_json j;
    j["learner_id"] = r.learner_id;
    j["level"] = r.level;
    j["completed"] = r.completed ? 1 : 0;
    for (std::size_t m = 0; m < kNumMeasures; ++m) {
      if (r.measures[m]) {
        j[std::string(kMeasureNames[m])] = *r.measures[m];
      } else {
        j[std::string(kMeasureNames[m])] = nullptr;
      }
    }
    os << j.dump() << '\n';
  }
}

inline void write_profiles_csv(std::ostream& os, const GameLog& log) {
  os << "learner_id,activated\n";
  for (const auto& p : log.profiles())
    os << text::csv_escape(p.learner_id) << ',' << p.activated << '\n';
}

// The learner's maximum level over all records; replays of earlier levels do
// not lower it.
inline int highest_level(const GameLog& log, std::string_view learner_id) {
  auto recs = log.records_for(learner_id);
  if (recs.empty()) throw Error("unknown learner '" + std::string(learner_id) + "'");
  return recs.back().level;
}

enum class IssueKind {
  level_out_of_range,
  negative_value,
  non_finite_value,
  orphan_record,
  duplicate_profile,
  invalid_activated,
  non_integer_count,
  learner_without_records,
};

inline std::string_view to_string(IssueKind k) {
  switch (k) {
    case IssueKind::level_out_of_range: return "level out of range";
    case IssueKind::negative_value: return "negative value";
    case IssueKind::non_finite_value: return "non-finite value";
    case IssueKind::orphan_record: return "orphan record";
    case IssueKind::duplicate_profile: return "duplicate profile";
    case IssueKind::invalid_activated: return "invalid activated";
    case IssueKind::non_integer_count: return "non-integer count";
    case IssueKind::learner_without_records: return "learner without records";
  }
  return "unknown";
}

struct Issue {
  std::string locator;  // "learner_id@level" for records, "learner_id" for profiles
  IssueKind kind;
  std::string message;
};

struct ValidationReport {
  std::vector<Issue> errors;
  std::vector<Issue> warnings;
  std::map<std::string, std::size_t> counts;

  bool ok() const { return errors.empty(); }

  std::size_t count(IssueKind k) const {
    auto it = counts.find(std::string(to_string(k)));
    return it == counts.end() ? 0 : it->second;
  }
};

struct ValidateOptions {
  int max_level = 100;
};

inline ValidationReport validate(const GameLog& log, const ValidateOptions& options = {}) {
  ValidationReport report;
  auto add = [&](std::vector<Issue>& into, std::string locator, IssueKind kind,
                 std::string message) {
    ++report.counts[std::string(to_string(kind))];
    into.push_back({std::move(locator), kind, std::move(message)});
  };

  for (const auto& r : log.records()) {
    const std::string loc = r.learner_id + "@" + std::to_string(r.level);
    if (r.level < 1 || r.level > options.max_level)
      add(report.errors, loc, IssueKind::level_out_of_range,
          "level " + std::to_string(r.level) + " outside [1, " +
              std::to_string(options.max_level) + "]");
    for (std::size_t m = 0; m < kNumMeasures; ++m) {
      if (!r.measures[m]) continue;
      const double v = *r.measures[m];
      const std::string name(kMeasureNames[m]);
      if (!std::isfinite(v)) {
        add(report.errors, loc, IssueKind::non_finite_value, name + " is not finite");
      } else if (v < 0) {
        add(report.errors, loc, IssueKind::negative_value,
            name + " = " + text::format_double(v));
      } else if (is_count_measure(m) && v != std::floor(v)) {
        add(report.warnings, loc, IssueKind::non_integer_count,
            name + " = " + text::format_double(v));
      }
    }
    if (log.profile(r.learner_id) == nullptr)
      add(report.errors, loc, IssueKind::orphan_record, "no profile for learner");
  }

  const auto& profiles = log.profiles();
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    const auto& p = profiles[i];
    if (i > 0 && profiles[i - 1].learner_id == p.learner_id) {
      add(report.errors, p.learner_id, IssueKind::duplicate_profile, "profile listed twice");
      continue;
    }
    if (p.activated != 0 && p.activated != 1)
      add(report.errors, p.learner_id, IssueKind::invalid_activated,
          "activated = " + std::to_string(p.activated));
    if (log.records_for(p.learner_id).empty())
      add(report.warnings, p.learner_id, IssueKind::learner_without_records,
          "profile has no level records");
  }
  return report;
}

}  // namespace abandon

#endif  // ABANDON_LOG_INGEST_HPP_
