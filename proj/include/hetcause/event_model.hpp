#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hetcause/dataset.hpp"
#include "hetcause/error.hpp"

namespace hetcause {

// One unit's binary timeline. Times are integer indices starting at 1; the
// outcome event is stored alongside ordinary events.
struct UnitTimeline {
  std::string unit_id;
  std::map<int, std::set<std::string>> events;
  std::map<std::string, int> unit_covariates;
  std::map<int, std::map<std::string, int>> time_covariates;

  void add(int t, const std::string& event) {
    if (t < 1) throw data_error("timeline " + unit_id + ": time must be >= 1");
    events[t].insert(event);
  }

  bool has(const std::string& event, int t) const {
    auto it = events.find(t);
    return it != events.end() && it->second.count(event) != 0;
  }

  int horizon() const { return events.empty() ? 0 : events.rbegin()->first; }

  std::vector<int> times_of(const std::string& event) const {
    std::vector<int> ts;
    for (const auto& [t, evs] : events)
      if (evs.count(event)) ts.push_back(t);
    return ts;
  }

  std::optional<int> first_time(const std::string& event) const {
    for (const auto& [t, evs] : events)
      if (evs.count(event)) return t;
    return std::nullopt;
  }
};

struct EventLog {
  std::vector<UnitTimeline> units;
  std::vector<std::string> event_vocabulary;
  std::string outcome_event;
};

struct OutcomeLabel {
  std::string unit_id;
  bool y = false;
  std::optional<int> t;       // reference outcome time (first outcome when y = 0)
  std::optional<int> t_next;  // following outcome time, if any
  int tau = 1;
};

// Earliest outcome strictly after t. `t` itself must carry an outcome.
inline std::optional<int> next_outcome_time(const UnitTimeline& tl, int t,
                                            const std::string& outcome_event) {
  if (!tl.has(outcome_event, t))
    throw data_error("invalid reference: unit " + tl.unit_id + " has no outcome at t=" +
                     std::to_string(t));
  for (auto it = tl.events.upper_bound(t); it != tl.events.end(); ++it)
    if (it->second.count(outcome_event)) return it->first;
  return std::nullopt;
}

// y = 1 iff two consecutive outcomes are at most tau apart (inclusive).
inline OutcomeLabel repeated_outcome_label(const UnitTimeline& tl, int tau,
                                           const std::string& outcome_event) {
  if (tau < 1) throw config_error("tau must be a positive integer");
  auto ts = tl.times_of(outcome_event);
  if (ts.empty())
    throw data_error("unit not in population: " + tl.unit_id + " has no outcome");
  OutcomeLabel lab;
  lab.unit_id = tl.unit_id;
  lab.tau = tau;
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    if (ts[i + 1] - ts[i] <= tau) {
      lab.y = true;
      lab.t = ts[i];
      lab.t_next = ts[i + 1];
      return lab;
    }
  }
  lab.t = ts.front();
  if (ts.size() > 1) lab.t_next = ts[1];
  return lab;
}

inline void validate_event_log(const EventLog& log) {
  if (log.units.empty()) throw data_error("event log is empty");
  std::set<std::string> vocab(log.event_vocabulary.begin(), log.event_vocabulary.end());
  if (vocab.count(log.outcome_event))
    throw data_error("outcome event must not be part of the event vocabulary");
  for (const auto& u : log.units) {
    for (const auto& [t, evs] : u.events) {
      if (t < 1) throw data_error("unit " + u.unit_id + ": time index < 1");
      for (const auto& e : evs)
        if (e != log.outcome_event && !vocab.count(e))
          throw data_error("unknown event '" + e + "' in unit " + u.unit_id);
    }
  }
}

// One row per unit. Events are read inside the censoring window: strictly
// before the repeat outcome for y = 1, up to t_first + tau inclusive for y = 0.
// Unit covariates are appended as columns; time covariates contribute their
// last value inside the window (0 when absent). The outcome column is last.
inline BinaryDataset aggregate_bag_of_events(const EventLog& log, int tau) {
  validate_event_log(log);
  std::set<std::string> unit_cov, time_cov;
  for (const auto& u : log.units) {
    for (const auto& [k, v] : u.unit_covariates) unit_cov.insert(k);
    for (const auto& [t, m] : u.time_covariates)
      for (const auto& [k, v] : m) time_cov.insert(k);
  }
  const std::size_t m = log.event_vocabulary.size();
  std::vector<std::string> names = log.event_vocabulary;
  for (const auto& c : unit_cov) names.push_back(c);
  for (const auto& c : time_cov) names.push_back(c);
  names.emplace_back(kOutcomeColumn);

  std::map<std::string, std::size_t> col;
  for (std::size_t j = 0; j < m; ++j) col[log.event_vocabulary[j]] = j;

  std::vector<std::vector<std::uint8_t>> cols(names.size(),
                                              std::vector<std::uint8_t>(log.units.size(), 0));
  auto binary = [](int v, const std::string& what) -> std::uint8_t {
    if (v != 0 && v != 1) throw data_error("covariate '" + what + "' is not binary");
    return static_cast<std::uint8_t>(v);
  };
  for (std::size_t i = 0; i < log.units.size(); ++i) {
    const auto& u = log.units[i];
    const auto lab = repeated_outcome_label(u, tau, log.outcome_event);
    auto inside = [&](int t) {
      return lab.y ? t < *lab.t_next : t <= *lab.t + tau;
    };
    for (const auto& [t, evs] : u.events) {
      if (!inside(t)) continue;
      for (const auto& e : evs)
        if (e != log.outcome_event) cols[col.at(e)][i] = 1;
    }
    std::size_t c = m;
    for (const auto& name : unit_cov) {
      auto it = u.unit_covariates.find(name);
      cols[c++][i] = it == u.unit_covariates.end() ? 0 : binary(it->second, name);
    }
    for (const auto& name : time_cov) {
      std::uint8_t last = 0;
      for (const auto& [t, vals] : u.time_covariates) {
        if (!inside(t)) continue;
        auto it = vals.find(name);
        if (it != vals.end()) last = binary(it->second, name);
      }
      cols[c++][i] = last;
    }
    cols.back()[i] = lab.y ? 1 : 0;
  }
  return BinaryDataset(std::move(names), cols);
}

inline constexpr std::string_view kOovColumn = "OOV";

// Keeps the most frequent event columns and folds the rest into one OOV
// indicator. `protected_columns` (covariates) and Y are never folded.
inline BinaryDataset apply_frequency_vocabulary(const BinaryDataset& data, double keep_fraction,
                                                const std::set<std::string>& protected_columns = {}) {
  if (!(keep_fraction > 0.0) || keep_fraction > 1.0)
    throw config_error("keep_fraction must lie in (0, 1]");
  std::vector<std::size_t> events;
  for (std::size_t c = 0; c < data.cols(); ++c)
    if (data.name(c) != kOutcomeColumn && !protected_columns.count(data.name(c)))
      events.push_back(c);
  if (events.empty()) throw data_error("apply_frequency_vocabulary: no event columns");
  if (data.find(kOovColumn)) throw data_error("dataset already has an OOV column");

  auto keep_n = static_cast<std::size_t>(
      std::ceil(keep_fraction * static_cast<double>(events.size()) - 1e-9));
  keep_n = std::clamp<std::size_t>(keep_n, 1, events.size());

  auto ranked = events;
  std::vector<std::size_t> freq(data.cols());
  for (auto c : events) freq[c] = data.count_ones(c);
  std::sort(ranked.begin(), ranked.end(), [&](std::size_t a, std::size_t b) {
    if (freq[a] != freq[b]) return freq[a] > freq[b];
    return data.name(a) < data.name(b);
  });
  std::set<std::size_t> dropped(ranked.begin() + static_cast<std::ptrdiff_t>(keep_n), ranked.end());

  std::vector<std::uint8_t> oov(data.rows(), 0);
  for (auto c : dropped)
    for (std::size_t r = 0; r < data.rows(); ++r)
      if (data.at(r, c)) oov[r] = 1;

  std::vector<std::string> names;
  std::vector<std::vector<std::uint8_t>> cols;
  bool placed = false;
  for (std::size_t c = 0; c < data.cols(); ++c) {
    if (dropped.count(c)) continue;
    if (data.name(c) == kOutcomeColumn && !placed) {
      names.emplace_back(kOovColumn);
      cols.push_back(oov);
      placed = true;
    }
    names.push_back(data.name(c));
    cols.push_back(data.column(c));
  }
  if (!placed) {
    names.emplace_back(kOovColumn);
    cols.push_back(oov);
  }
  return BinaryDataset(std::move(names), cols);
}

// Event-log CSV with header `unit_id,time,event`. Only units with at least one
// outcome occurrence (the analysis population) are kept; units are ordered by
// id and the vocabulary is the sorted set of non-outcome events.
inline EventLog read_event_log_csv(std::istream& in, const std::string& outcome_event,
                                   std::size_t* dropped_units = nullptr) {
  std::string line;
  if (!std::getline(in, line)) throw data_error("event log csv: empty input");
  auto header = detail::split_csv_line(line);
  if (header != std::vector<std::string>{"unit_id", "time", "event"})
    throw data_error("event log csv: header must be unit_id,time,event");
  std::map<std::string, UnitTimeline> units;
  std::set<std::string> vocab;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto cells = detail::split_csv_line(line);
    if (cells.size() != 3)
      throw data_error("event log csv: bad row on line " + std::to_string(lineno));
    int t = 0;
    try {
      std::size_t pos = 0;
      t = std::stoi(cells[1], &pos);
      if (pos != cells[1].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw data_error("event log csv: bad time on line " + std::to_string(lineno));
    }
    auto& u = units[cells[0]];
    u.unit_id = cells[0];
    u.add(t, cells[2]);
    if (cells[2] != outcome_event) vocab.insert(cells[2]);
  }
  EventLog log;
  log.outcome_event = outcome_event;
  log.event_vocabulary.assign(vocab.begin(), vocab.end());
  std::size_t dropped = 0;
  for (auto& [id, u] : units) {
    if (u.first_time(outcome_event)) log.units.push_back(std::move(u));
    else ++dropped;
  }
  if (dropped_units) *dropped_units = dropped;
  if (log.units.empty()) throw data_error("event log has no unit with an outcome");
  return log;
}

inline EventLog read_event_log_csv(const std::string& path, const std::string& outcome_event) {
  std::ifstream f(path);
  if (!f) throw data_error("cannot open " + path);
  return read_event_log_csv(f, outcome_event);
}

}  // namespace hetcause
