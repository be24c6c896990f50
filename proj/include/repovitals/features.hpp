#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "repovitals/csv.hpp"
#include "repovitals/error.hpp"
#include "repovitals/snapshot.hpp"
#include "repovitals/time.hpp"

namespace repovitals {

// ---------------------------------------------------------------------------
// Windowed temporal features: a snapshot is summarized over the last n months
// (counting back from an anchor) in intervals of m months, producing one data
// point per feature per interval.
// ---------------------------------------------------------------------------

struct Scenario {
  int length_months = 24;    // n
  int interval_months = 3;   // m

  int interval_count() const { return length_months / interval_months; }

  bool operator==(const Scenario&) const = default;
};

inline Scenario make_scenario(int n, int m) {
  if (n <= 0 || m <= 0 || n % m != 0)
    throw Error(Errc::invalid_config,
                "scenario (" + std::to_string(n) + "," + std::to_string(m) +
                    "): interval length must divide window length");
  return Scenario{n, m};
}

// The ten standard (length, interval) combinations, in canonical order.
inline const std::array<Scenario, 10>& standard_scenarios() {
  static const std::array<Scenario, 10> s = {{{6, 3},
                                              {6, 6},
                                              {12, 3},
                                              {12, 6},
                                              {12, 12},
                                              {18, 3},
                                              {18, 6},
                                              {24, 3},
                                              {24, 6},
                                              {24, 12}}};
  return s;
}

struct Interval {
  int index = 1;        // 1-based; interval 1 is the oldest
  int start_month = 1;  // a
  int end_month = 1;    // b = a + m - 1
  UnixTime start_ts = 0;
  UnixTime end_ts = 0;  // exclusive; the last interval ends at the anchor

  // Period tag, e.g. "T22_24" for months 22..24 of a 24-month window.
  std::string tag() const {
    return "T" + std::to_string(start_month) + "_" + std::to_string(end_month);
  }
};

// Tiles [anchor - n months, anchor) into k = n/m half-open intervals, oldest
// first. A month is a fixed 30-day block.
inline std::vector<Interval> make_intervals(UnixTime anchor, Scenario sc) {
  const int k = sc.interval_count();
  std::vector<Interval> out;
  out.reserve(k);
  for (int i = 1; i <= k; ++i) {
    Interval iv;
    iv.index = i;
    iv.start_month = (i - 1) * sc.interval_months + 1;
    iv.end_month = i * sc.interval_months;
    iv.start_ts = anchor - static_cast<std::int64_t>(sc.length_months -
                                                     (i - 1) * sc.interval_months) *
                               kSecondsPerMonth;
    iv.end_ts = anchor - static_cast<std::int64_t>(sc.length_months -
                                                   i * sc.interval_months) *
                             kSecondsPerMonth;
    out.push_back(iv);
  }
  return out;
}

inline constexpr std::size_t kFeatureCount = 13;

// Canonical feature order; data-point names are "<feature>_T<a>_<b>".
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "forks",
    "issues_opened",
    "issues_closed",
    "pulls_opened",
    "pulls_closed",
    "pulls_merged",
    "commits",
    "max_days_without_commits",
    "max_commits_single_dev",
    "new_contributors",
    "distinct_contributors",
    "owner_projects_created",
    "owner_commit_count",
};

struct FeatureMatrix {
  std::string repo_id;
  Scenario scenario;
  std::vector<Interval> intervals;
  // values[f][i]: feature f over interval i (both in canonical order).
  std::array<std::vector<double>, kFeatureCount> values;
};

// Longest commit drought inside an interval, in whole days: the largest of
// (first commit - start), the gaps between consecutive commits, and
// (end - last commit). An interval without commits scores its full length.
inline std::int64_t max_gap_days(const std::vector<UnixTime>& commit_ts,
                                 const Interval& iv) {
  if (commit_ts.empty()) return (iv.end_ts - iv.start_ts) / kSecondsPerDay;
  std::int64_t max_gap = commit_ts.front() - iv.start_ts;
  for (std::size_t i = 1; i < commit_ts.size(); ++i)
    max_gap = std::max(max_gap, commit_ts[i] - commit_ts[i - 1]);
  max_gap = std::max(max_gap, iv.end_ts - commit_ts.back());
  return max_gap / kSecondsPerDay;
}

namespace detail {

// Count of sorted timestamps within [lo, hi).
inline double count_in(const std::vector<UnixTime>& sorted, UnixTime lo,
                       UnixTime hi) {
  const auto a = std::lower_bound(sorted.begin(), sorted.end(), lo);
  const auto b = std::lower_bound(sorted.begin(), sorted.end(), hi);
  return static_cast<double>(b - a);
}

}  // namespace detail

// Computes the full 13 x k feature grid for one snapshot. The anchor defaults
// to the last commit; pass an explicit anchor to re-evaluate a historical
// state. Requires at least n months of history before the anchor.
inline FeatureMatrix extract_features(const RepoSnapshot& s, Scenario sc,
                                      std::optional<UnixTime> anchor_opt = {}) {
  if (s.commits.empty())
    throw Error(Errc::insufficient_history, s.id() + " has no commits");
  const UnixTime anchor = anchor_opt.value_or(s.commits.back().timestamp);
  const UnixTime window_start =
      anchor - static_cast<std::int64_t>(sc.length_months) * kSecondsPerMonth;
  if (s.commits.front().timestamp > window_start)
    throw Error(Errc::insufficient_history,
                s.id() + ": history spans less than " +
                    std::to_string(sc.length_months) + " months before anchor");

  FeatureMatrix mx;
  mx.repo_id = s.id();
  mx.scenario = sc;
  mx.intervals = make_intervals(anchor, sc);
  const int k = sc.interval_count();
  for (auto& v : mx.values) v.assign(k, 0.0);

  // Sorted event timestamp views.
  std::vector<UnixTime> commit_ts, fork_ts, issue_open, issue_close, pull_open,
      pull_close, pull_merge;
  commit_ts.reserve(s.commits.size());
  for (const auto& c : s.commits) commit_ts.push_back(c.timestamp);
  for (const auto& f : s.forks) fork_ts.push_back(f.created_at);
  for (const auto& e : s.issues) {
    issue_open.push_back(e.opened_at);
    if (e.closed_at) issue_close.push_back(*e.closed_at);
  }
  for (const auto& e : s.pulls) {
    pull_open.push_back(e.opened_at);
    if (e.closed_at) pull_close.push_back(*e.closed_at);
    if (e.merged_at) pull_merge.push_back(*e.merged_at);
  }
  std::sort(issue_close.begin(), issue_close.end());
  std::sort(pull_close.begin(), pull_close.end());
  std::sort(pull_merge.begin(), pull_merge.end());

  // First-ever commit per author, for the new-contributor count.
  std::map<std::string, UnixTime> first_commit;
  for (const auto& c : s.commits)
    if (!first_commit.count(c.author_id)) first_commit[c.author_id] = c.timestamp;
  std::vector<UnixTime> first_ts;
  first_ts.reserve(first_commit.size());
  for (const auto& [_, t] : first_commit) first_ts.push_back(t);
  std::sort(first_ts.begin(), first_ts.end());

  for (int i = 0; i < k; ++i) {
    const Interval& iv = mx.intervals[i];
    mx.values[0][i] = detail::count_in(fork_ts, iv.start_ts, iv.end_ts);
    mx.values[1][i] = detail::count_in(issue_open, iv.start_ts, iv.end_ts);
    mx.values[2][i] = detail::count_in(issue_close, iv.start_ts, iv.end_ts);
    mx.values[3][i] = detail::count_in(pull_open, iv.start_ts, iv.end_ts);
    mx.values[4][i] = detail::count_in(pull_close, iv.start_ts, iv.end_ts);
    mx.values[5][i] = detail::count_in(pull_merge, iv.start_ts, iv.end_ts);

    const auto lo = std::lower_bound(s.commits.begin(), s.commits.end(),
                                     iv.start_ts, [](const auto& c, UnixTime t) {
                                       return c.timestamp < t;
                                     });
    const auto hi = std::lower_bound(s.commits.begin(), s.commits.end(),
                                     iv.end_ts, [](const auto& c, UnixTime t) {
                                       return c.timestamp < t;
                                     });
    mx.values[6][i] = static_cast<double>(hi - lo);

    std::vector<UnixTime> slice;
    slice.reserve(hi - lo);
    std::map<std::string, int> per_author;
    for (auto it = lo; it != hi; ++it) {
      slice.push_back(it->timestamp);
      ++per_author[it->author_id];
    }
    mx.values[7][i] = static_cast<double>(max_gap_days(slice, iv));
    int max_by_dev = 0;
    for (const auto& [_, n] : per_author) max_by_dev = std::max(max_by_dev, n);
    mx.values[8][i] = max_by_dev;
    mx.values[9][i] = detail::count_in(first_ts, iv.start_ts, iv.end_ts);
    mx.values[10][i] = static_cast<double>(per_author.size());
    // Owner features are sampled once at snapshot time and replicated across
    // intervals; no per-interval history is available for them.
    mx.values[11][i] = static_cast<double>(s.owner_stats.projects_created);
    mx.values[12][i] = static_cast<double>(s.owner_stats.owner_commit_count);
  }
  return mx;
}

struct DataPointVector {
  std::vector<std::string> names;
  std::vector<double> values;
};

// Canonical flattening: feature order first, interval index ascending within
// each feature. Deterministic across runs.
inline DataPointVector flatten(const FeatureMatrix& mx) {
  DataPointVector v;
  const int k = mx.scenario.interval_count();
  v.names.reserve(kFeatureCount * k);
  v.values.reserve(kFeatureCount * k);
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    for (int i = 0; i < k; ++i) {
      v.names.push_back(std::string(kFeatureNames[f]) + "_" +
                        mx.intervals[i].tag());
      v.values.push_back(mx.values[f][i]);
    }
  }
  return v;
}

// --- Tabular form shared by the modeling modules ---------------------------

enum class Label { unmaintained = 0, active = 1 };

inline const char* label_name(Label l) {
  return l == Label::unmaintained ? "unmaintained" : "active";
}

struct Dataset {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<Label> labels;        // empty when unlabeled
  std::vector<std::string> row_ids;

  std::size_t n_rows() const { return rows.size(); }
  std::size_t n_cols() const { return columns.size(); }
};

inline Dataset make_dataset(const std::vector<DataPointVector>& vectors,
                            std::vector<Label> labels = {},
                            std::vector<std::string> row_ids = {}) {
  Dataset ds;
  if (vectors.empty()) return ds;
  ds.columns = vectors.front().names;
  for (const auto& v : vectors) {
    if (v.names != ds.columns)
      throw Error(Errc::column_mismatch, "data-point vectors disagree on columns");
    ds.rows.push_back(v.values);
  }
  if (!labels.empty() && labels.size() != vectors.size())
    throw Error(Errc::column_mismatch, "label count does not match row count");
  ds.labels = std::move(labels);
  ds.row_ids = std::move(row_ids);
  return ds;
}

inline Dataset subset_rows(const Dataset& ds, const std::vector<std::size_t>& idx) {
  Dataset out;
  out.columns = ds.columns;
  out.rows.reserve(idx.size());
  for (const auto i : idx) {
    out.rows.push_back(ds.rows[i]);
    if (!ds.labels.empty()) out.labels.push_back(ds.labels[i]);
    if (!ds.row_ids.empty()) out.row_ids.push_back(ds.row_ids[i]);
  }
  return out;
}

// Reorders/reduces a row to the given column set; throws ColumnMismatch if a
// requested column is absent.
inline std::vector<double> project_row(const DataPointVector& v,
                                       const std::vector<std::string>& columns) {
  std::vector<double> out;
  out.reserve(columns.size());
  for (const auto& c : columns) {
    const auto it = std::find(v.names.begin(), v.names.end(), c);
    if (it == v.names.end())
      throw Error(Errc::column_mismatch, "column '" + c + "' not present");
    out.push_back(v.values[it - v.names.begin()]);
  }
  return out;
}

inline Dataset project_columns(const Dataset& ds,
                               const std::vector<std::string>& columns) {
  std::vector<std::size_t> col_idx;
  col_idx.reserve(columns.size());
  for (const auto& c : columns) {
    const auto it = std::find(ds.columns.begin(), ds.columns.end(), c);
    if (it == ds.columns.end())
      throw Error(Errc::column_mismatch, "column '" + c + "' not present");
    col_idx.push_back(static_cast<std::size_t>(it - ds.columns.begin()));
  }
  Dataset out;
  out.columns = columns;
  out.labels = ds.labels;
  out.row_ids = ds.row_ids;
  out.rows.reserve(ds.rows.size());
  for (const auto& row : ds.rows) {
    std::vector<double> r;
    r.reserve(col_idx.size());
    for (const auto i : col_idx) r.push_back(row[i]);
    out.rows.push_back(std::move(r));
  }
  return out;
}

// CSV export: one row per repository, columns in canonical data-point order,
// plus a trailing label column when labels are known.
inline void write_feature_csv(const std::filesystem::path& path,
                              const Dataset& ds) {
  CsvWriter w(path);
  std::vector<std::string> header = ds.columns;
  const bool labeled = !ds.labels.empty();
  if (labeled) header.push_back("label");
  w.row(header);
  for (std::size_t r = 0; r < ds.rows.size(); ++r) {
    std::vector<std::string> row;
    row.reserve(header.size());
    for (const auto v : ds.rows[r]) row.push_back(csv_number(v));
    if (labeled) row.push_back(label_name(ds.labels[r]));
    w.row(row);
  }
}

}  // namespace repovitals
