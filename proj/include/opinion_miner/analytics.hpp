#pragma once

// Involver statistics, the topic-by-year heatmap grid and the monthly
// sentiment series. Calendar boundaries are UTC. No randomness here.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "opinion_miner/common.hpp"
#include "opinion_miner/record.hpp"
#include "opinion_miner/textproc.hpp"

namespace opminer::analytics {

enum class InvolverKind { active_user, mentioned_account, hashtag };

inline std::string to_string(InvolverKind k) {
  switch (k) {
    case InvolverKind::active_user:
      return "active_user";
    case InvolverKind::mentioned_account:
      return "mentioned_account";
    case InvolverKind::hashtag:
      return "hashtag";
  }
  return "unknown";
}

/// How the overall list is computed: summing each year's share of the
/// handles in that year's top-k list, or one share over the whole period.
enum class ShareMode { per_year_sum, global };

struct InvolverEntry {
  std::string handle;
  long long count = 0;
  double share = 0.0;
};

struct InvolverReport {
  InvolverKind kind = InvolverKind::active_user;
  std::map<int, std::vector<InvolverEntry>> per_year;
  std::vector<std::pair<std::string, double>> overall;  // share desc, handle asc
};

namespace detail {

inline void rank(std::vector<InvolverEntry>& entries) {
  std::sort(entries.begin(), entries.end(), [](const InvolverEntry& a, const InvolverEntry& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.handle < b.handle;
  });
}

// Counts keyed by a fold key; the displayed handle is the most frequent
// original spelling (ties lexicographically smallest).
struct FoldedCounter {
  std::map<std::string, long long> counts;
  std::map<std::string, std::map<std::string, long long>> spellings;
  long long total = 0;

  void add(const std::string& key, const std::string& spelling) {
    ++counts[key];
    ++spellings[key][spelling];
    ++total;
  }

  std::string display(const std::string& key) const {
    const auto& sp = spellings.at(key);
    auto best = sp.begin();
    for (auto it = sp.begin(); it != sp.end(); ++it)
      if (it->second > best->second) best = it;
    return best->first;
  }
};

inline std::vector<std::string> items(const TweetRecord& r, InvolverKind kind) {
  switch (kind) {
    case InvolverKind::active_user:
      return {r.user};
    case InvolverKind::mentioned_account:
      return r.mentions;
    case InvolverKind::hashtag:
      return r.hashtags;
  }
  return {};
}

inline std::string fold_key(const std::string& s, InvolverKind kind) {
  return kind == InvolverKind::hashtag ? text::case_fold(s) : s;
}

inline std::vector<InvolverEntry> to_entries(const FoldedCounter& c) {
  std::vector<InvolverEntry> out;
  for (const auto& [key, n] : c.counts)
    out.push_back({c.display(key), n, c.total ? static_cast<double>(n) / static_cast<double>(c.total) : 0.0});
  rank(out);
  return out;
}

}  // namespace detail

/// Per-year top-k by occurrence count with share = count / that year's
/// total occurrences of the kind. Hashtags are counted case-insensitively.
inline InvolverReport involvers(std::span<const TweetRecord> records, InvolverKind kind, std::size_t k = 10,
                                ShareMode mode = ShareMode::per_year_sum) {
  std::map<int, detail::FoldedCounter> by_year;
  detail::FoldedCounter all;
  for (const auto& r : records) {
    const int year = year_of(r.created_at);
    for (const auto& item : detail::items(r, kind)) {
      const auto key = detail::fold_key(item, kind);
      by_year[year].add(key, item);
      all.add(key, item);
    }
  }
  InvolverReport report;
  report.kind = kind;
  std::map<std::string, double> summed;
  for (const auto& [year, counter] : by_year) {
    auto entries = detail::to_entries(counter);
    if (entries.size() > k) entries.resize(k);
    for (const auto& e : entries) summed[e.handle] += e.share;
    report.per_year[year] = std::move(entries);
  }
  if (mode == ShareMode::global) {
    summed.clear();
    for (const auto& e : detail::to_entries(all)) summed[e.handle] = e.share;
  }
  report.overall.assign(summed.begin(), summed.end());
  std::stable_sort(report.overall.begin(), report.overall.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return report;
}

inline InvolverReport active_users(std::span<const TweetRecord> records, std::size_t k = 10,
                                   ShareMode mode = ShareMode::per_year_sum) {
  return involvers(records, InvolverKind::active_user, k, mode);
}

inline InvolverReport mentioned_accounts(std::span<const TweetRecord> records, std::size_t k = 10,
                                         ShareMode mode = ShareMode::per_year_sum) {
  return involvers(records, InvolverKind::mentioned_account, k, mode);
}

inline InvolverReport hashtag_stats(std::span<const TweetRecord> records, std::size_t k = 10,
                                    ShareMode mode = ShareMode::per_year_sum) {
  return involvers(records, InvolverKind::hashtag, k, mode);
}

/// Whole-period ranking (one bin over every record).
inline std::vector<InvolverEntry> involvers_all_time(std::span<const TweetRecord> records, InvolverKind kind,
                                                     std::size_t k = 10) {
  detail::FoldedCounter all;
  for (const auto& r : records)
    for (const auto& item : detail::items(r, kind)) all.add(detail::fold_key(item, kind), item);
  auto entries = detail::to_entries(all);
  if (entries.size() > k) entries.resize(k);
  return entries;
}

/// CSV `kind,year,rank,handle,count,share`.
inline void write_involvers_header(std::ostream& out) {
  write_csv_row(out, {"kind", "year", "rank", "handle", "count", "share"});
}

inline void write_involvers_rows(std::ostream& out, const InvolverReport& report) {
  for (const auto& [year, entries] : report.per_year)
    for (std::size_t r = 0; r < entries.size(); ++r)
      write_csv_row(out, {to_string(report.kind), std::to_string(year), std::to_string(r + 1), entries[r].handle,
                          std::to_string(entries[r].count), format_double(entries[r].share)});
}

// ---------------------------------------------------------------------------
// Heatmap

/// Type-7 empirical quantile (linear interpolation between order statistics)
/// of already-sorted values.
inline double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty data");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

struct HeatmapGrid {
  int num_topics = 0;
  std::vector<int> years;                      // contiguous, ascending
  std::vector<std::vector<long long>> counts;  // [topic][year index]
  std::vector<std::vector<int>> classes;       // [topic][year index]
  std::vector<double> boundaries;              // n_classes - 1 quantile cut points
};

struct TopicAssignment {
  int topic;
  Timestamp timestamp;
};

/// Cell class = number of boundaries <= cell count, boundaries at the
/// j / n_classes quantiles (j = 1 .. n_classes - 1) of all cell counts.
inline HeatmapGrid topic_year_heatmap(std::span<const TopicAssignment> assignments, int num_topics,
                                      int n_classes = 5) {
  if (num_topics < 1) throw std::invalid_argument("heatmap: K must be >= 1");
  if (n_classes < 1) throw std::invalid_argument("heatmap: n_classes must be >= 1");
  HeatmapGrid grid;
  grid.num_topics = num_topics;
  if (assignments.empty()) return grid;
  int y0 = year_of(assignments.front().timestamp), y1 = y0;
  for (const auto& a : assignments) {
    if (a.topic < 0 || a.topic >= num_topics) throw std::invalid_argument("heatmap: topic id out of range");
    y0 = std::min(y0, year_of(a.timestamp));
    y1 = std::max(y1, year_of(a.timestamp));
  }
  for (int y = y0; y <= y1; ++y) grid.years.push_back(y);
  grid.counts.assign(static_cast<std::size_t>(num_topics), std::vector<long long>(grid.years.size(), 0));
  for (const auto& a : assignments) ++grid.counts[a.topic][year_of(a.timestamp) - y0];

  std::vector<double> values;
  for (const auto& row : grid.counts)
    for (long long c : row) values.push_back(static_cast<double>(c));
  std::sort(values.begin(), values.end());
  for (int j = 1; j < n_classes; ++j)
    grid.boundaries.push_back(quantile_sorted(values, static_cast<double>(j) / n_classes));
  grid.classes.assign(grid.counts.size(), std::vector<int>(grid.years.size(), 0));
  for (std::size_t k = 0; k < grid.counts.size(); ++k)
    for (std::size_t y = 0; y < grid.years.size(); ++y) {
      const auto v = static_cast<double>(grid.counts[k][y]);
      grid.classes[k][y] = static_cast<int>(
          std::count_if(grid.boundaries.begin(), grid.boundaries.end(), [&](double b) { return b <= v; }));
    }
  return grid;
}

/// CSV `topic,year,count,class`.
inline void write_heatmap_csv(std::ostream& out, const HeatmapGrid& grid) {
  write_csv_row(out, {"topic", "year", "count", "class"});
  for (std::size_t k = 0; k < grid.counts.size(); ++k)
    for (std::size_t y = 0; y < grid.years.size(); ++y)
      write_csv_row(out, {std::to_string(k), std::to_string(grid.years[y]), std::to_string(grid.counts[k][y]),
                          std::to_string(grid.classes[k][y])});
}

// ---------------------------------------------------------------------------
// Sentiment series

inline constexpr double kDropThreshold = 0.4;

struct SentimentBin {
  YearMonth month;
  long long positive = 0;
  long long negative = 0;
  std::optional<double> ratio;  // absent for empty months

  bool drop() const { return ratio && *ratio < kDropThreshold; }
};

struct SentimentSeries {
  std::vector<SentimentBin> bins;  // contiguous months, ascending
};

struct PolarityPoint {
  int polarity;
  Timestamp timestamp;
};

inline SentimentSeries sentiment_series(std::span<const PolarityPoint> points) {
  SentimentSeries series;
  if (points.empty()) return series;
  YearMonth lo = year_month_of(points.front().timestamp), hi = lo;
  std::map<YearMonth, std::pair<long long, long long>> counts;
  for (const auto& p : points) {
    if (p.polarity != 0 && p.polarity != 1) throw std::invalid_argument("sentiment_series: polarity must be 0 or 1");
    const auto ym = year_month_of(p.timestamp);
    lo = std::min(lo, ym);
    hi = std::max(hi, ym);
    auto& c = counts[ym];
    (p.polarity == 1 ? c.first : c.second) += 1;
  }
  for (YearMonth m = lo; m <= hi; m = m.next()) {
    SentimentBin bin;
    bin.month = m;
    if (auto it = counts.find(m); it != counts.end()) {
      bin.positive = it->second.first;
      bin.negative = it->second.second;
      bin.ratio = static_cast<double>(bin.positive) / static_cast<double>(bin.positive + bin.negative);
    }
    series.bins.push_back(bin);
  }
  return series;
}

/// CSV `year,month,positive,negative,ratio`; empty months leave ratio blank.
inline void write_series_csv(std::ostream& out, const SentimentSeries& series) {
  write_csv_row(out, {"year", "month", "positive", "negative", "ratio"});
  for (const auto& b : series.bins)
    write_csv_row(out, {std::to_string(b.month.year), std::to_string(b.month.month), std::to_string(b.positive),
                        std::to_string(b.negative), b.ratio ? format_double(*b.ratio) : ""});
}

// ---------------------------------------------------------------------------
// Volumes

/// Tweets per calendar year, zero-filled across the observed range.
inline std::vector<std::pair<int, long long>> yearly_volume(std::span<const TweetRecord> records) {
  std::vector<std::pair<int, long long>> out;
  if (records.empty()) return out;
  std::map<int, long long> counts;
  for (const auto& r : records) ++counts[year_of(r.created_at)];
  for (int y = counts.begin()->first; y <= counts.rbegin()->first; ++y) out.emplace_back(y, counts[y]);
  return out;
}

/// CSV `year,count`.
inline void write_volume_csv(std::ostream& out, std::span<const std::pair<int, long long>> volume) {
  write_csv_row(out, {"year", "count"});
  for (const auto& [y, n] : volume) write_csv_row(out, {std::to_string(y), std::to_string(n)});
}

}  // namespace opminer::analytics
