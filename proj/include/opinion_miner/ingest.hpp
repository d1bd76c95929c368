#pragma once

// Corpus parsing and the two-stage keyword / locality filter.

#include <istream>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "opinion_miner/common.hpp"
#include "opinion_miner/record.hpp"
#include "opinion_miner/textproc.hpp"

namespace opminer::ingest {

enum class MalformedPolicy { skip, abort };

struct ParseIssue {
  std::size_t line;
  std::string message;
};

struct ParseResult {
  std::vector<TweetRecord> records;
  std::vector<ParseIssue> issues;  // skipped lines under MalformedPolicy::skip
};

inline TweetRecord make_record(std::string id, Timestamp created_at, std::string user, std::string text) {
  auto ents = text::extract_entities(text);
  return {std::move(id), created_at, std::move(user), std::move(text), std::move(ents.mentions),
          std::move(ents.hashtags)};
}

/// Parses one JSON object per line with string fields id, created_at, user
/// and text. Blank lines are ignored. Entities are re-extracted from text.
inline ParseResult parse_corpus(std::istream& in, MalformedPolicy policy = MalformedPolicy::skip) {
  ParseResult result;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& msg) {
    if (policy == MalformedPolicy::abort) throw InputError(msg, line_no);
    result.issues.push_back({line_no, msg});
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      fail("invalid JSON");
      continue;
    }
    if (!j.is_object()) {
      fail("record is not a JSON object");
      continue;
    }
    std::string missing;
    for (const char* key : {"id", "created_at", "user", "text"}) {
      if (!j.contains(key) || !j[key].is_string()) {
        missing = key;
        break;
      }
    }
    if (!missing.empty()) {
      fail("missing or non-string field '" + missing + "'");
      continue;
    }
    auto id = j["id"].get<std::string>();
    if (id.empty()) {
      fail("empty id");
      continue;
    }
    auto ts = parse_iso8601(j["created_at"].get<std::string>());
    if (!ts) {
      fail("unparseable created_at '" + j["created_at"].get<std::string>() + "'");
      continue;
    }
    if (!seen.insert(id).second) {
      fail("duplicate id '" + id + "'");
      continue;
    }
    result.records.push_back(make_record(std::move(id), *ts, j["user"].get<std::string>(), j["text"].get<std::string>()));
  }
  return result;
}

inline std::string serialize_record(const TweetRecord& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["created_at"] = format_iso8601(r.created_at);
  j["user"] = r.user;
  j["text"] = r.text;
  j["mentions"] = r.mentions;
  j["hashtags"] = r.hashtags;
  return j.dump();
}

inline void write_corpus(std::ostream& out, std::span<const TweetRecord> records) {
  for (const auto& r : records) out << serialize_record(r) << '\n';
}

// ---------------------------------------------------------------------------
// Filters

/// Keeps records whose case-folded text contains any case-folded keyword
/// phrase as a substring.
inline std::vector<TweetRecord> keyword_filter(std::span<const TweetRecord> records,
                                               std::span<const std::string> keywords) {
  if (keywords.empty()) throw std::invalid_argument("keyword_filter: keyword list is empty");
  std::vector<std::string> folded;
  for (const auto& k : keywords) folded.push_back(text::case_fold(k));
  std::vector<TweetRecord> out;
  for (const auto& r : records) {
    const auto t = text::case_fold(r.text);
    for (const auto& k : folded) {
      if (!k.empty() && t.find(k) != std::string::npos) {
        out.push_back(r);
        break;
      }
    }
  }
  return out;
}

namespace detail {

using TermTokens = std::vector<std::vector<std::string>>;

inline TermTokens tokenize_terms(std::span<const std::string> terms) {
  TermTokens out;
  for (const auto& t : terms) {
    auto toks = text::tokenize(t);
    if (!toks.empty()) out.push_back(std::move(toks));
  }
  return out;
}

// Whole-token (or contiguous token sequence) match.
inline bool contains_any(const std::vector<std::string>& tokens, const TermTokens& terms) {
  for (const auto& term : terms) {
    if (term.size() > tokens.size()) continue;
    for (std::size_t i = 0; i + term.size() <= tokens.size(); ++i)
      if (std::equal(term.begin(), term.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) return true;
  }
  return false;
}

}  // namespace detail

struct LocalityResult {
  std::vector<TweetRecord> after_include;  // stage A
  std::vector<TweetRecord> after_exclude;  // stage B
};

/// Stage A keeps records containing an include term (skipped when
/// `include_stage` is false). Stage B then drops records containing an
/// exclude term and no include term. Terms match whole case-folded tokens.
inline LocalityResult locality_filter(std::span<const TweetRecord> records, std::span<const std::string> include_terms,
                                      std::span<const std::string> exclude_terms, bool include_stage = true) {
  const auto inc = detail::tokenize_terms(include_terms);
  const auto exc = detail::tokenize_terms(exclude_terms);
  if (include_stage && inc.empty()) throw std::invalid_argument("locality_filter: include term list is empty");
  LocalityResult out;
  for (const auto& r : records) {
    const auto toks = text::tokenize(r.text);
    const bool has_inc = detail::contains_any(toks, inc);
    if (include_stage && !has_inc) continue;
    out.after_include.push_back(r);
    if (detail::contains_any(toks, exc) && !has_inc) continue;
    out.after_exclude.push_back(r);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Filter summary

struct FilterStage {
  std::string name;
  std::size_t tweets = 0;
  std::size_t users = 0;
  double tweet_ratio = 0.0;  // tweets / raw tweets
  double user_ratio = 0.0;   // users / raw users
};

struct FilterReport {
  std::vector<FilterStage> stages;
  std::size_t malformed_lines = 0;
};

/// count/raw as a percent rounded half-up to two decimals, in hundredths of
/// a percent (21.13% -> 2113). Integer arithmetic avoids binary rounding.
inline long long percent_hundredths(std::size_t count, std::size_t raw) {
  if (raw == 0) throw std::invalid_argument("percent of an empty base");
  const auto c = static_cast<unsigned long long>(count);
  const auto r = static_cast<unsigned long long>(raw);
  return static_cast<long long>((c * 20000ULL + r) / (2ULL * r));
}

inline std::string format_percent_value(std::size_t count, std::size_t raw) {
  const auto h = percent_hundredths(count, raw);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%lld.%02lld", h / 100, h % 100);
  return buf;
}

inline std::string format_percent(std::size_t count, std::size_t raw) { return format_percent_value(count, raw) + "%"; }

inline std::size_t distinct_users(std::span<const TweetRecord> records) {
  std::set<std::string_view> users;
  for (const auto& r : records) users.insert(r.user);
  return users.size();
}

struct StageCounts {
  std::string name;
  std::size_t tweets;
  std::size_t users;
};

inline FilterReport filter_summary(std::span<const StageCounts> stages) {
  if (stages.empty() || stages.front().tweets == 0)
    throw std::invalid_argument("filter_summary: raw corpus is empty, ratios undefined");
  FilterReport report;
  const auto& raw = stages.front();
  for (const auto& s : stages) {
    report.stages.push_back({s.name, s.tweets, s.users, static_cast<double>(s.tweets) / raw.tweets,
                             raw.users ? static_cast<double>(s.users) / raw.users : 0.0});
  }
  return report;
}

inline FilterReport filter_summary(std::span<const TweetRecord> raw, std::span<const TweetRecord> after_keyword,
                                   std::span<const TweetRecord> after_locality) {
  std::vector<StageCounts> stages = {
      {"Raw Tweets", raw.size(), distinct_users(raw)},
      {"NYC keyword filtering", after_keyword.size(), distinct_users(after_keyword)},
      {"Removal of other cases", after_locality.size(), distinct_users(after_locality)},
  };
  return filter_summary(stages);
}

/// CSV `stage,tweets,tweet_pct,users,user_pct`; percents carry two decimals.
inline void write_filter_report_csv(std::ostream& out, const FilterReport& report) {
  write_csv_row(out, {"stage", "tweets", "tweet_pct", "users", "user_pct"});
  if (report.stages.empty()) return;
  const auto& raw = report.stages.front();
  for (const auto& s : report.stages) {
    write_csv_row(out, {s.name, std::to_string(s.tweets), format_percent_value(s.tweets, raw.tweets),
                        std::to_string(s.users), raw.users ? format_percent_value(s.users, raw.users) : "0.00"});
  }
}

/// Fixed-width text rendering in the layout of a filter summary table.
inline std::string render_filter_report(const FilterReport& report) {
  std::ostringstream out;
  if (report.stages.empty()) return {};
  const auto& raw = report.stages.front();
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-26s %12s %9s %12s %9s\n", "Stage", "Tweets", "Ratio", "Users", "Ratio");
  out << buf;
  for (const auto& s : report.stages) {
    std::snprintf(buf, sizeof(buf), "%-26s %12zu %9s %12zu %9s\n", s.name.c_str(), s.tweets,
                  format_percent(s.tweets, raw.tweets).c_str(), s.users,
                  raw.users ? format_percent(s.users, raw.users).c_str() : "-");
    out << buf;
  }
  if (report.malformed_lines) out << "malformed lines skipped: " << report.malformed_lines << '\n';
  return out.str();
}

}  // namespace opminer::ingest
