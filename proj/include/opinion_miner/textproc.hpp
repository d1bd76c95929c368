#pragma once

// Tokenization, entity extraction, vocabulary construction and conversion of
// records into token-id documents.

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "opinion_miner/common.hpp"
#include "opinion_miner/record.hpp"

namespace opminer::text {

// ---------------------------------------------------------------------------
// Unicode helpers

inline icu::UnicodeString nfc_unicode(std::string_view utf8) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU NFC normalizer unavailable");
  auto src = icu::UnicodeString::fromUTF8(icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  icu::UnicodeString out = nfc->normalize(src, status);
  if (U_FAILURE(status)) throw std::runtime_error("NFC normalization failed");
  return out;
}

inline std::string to_utf8(const icu::UnicodeString& s) {
  std::string out;
  s.toUTF8String(out);
  return out;
}

inline std::string normalize_nfc(std::string_view utf8) { return to_utf8(nfc_unicode(utf8)); }

/// NFC followed by Unicode full case folding.
inline std::string case_fold(std::string_view utf8) {
  auto s = nfc_unicode(utf8);
  s.foldCase();
  return to_utf8(s);
}

// ---------------------------------------------------------------------------
// URLs

namespace detail {

inline bool is_ascii_word(unsigned char c) { return std::isalnum(c) || c == '_'; }

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

}  // namespace detail

/// Replaces every URL (http://, https://, www., pic.twitter.com/) through the
/// end of its whitespace-delimited chunk with a single space.
inline std::string strip_urls(std::string_view text) {
  const std::string lower = detail::ascii_lower(text);
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    auto starts = [&](std::string_view p) { return std::string_view(lower).substr(i, p.size()) == p; };
    const bool boundary = i == 0 || !detail::is_ascii_word(static_cast<unsigned char>(lower[i - 1]));
    if (starts("http://") || starts("https://") ||
        (boundary && (starts("www.") || starts("pic.twitter.com/")))) {
      while (i < text.size() && !detail::is_space(static_cast<unsigned char>(text[i]))) ++i;
      out += ' ';
      continue;
    }
    out += text[i++];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tokenization

namespace detail {

inline bool is_token_char(UChar32 c) {
  if (u_isalnum(c)) return true;
  switch (u_charType(c)) {
    case U_NON_SPACING_MARK:
    case U_ENCLOSING_MARK:
    case U_COMBINING_SPACING_MARK:
    case U_OTHER_SYMBOL:  // emoji pass through
      return true;
    default:
      return false;
  }
}

inline bool keep_token(const icu::UnicodeString& tok) {
  bool all_digits = true;
  for (int32_t i = 0; i < tok.length();) {
    UChar32 c = tok.char32At(i);
    if (!u_isdigit(c)) all_digits = false;
    i += U16_LENGTH(c);
  }
  if (all_digits) return false;
  // Single-code-point tokens survive only when alphabetic.
  if (tok.countChar32() == 1) return u_isalpha(tok.char32At(0));
  return true;
}

}  // namespace detail

/// Case-folded word tokens. URLs are removed, '@'/'#' and all other
/// punctuation act as separators, pure-digit tokens are dropped, and
/// one-character tokens are kept only when alphabetic.
inline std::vector<std::string> tokenize(std::string_view text) {
  auto s = nfc_unicode(strip_urls(text));
  s.foldCase();
  std::vector<std::string> tokens;
  icu::UnicodeString current;
  auto flush = [&] {
    if (!current.isEmpty() && detail::keep_token(current)) tokens.push_back(to_utf8(current));
    current.remove();
  };
  for (int32_t i = 0; i < s.length();) {
    UChar32 c = s.char32At(i);
    i += U16_LENGTH(c);
    if (detail::is_token_char(c))
      current.append(c);
    else
      flush();
  }
  flush();
  return tokens;
}

// ---------------------------------------------------------------------------
// Entities

struct Entities {
  std::vector<std::string> mentions;
  std::vector<std::string> hashtags;
  bool operator==(const Entities&) const = default;
};

/// Mentions match `@[A-Za-z0-9_]+`, hashtags `#[A-Za-z0-9_]+`, only where
/// the sigil starts a token (so "a@b.com" yields nothing). URLs never
/// contribute. Case is preserved; repeated entities are kept per occurrence.
inline Entities extract_entities(std::string_view text) {
  const std::string clean = strip_urls(text);
  Entities out;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    const char sigil = clean[i];
    if (sigil != '@' && sigil != '#') continue;
    if (i > 0 && detail::is_ascii_word(static_cast<unsigned char>(clean[i - 1]))) continue;
    std::size_t j = i + 1;
    while (j < clean.size() && detail::is_ascii_word(static_cast<unsigned char>(clean[j]))) ++j;
    if (j == i + 1) continue;
    (sigil == '@' ? out.mentions : out.hashtags).emplace_back(clean.substr(i + 1, j - i - 1));
    i = j - 1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stopwords

inline const std::vector<std::string>& default_stopwords() {
  static const std::vector<std::string> words = {
      "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "you're",
      "you've", "you'll", "you'd", "your", "yours", "yourself", "yourselves", "he", "him", "his",
      "himself", "she", "she's", "her", "hers", "herself", "it", "it's", "its", "itself",
      "they", "them", "their", "theirs", "themselves", "what", "which", "who", "whom", "this",
      "that", "that'll", "these", "those", "am", "is", "are", "was", "were", "be",
      "been", "being", "have", "has", "had", "having", "do", "does", "did", "doing",
      "a", "an", "the", "and", "but", "if", "or", "because", "as", "until",
      "while", "of", "at", "by", "for", "with", "about", "against", "between", "into",
      "through", "during", "before", "after", "above", "below", "to", "from", "up", "down",
      "in", "out", "on", "off", "over", "under", "again", "further", "then", "once",
      "here", "there", "when", "where", "why", "how", "all", "any", "both", "each",
      "few", "more", "most", "other", "some", "such", "no", "nor", "not", "only",
      "own", "same", "so", "than", "too", "very", "s", "t", "can", "will",
      "just", "don", "don't", "should", "should've", "now", "d", "ll", "m", "o",
      "re", "ve", "y", "ain", "aren", "aren't", "couldn", "couldn't", "didn", "didn't",
      "doesn", "doesn't", "hadn", "hadn't", "hasn", "hasn't", "haven", "haven't", "isn", "isn't",
      "ma", "mightn", "mightn't", "mustn", "mustn't", "needn", "needn't", "shan", "shan't", "shouldn",
      "shouldn't", "wasn", "wasn't", "weren", "weren't", "won", "won't", "wouldn", "wouldn't",
  };
  return words;
}

/// One entry per line; blank lines and '#' comments ignored. Entries are case-folded.
inline std::vector<std::string> read_word_list(std::istream& in) {
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    out.push_back(case_fold(t));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Vocabulary

class Vocabulary {
 public:
  static constexpr int kVersion = 1;

  Vocabulary() = default;
  Vocabulary(std::vector<std::string> tokens, std::vector<int> doc_freq, std::size_t total_docs)
      : tokens_(std::move(tokens)), doc_freq_(std::move(doc_freq)), total_docs_(total_docs) {
    if (tokens_.size() != doc_freq_.size()) throw std::invalid_argument("vocabulary: tokens/doc_freq size mismatch");
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      if (!index_.emplace(tokens_[i], static_cast<int>(i)).second)
        throw std::invalid_argument("vocabulary: duplicate token '" + tokens_[i] + "'");
      if (doc_freq_[i] <= 0 || static_cast<std::size_t>(doc_freq_[i]) > total_docs_)
        throw std::invalid_argument("vocabulary: doc_freq out of range for '" + tokens_[i] + "'");
    }
  }

  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }
  std::size_t total_docs() const { return total_docs_; }
  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  int doc_freq(int id) const { return doc_freq_.at(static_cast<std::size_t>(id)); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::optional<int> id(std::string_view token) const {
    auto it = index_.find(std::string(token));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  /// Identity of the token list, recorded by models trained against it.
  std::uint64_t hash() const {
    std::uint64_t h = fnv1a("vocab");
    for (const auto& t : tokens_) {
      h = fnv1a(t, h);
      h = fnv1a(std::string_view("\n"), h);
    }
    return h;
  }

  nlohmann::json to_json() const {
    return {{"version", kVersion}, {"tokens", tokens_}, {"doc_freq", doc_freq_}, {"total_docs", total_docs_}};
  }

  static Vocabulary from_json(const nlohmann::json& j) {
    try {
      if (j.at("version").get<int>() != kVersion) throw InputError("unsupported vocabulary version");
      return Vocabulary(j.at("tokens").get<std::vector<std::string>>(), j.at("doc_freq").get<std::vector<int>>(),
                        j.at("total_docs").get<std::size_t>());
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("malformed vocabulary: ") + e.what());
    } catch (const std::invalid_argument& e) {
      throw InputError(std::string("malformed vocabulary: ") + e.what());
    }
  }

 private:
  std::vector<std::string> tokens_;
  std::vector<int> doc_freq_;
  std::size_t total_docs_ = 0;
  std::unordered_map<std::string, int> index_;
};

struct VocabularyOptions {
  int min_df = 1;
  std::unordered_set<std::string> stopwords;
  std::optional<std::size_t> max_features;
};

/// Ids are assigned by descending total frequency, ties lexicographic.
/// Stopwords and tokens with doc_freq < min_df are removed before the
/// max_features cut.
inline Vocabulary build_vocabulary(std::span<const std::vector<std::string>> docs, const VocabularyOptions& opts) {
  if (opts.min_df < 1) throw std::invalid_argument("build_vocabulary: min_df must be >= 1");
  struct Stat {
    long long total = 0;
    int df = 0;
    std::size_t last_doc = static_cast<std::size_t>(-1);
  };
  std::map<std::string, Stat> stats;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (const auto& tok : docs[d]) {
      if (opts.stopwords.count(tok)) continue;
      auto& s = stats[tok];
      ++s.total;
      if (s.last_doc != d) {
        s.last_doc = d;
        ++s.df;
      }
    }
  }
  std::vector<std::pair<std::string, Stat>> kept;
  for (auto& [tok, s] : stats)
    if (s.df >= opts.min_df) kept.emplace_back(tok, s);
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second.total != b.second.total) return a.second.total > b.second.total;
    return a.first < b.first;
  });
  if (opts.max_features && kept.size() > *opts.max_features) kept.resize(*opts.max_features);
  if (kept.empty()) throw std::invalid_argument("build_vocabulary: resulting vocabulary is empty");
  std::vector<std::string> tokens;
  std::vector<int> df;
  for (auto& [tok, s] : kept) {
    tokens.push_back(tok);
    df.push_back(s.df);
  }
  return Vocabulary(std::move(tokens), std::move(df), docs.size());
}

// ---------------------------------------------------------------------------
// Documents

struct Document {
  std::vector<int> tokens;
  std::string source_id;
  Timestamp timestamp{};

  bool empty() const { return tokens.empty(); }
  bool operator==(const Document&) const = default;
};

inline std::vector<int> to_token_ids(std::span<const std::string> tokens, const Vocabulary& vocab) {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens)
    if (auto id = vocab.id(t)) ids.push_back(*id);
  return ids;
}

/// Out-of-vocabulary tokens are dropped; documents may come out empty.
inline std::vector<Document> to_documents(std::span<const TweetRecord> records, const Vocabulary& vocab) {
  std::vector<Document> docs;
  docs.reserve(records.size());
  for (const auto& r : records) {
    const auto toks = tokenize(r.text);
    docs.push_back({to_token_ids(toks, vocab), r.id, r.created_at});
  }
  return docs;
}

}  // namespace opminer::text
