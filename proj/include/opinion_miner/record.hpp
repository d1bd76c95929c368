#pragma once

#include <string>
#include <vector>

#include "opinion_miner/timeutil.hpp"

namespace opminer {

/// One social-media post. `mentions` and `hashtags` are always the entities
/// extractable from `text` (handles without '@', tags without '#').
struct TweetRecord {
  std::string id;
  Timestamp created_at{};
  std::string user;
  std::string text;
  std::vector<std::string> mentions;
  std::vector<std::string> hashtags;

  bool operator==(const TweetRecord&) const = default;
};

}  // namespace opminer
