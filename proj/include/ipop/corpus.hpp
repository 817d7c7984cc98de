#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace ipop {

inline constexpr std::int64_t kSecondsPerDay = 86400;

/// One social post's metadata record.
struct Post {
  std::string post_id;
  std::string user_id;
  std::int64_t upload_time = 0;  // seconds since epoch
  std::int64_t likes = 0;
  std::string caption;
  std::int64_t media_count = 1;
  bool is_video = false;

  bool operator==(const Post&) const = default;
};

/// Caption broken into the parts that matter for pair mining.
struct CaptionInfo {
  std::multiset<std::string> hashtags;  // lowercased, with leading '#'
  std::multiset<std::string> mentions;  // lowercased, with leading '@'
  int word_count = 0;                   // tokens that are neither of the above

  bool operator==(const CaptionInfo&) const = default;
};

struct CorpusStats {
  std::size_t n_posts = 0;
  std::size_t n_users = 0;
  double mean_likes = 0.0;
  double proportion_no_hashtag = 0.0;
  double proportion_no_mention = 0.0;
  double proportion_no_caption = 0.0;
  double mean_caption_words = 0.0;
};

struct Diagnostic {
  std::size_t line = 0;  // 1-based
  std::string message;
};

struct ParseResult {
  std::vector<Post> posts;
  std::vector<Diagnostic> diagnostics;
};

/// Parses one JSON object per line. Blank lines are skipped; malformed records
/// and duplicate post ids are reported in `diagnostics` and dropped.
ParseResult parse_posts(std::istream& in);

/// Throws std::runtime_error if the file cannot be opened.
ParseResult load_posts(const std::filesystem::path& path);

std::string serialize_post(const Post& post);
void write_posts(std::ostream& out, const std::vector<Post>& posts);

/// Splits on unicode whitespace and case-folds every token.
CaptionInfo analyze_caption(std::string_view caption);

/// Keeps posts with >= 50 likes, a single non-video image, and an age of at
/// least 30 days relative to `reference_time`.
std::vector<Post> filter_candidates(const std::vector<Post>& posts, std::int64_t reference_time);

bool is_candidate(const Post& post, std::int64_t reference_time);

/// S = ln(1 + likes).
double log_likes(std::int64_t likes);

/// Throws std::invalid_argument on an empty list.
CorpusStats corpus_stats(const std::vector<Post>& posts);

void write_stats_csv(std::ostream& out, const CorpusStats& stats);

namespace detail {

/// Decodes UTF-8 leniently; invalid bytes are passed through as U+FFFD.
std::vector<char32_t> decode_utf8(std::string_view s);
std::string encode_utf8(const std::vector<char32_t>& cps);
bool is_unicode_space(char32_t c);
char32_t simple_lower(char32_t c);

}  // namespace detail

}  // namespace ipop
