#include "ipop/corpus.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

#include "ipop/text.hpp"

namespace ipop {

namespace {

using Json = nlohmann::ordered_json;

constexpr std::int64_t kMinLikes = 50;
constexpr std::int64_t kMinAgeSeconds = 30 * kSecondsPerDay;

const Json& require_field(const Json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw std::invalid_argument(std::string("missing field '") + key + "'");
  return *it;
}

std::string require_string(const Json& obj, const char* key) {
  const Json& v = require_field(obj, key);
  if (!v.is_string()) throw std::invalid_argument(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

std::int64_t require_integer(const Json& obj, const char* key) {
  const Json& v = require_field(obj, key);
  if (!v.is_number_integer()) throw std::invalid_argument(std::string("field '") + key + "' must be an integer");
  if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX))
    throw std::invalid_argument(std::string("field '") + key + "' out of range");
  return v.get<std::int64_t>();
}

Post post_from_json(const Json& j) {
  if (!j.is_object()) throw std::invalid_argument("record is not an object");
  Post p;
  p.post_id = require_string(j, "post_id");
  if (p.post_id.empty()) throw std::invalid_argument("empty post_id");
  p.user_id = require_string(j, "user_id");
  p.upload_time = require_integer(j, "upload_time");
  p.likes = require_integer(j, "likes");
  if (p.likes < 0) throw std::invalid_argument("negative likes");
  p.caption = require_string(j, "caption");
  p.media_count = require_integer(j, "media_count");
  if (p.media_count < 1) throw std::invalid_argument("media_count must be >= 1");
  const Json& video = require_field(j, "is_video");
  if (!video.is_boolean()) throw std::invalid_argument("field 'is_video' must be a boolean");
  p.is_video = video.get<bool>();
  return p;
}

bool is_blank(std::string_view line) { return text::trim(line).empty(); }

}  // namespace

ParseResult parse_posts(std::istream& in) {
  ParseResult result;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    try {
      Post post = post_from_json(Json::parse(line));
      if (!seen.insert(post.post_id).second) {
        result.diagnostics.push_back({line_no, "duplicate post_id '" + post.post_id + "'"});
        continue;
      }
      result.posts.push_back(std::move(post));
    } catch (const Json::exception& e) {
      result.diagnostics.push_back({line_no, std::string("malformed record: ") + e.what()});
    } catch (const std::invalid_argument& e) {
      result.diagnostics.push_back({line_no, e.what()});
    }
  }
  if (in.bad()) throw std::runtime_error("read error while parsing posts");
  return result;
}

ParseResult load_posts(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open posts file: " + path.string());
  return parse_posts(in);
}

std::string serialize_post(const Post& post) {
  Json j;
  j["post_id"] = post.post_id;
  j["user_id"] = post.user_id;
  j["upload_time"] = post.upload_time;
  j["likes"] = post.likes;
  j["caption"] = post.caption;
  j["media_count"] = post.media_count;
  j["is_video"] = post.is_video;
  return j.dump(-1, ' ', false, Json::error_handler_t::replace);
}

void write_posts(std::ostream& out, const std::vector<Post>& posts) {
  for (const auto& p : posts) out << serialize_post(p) << '\n';
}

namespace detail {

std::vector<char32_t> decode_utf8(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    int len = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
      len = 1;
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    }
    bool ok = len > 0 && i + len <= s.size();
    for (int k = 1; ok && k < len; ++k) {
      const auto b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80) ok = false;
      cp = (cp << 6) | (b & 0x3F);
    }
    if (!ok) {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += static_cast<std::size_t>(len);
  }
  return out;
}

std::string encode_utf8(const std::vector<char32_t>& cps) {
  std::string out;
  out.reserve(cps.size());
  for (char32_t c : cps) {
    if (c < 0x80) {
      out += static_cast<char>(c);
    } else if (c < 0x800) {
      out += static_cast<char>(0xC0 | (c >> 6));
      out += static_cast<char>(0x80 | (c & 0x3F));
    } else if (c < 0x10000) {
      out += static_cast<char>(0xE0 | (c >> 12));
      out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (c & 0x3F));
    } else {
      out += static_cast<char>(0xF0 | (c >> 18));
      out += static_cast<char>(0x80 | ((c >> 12) & 0x3F));
      out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (c & 0x3F));
    }
  }
  return out;
}

// White_Space property from the Unicode character database.
bool is_unicode_space(char32_t c) {
  return (c >= 0x09 && c <= 0x0D) || c == 0x20 || c == 0x85 || c == 0xA0 || c == 0x1680 ||
         (c >= 0x2000 && c <= 0x200A) || c == 0x2028 || c == 0x2029 || c == 0x202F || c == 0x205F ||
         c == 0x3000;
}

// Covers ASCII, Latin-1, Latin Extended-A, Greek and Cyrillic capitals.
char32_t simple_lower(char32_t c) {
  if (c >= U'A' && c <= U'Z') return c + 0x20;
  if ((c >= 0xC0 && c <= 0xDE) && c != 0xD7) return c + 0x20;
  // Latin Extended-A pairs upper/lower case; the parity flips twice.
  if (c >= 0x100 && c <= 0x137 && c != 0x130) return c % 2 == 0 ? c + 1 : c;
  if (c >= 0x139 && c <= 0x148) return c % 2 == 1 ? c + 1 : c;
  if (c >= 0x14A && c <= 0x177) return c % 2 == 0 ? c + 1 : c;
  if (c == 0x178) return 0xFF;
  if (c >= 0x179 && c <= 0x17E) return c % 2 == 1 ? c + 1 : c;
  if (c >= 0x391 && c <= 0x3A9 && c != 0x3A2) return c + 0x20;
  if (c >= 0x410 && c <= 0x42F) return c + 0x20;
  if (c >= 0x400 && c <= 0x40F) return c + 0x50;
  return c;
}

}  // namespace detail

CaptionInfo analyze_caption(std::string_view caption) {
  CaptionInfo info;
  const auto cps = detail::decode_utf8(caption);
  std::vector<char32_t> token;
  auto flush = [&] {
    if (token.empty()) return;
    for (auto& c : token) c = detail::simple_lower(c);
    std::string tok = detail::encode_utf8(token);
    if (token.front() == U'#')
      info.hashtags.insert(std::move(tok));
    else if (token.front() == U'@')
      info.mentions.insert(std::move(tok));
    else
      ++info.word_count;
    token.clear();
  };
  for (char32_t c : cps) {
    if (detail::is_unicode_space(c))
      flush();
    else
      token.push_back(c);
  }
  flush();
  return info;
}

bool is_candidate(const Post& post, std::int64_t reference_time) {
  return post.likes >= kMinLikes && post.media_count == 1 && !post.is_video &&
         reference_time - post.upload_time >= kMinAgeSeconds;
}

std::vector<Post> filter_candidates(const std::vector<Post>& posts, std::int64_t reference_time) {
  std::vector<Post> out;
  for (const auto& p : posts)
    if (is_candidate(p, reference_time)) out.push_back(p);
  return out;
}

double log_likes(std::int64_t likes) {
  if (likes < 0) throw std::invalid_argument("likes must be non-negative");
  return std::log1p(static_cast<double>(likes));
}

CorpusStats corpus_stats(const std::vector<Post>& posts) {
  if (posts.empty()) throw std::invalid_argument("corpus_stats: empty corpus");
  CorpusStats s;
  s.n_posts = posts.size();
  std::unordered_set<std::string_view> users;
  double likes = 0.0, words = 0.0;
  std::size_t no_tag = 0, no_mention = 0, no_caption = 0;
  for (const auto& p : posts) {
    users.insert(p.user_id);
    likes += static_cast<double>(p.likes);
    const auto info = analyze_caption(p.caption);
    no_tag += info.hashtags.empty();
    no_mention += info.mentions.empty();
    no_caption += info.hashtags.empty() && info.mentions.empty() && info.word_count == 0;
    words += info.word_count;
  }
  const auto n = static_cast<double>(posts.size());
  s.n_users = users.size();
  s.mean_likes = likes / n;
  s.proportion_no_hashtag = static_cast<double>(no_tag) / n;
  s.proportion_no_mention = static_cast<double>(no_mention) / n;
  s.proportion_no_caption = static_cast<double>(no_caption) / n;
  s.mean_caption_words = words / n;
  return s;
}

void write_stats_csv(std::ostream& out, const CorpusStats& s) {
  out << "name,value\n";
  out << "n_posts," << s.n_posts << '\n';
  out << "n_users," << s.n_users << '\n';
  out << "mean_likes," << text::format_general(s.mean_likes) << '\n';
  out << "proportion_no_hashtag," << text::format_general(s.proportion_no_hashtag) << '\n';
  out << "proportion_no_mention," << text::format_general(s.proportion_no_mention) << '\n';
  out << "proportion_no_caption," << text::format_general(s.proportion_no_caption) << '\n';
  out << "mean_caption_words," << text::format_general(s.mean_caption_words) << '\n';
}

}  // namespace ipop
