#include "nesc/featurize.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <random>
#include <sstream>

#include "nesc/errors.h"

namespace nesc {
namespace {

constexpr std::array<std::string_view, 32> kSpecialChars = {
    "%", "/", ".", "!", "?", ",", ";", ":", "'", "\"", "(", ")", "[", "]", "{", "}",
    "@", "#", "$", "&", "*", "+", "-", "=", "<", ">", "|", "\\", "~", "^", "_", "`"};

// Multi-byte punctuation that the tokenizer detaches like ASCII punctuation.
constexpr std::array<std::string_view, 7> kUnicodePunct = {
    "…", "“", "”", "‘", "’", "«", "»"};

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_ascii_punct(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < 0x80 && std::ispunct(u);
}

bool is_word_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || std::isalnum(u) || c == '_';
}

bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_lower(char c) { return c >= 'a' && c <= 'z'; }

// Length in bytes of the punctuation mark starting at s, or 0.
std::size_t punct_at(std::string_view s) {
  if (s.empty()) return 0;
  if (is_ascii_punct(s.front())) return 1;
  for (auto p : kUnicodePunct) {
    if (s.substr(0, p.size()) == p) return p.size();
  }
  return 0;
}

// Length in bytes of the punctuation mark ending s, or 0.
std::size_t punct_before_end(std::string_view s) {
  if (s.empty()) return 0;
  if (is_ascii_punct(s.back())) return 1;
  for (auto p : kUnicodePunct) {
    if (s.size() >= p.size() && s.substr(s.size() - p.size()) == p) return p.size();
  }
  return 0;
}

bool starts_url(std::string_view s) {
  return s.starts_with("http://") || s.starts_with("https://") || s.starts_with("www.");
}

constexpr std::string_view kUrlTrailing = ".,!?;:)]}\"'";

void tokenize_chunk(std::string_view text, std::size_t begin, std::size_t end,
                    std::vector<Token>& out) {
  auto emit = [&](std::size_t b, std::size_t e) {
    out.push_back(Token{std::string(text.substr(b, e - b)), b, e, std::nullopt});
  };

  std::string_view chunk = text.substr(begin, end - begin);
  if (starts_url(chunk)) {
    std::size_t core_end = end;
    while (core_end > begin + 1 &&
           kUrlTrailing.find(text[core_end - 1]) != std::string_view::npos) {
      --core_end;
    }
    emit(begin, core_end);
    for (std::size_t p = core_end; p < end; ++p) emit(p, p + 1);
    return;
  }

  std::size_t b = begin;
  while (b < end) {
    std::string_view rest = text.substr(b, end - b);
    if ((rest.front() == '@' || rest.front() == '#') && rest.size() > 1 &&
        is_word_char(rest[1])) {
      break;
    }
    const std::size_t n = punct_at(rest);
    if (n == 0) break;
    emit(b, b + n);
    b += n;
  }
  if (b == end) return;

  std::vector<std::pair<std::size_t, std::size_t>> trailing;
  std::size_t e = end;
  while (e > b) {
    std::string_view core = text.substr(b, e - b);
    const std::size_t n = punct_before_end(core);
    if (n == 0 || n == core.size()) break;
    trailing.emplace_back(e - n, e);
    e -= n;
  }
  emit(b, e);
  for (auto it = trailing.rbegin(); it != trailing.rend(); ++it) emit(it->first, it->second);
}

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    if (i == text.size()) break;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    tokenize_chunk(text, i, j, tokens);
    i = j;
  }
  return tokens;
}

std::span<const std::string_view> special_characters() { return kSpecialChars; }

bool is_hashtag(std::string_view s) {
  return s.size() > 1 && s.front() == '#' &&
         std::all_of(s.begin() + 1, s.end(), is_word_char);
}

bool is_handle(std::string_view s) {
  return s.size() > 1 && s.front() == '@' &&
         std::all_of(s.begin() + 1, s.end(), is_word_char);
}

std::array<double, kSurfaceDim> surface_features(std::string_view surface) {
  std::array<double, kSurfaceDim> f{};
  if (surface.empty()) return f;

  // A run of one repeated special character ("!", "...") gets its class bit.
  const char first = surface.front();
  if (std::all_of(surface.begin(), surface.end(), [&](char c) { return c == first; })) {
    for (std::size_t i = 0; i < kSpecialChars.size(); ++i) {
      if (kSpecialChars[i].front() == first) {
        f[i] = kIndicatorValue;
        break;
      }
    }
  }

  std::string_view body = surface;
  if (is_hashtag(surface)) {
    f[kHashtagIndex] = kIndicatorValue;
    body.remove_prefix(1);
  } else if (is_handle(surface)) {
    f[kHandleIndex] = kIndicatorValue;
    body.remove_prefix(1);
  }

  const bool any_upper = std::any_of(body.begin(), body.end(), is_upper);
  const bool any_lower = std::any_of(body.begin(), body.end(), is_lower);
  if (any_upper && !any_lower) {
    f[kAllCapsIndex] = kIndicatorValue;
  } else if (!body.empty() && is_upper(body.front())) {
    f[kFirstCapIndex] = kIndicatorValue;
  }
  return f;
}

std::array<double, kPosDim> pos_one_hot(Pos tag) {
  std::array<double, kPosDim> f{};
  f[static_cast<std::size_t>(tag)] = kIndicatorValue;
  return f;
}

std::array<double, kPosDim> pos_one_hot(std::string_view tag, std::string_view where) {
  auto pos = parse_pos(tag);
  if (!pos) {
    throw DataError(std::string(where) + ": unknown POS tag '" + std::string(tag) + "'");
  }
  return pos_one_hot(*pos);
}

// ---------------------------------------------------------------------------
// EmbeddingTable

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

EmbeddingTable EmbeddingTable::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open embedding file '" + path + "'");
  return parse(in, path);
}

EmbeddingTable EmbeddingTable::parse(std::istream& in, std::string_view source) {
  EmbeddingTable table;
  std::uint64_t checksum = fnv1a64("");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    checksum = fnv1a64(line, checksum);
    checksum = fnv1a64("\n", checksum);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    auto where = [&] { return std::string(source) + ":" + std::to_string(line_no); };
    const auto space = line.find(' ');
    if (space == std::string::npos || space == 0) {
      throw DataError(where() + ": expected a form followed by " +
                      std::to_string(kEmbeddingDim) + " values");
    }
    std::string form = line.substr(0, space);
    EmbeddingRow row{};
    std::size_t count = 0;
    const char* p = line.data() + space + 1;
    const char* end = line.data() + line.size();
    while (p < end) {
      if (*p == ' ') {
        ++p;
        continue;
      }
      double v = 0;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc() || count >= kEmbeddingDim) {
        throw DataError(where() + ": expected exactly " +
                        std::to_string(kEmbeddingDim) + " numeric values");
      }
      row[count++] = v;
      p = next;
    }
    if (count != kEmbeddingDim) {
      throw DataError(where() + ": expected " + std::to_string(kEmbeddingDim) +
                      " values, found " + std::to_string(count));
    }
    if (form == "<UNK>") {
      table.unk_ = row;
    } else {
      table.rows_[std::move(form)] = row;
    }
  }
  table.checksum_ = checksum;
  return table;
}

EmbeddingTable EmbeddingTable::hashed(std::uint64_t seed) {
  EmbeddingTable table;
  table.hashed_seed_ = seed;
  table.checksum_ = fnv1a64("hashed:" + std::to_string(seed));
  return table;
}

void EmbeddingTable::add(std::string form, const EmbeddingRow& row) {
  rows_[std::move(form)] = row;
}

EmbeddingRow EmbeddingTable::lookup(std::string_view surface) const {
  if (hashed_seed_) {
    const std::uint64_t h = fnv1a64(surface);
    std::seed_seq seq{static_cast<std::uint32_t>(*hashed_seed_),
                      static_cast<std::uint32_t>(*hashed_seed_ >> 32),
                      static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
    std::mt19937_64 gen(seq);
    std::uniform_real_distribution<double> dist(-0.5, 0.5);
    EmbeddingRow row;
    for (auto& v : row) v = dist(gen);
    return row;
  }
  if (auto it = rows_.find(std::string(surface)); it != rows_.end()) return it->second;
  std::string lower(surface);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](char c) {
    return is_upper(c) ? static_cast<char>(c - 'A' + 'a') : c;
  });
  if (auto it = rows_.find(lower); it != rows_.end()) return it->second;
  return unk_;
}

EmbeddingRow embed(const Token& token, const EmbeddingTable& table) {
  return table.lookup(token.surface);
}

TokenVector vectorize(const Token& token, const EmbeddingTable& table) {
  if (!token.pos) {
    throw UsageError("vectorize: token '" + token.surface + "' has no POS tag");
  }
  TokenVector v{};
  const auto emb = embed(token, table);
  const auto surf = surface_features(token.surface);
  const auto pos = pos_one_hot(*token.pos);
  auto out = std::copy(emb.begin(), emb.end(), v.begin());
  out = std::copy(surf.begin(), surf.end(), out);
  std::copy(pos.begin(), pos.end(), out);
  return v;
}

}  // namespace nesc
