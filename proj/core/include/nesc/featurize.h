#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "nesc/tagset.h"

namespace nesc {

inline constexpr std::size_t kEmbeddingDim = 200;
inline constexpr std::size_t kSurfaceDim = 36;
inline constexpr std::size_t kPosDim = kNumPosTags;
inline constexpr std::size_t kTokenDim = kEmbeddingDim + kSurfaceDim + kPosDim;

// Value used for every active sparse indicator; roughly the magnitude of an
// embedding coordinate.
inline constexpr double kIndicatorValue = 0.1;

// Layout of the surface block: indices [0, 32) are single-special-character
// classes in the order of special_characters(), then these four flags.
inline constexpr std::size_t kHashtagIndex = 32;
inline constexpr std::size_t kHandleIndex = 33;
inline constexpr std::size_t kFirstCapIndex = 34;
inline constexpr std::size_t kAllCapsIndex = 35;

struct Token {
  std::string surface;
  // Byte offsets into the source text, half-open.
  std::size_t begin = 0;
  std::size_t end = 0;
  std::optional<Pos> pos;
};

using TokenVector = std::array<double, kTokenDim>;
using EmbeddingRow = std::array<double, kEmbeddingDim>;

/// Rule-based tweet tokenizer: splits on whitespace, detaches leading and
/// trailing punctuation one character at a time, and keeps URLs, @handles
/// and #hashtags whole. Offsets are UTF-8 byte offsets.
std::vector<Token> tokenize(std::string_view text);

// The 32 characters with their own surface indicator.
std::span<const std::string_view> special_characters();

bool is_hashtag(std::string_view surface);
bool is_handle(std::string_view surface);

std::array<double, kSurfaceDim> surface_features(std::string_view surface);
std::array<double, kPosDim> pos_one_hot(Pos tag);
// Parses a tag name first; unknown names raise DataError citing `where`.
std::array<double, kPosDim> pos_one_hot(std::string_view tag, std::string_view where);

/// Word embeddings keyed by surface form. Lookup is exact match, then
/// lowercase match, then the UNK row. A hashed table instead derives a
/// pseudo-random row from (seed, surface) so every form has a stable vector
/// without a file.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;

  // Embedding text format: `form v1 ... v200` per line, single spaces.
  // A line whose form is <UNK> sets the UNK row (default zero).
  static EmbeddingTable load(const std::string& path);
  static EmbeddingTable parse(std::istream& in, std::string_view source);
  static EmbeddingTable hashed(std::uint64_t seed);

  void add(std::string form, const EmbeddingRow& row);
  void set_unk(const EmbeddingRow& row) { unk_ = row; }

  EmbeddingRow lookup(std::string_view surface) const;
  bool contains(std::string_view form) const { return rows_.count(std::string(form)) > 0; }
  std::size_t vocabulary_size() const { return rows_.size(); }
  bool is_hashed() const { return hashed_seed_.has_value(); }

  // FNV-1a over the source bytes; for hashed tables, a digest of the seed.
  std::uint64_t checksum() const { return checksum_; }

 private:
  std::unordered_map<std::string, EmbeddingRow> rows_;
  EmbeddingRow unk_{};
  std::optional<std::uint64_t> hashed_seed_;
  std::uint64_t checksum_ = 0;
};

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 14695981039346656037ULL);

EmbeddingRow embed(const Token& token, const EmbeddingTable& table);
// [embedding | surface | pos]. Throws UsageError when token.pos is unset.
TokenVector vectorize(const Token& token, const EmbeddingTable& table);

}  // namespace nesc
