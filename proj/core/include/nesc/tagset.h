#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace nesc {

enum class EntityType : std::uint8_t { kPerson, kPlace, kProduct, kOrganization, kOther };

inline constexpr std::size_t kNumEntityTypes = 5;

/// IOB labels. O sits at index 0 and each B-/I- pair is adjacent, so
/// B-X = 1 + 2*type and I-X = 2 + 2*type.
enum class Label : std::uint8_t {
  kO,
  kBPerson,
  kIPerson,
  kBPlace,
  kIPlace,
  kBProduct,
  kIProduct,
  kBOrganization,
  kIOrganization,
  kBOther,
  kIOther,
};

inline constexpr std::size_t kNumLabels = 11;

constexpr std::size_t index_of(Label l) { return static_cast<std::size_t>(l); }
constexpr Label label_at(std::size_t i) { return static_cast<Label>(i); }

constexpr bool is_begin(Label l) { return l != Label::kO && index_of(l) % 2 == 1; }
constexpr bool is_inside(Label l) { return l != Label::kO && index_of(l) % 2 == 0; }

// Entity type of a B-/I- label; undefined for O.
constexpr EntityType type_of(Label l) {
  return static_cast<EntityType>((index_of(l) - 1) / 2);
}
constexpr Label begin_label(EntityType t) {
  return static_cast<Label>(1 + 2 * static_cast<std::size_t>(t));
}
constexpr Label inside_label(EntityType t) {
  return static_cast<Label>(2 + 2 * static_cast<std::size_t>(t));
}

std::string_view label_name(Label l);
std::string_view entity_type_name(EntityType t);
// Accepts "O", "O-not-an-entity", and "B-Place"-style names.
std::optional<Label> parse_label(std::string_view name);
std::optional<EntityType> parse_entity_type(std::string_view name);

/// The 17-tag Universal POS inventory.
enum class Pos : std::uint8_t {
  kAdj,
  kAdp,
  kAdv,
  kAux,
  kCconj,
  kDet,
  kIntj,
  kNoun,
  kNum,
  kPart,
  kPron,
  kPropn,
  kPunct,
  kSconj,
  kSym,
  kVerb,
  kX,
};

inline constexpr std::size_t kNumPosTags = 17;

std::string_view pos_name(Pos p);
std::optional<Pos> parse_pos(std::string_view name);

}  // namespace nesc
