#include "nesc/tagset.h"

namespace nesc {
namespace {

constexpr std::array<std::string_view, kNumLabels> kLabelNames = {
    "O",        "B-Person",       "I-Person",       "B-Place",
    "I-Place",  "B-Product",      "I-Product",      "B-Organization",
    "I-Organization", "B-Other",  "I-Other",
};

constexpr std::array<std::string_view, kNumEntityTypes> kTypeNames = {
    "Person", "Place", "Product", "Organization", "Other"};

constexpr std::array<std::string_view, kNumPosTags> kPosNames = {
    "ADJ", "ADP",   "ADV",   "AUX",   "CCONJ", "DET", "INTJ", "NOUN", "NUM",
    "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X"};

}  // namespace

std::string_view label_name(Label l) { return kLabelNames[index_of(l)]; }

std::string_view entity_type_name(EntityType t) {
  return kTypeNames[static_cast<std::size_t>(t)];
}

std::optional<Label> parse_label(std::string_view name) {
  if (name == "O-not-an-entity") return Label::kO;
  for (std::size_t i = 0; i < kNumLabels; ++i) {
    if (kLabelNames[i] == name) return label_at(i);
  }
  return std::nullopt;
}

std::optional<EntityType> parse_entity_type(std::string_view name) {
  for (std::size_t i = 0; i < kNumEntityTypes; ++i) {
    if (kTypeNames[i] == name) return static_cast<EntityType>(i);
  }
  return std::nullopt;
}

std::string_view pos_name(Pos p) { return kPosNames[static_cast<std::size_t>(p)]; }

std::optional<Pos> parse_pos(std::string_view name) {
  for (std::size_t i = 0; i < kNumPosTags; ++i) {
    if (kPosNames[i] == name) return static_cast<Pos>(i);
  }
  return std::nullopt;
}

}  // namespace nesc
