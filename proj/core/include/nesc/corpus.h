#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nesc/featurize.h"
#include "nesc/ner_model.h"
#include "nesc/tagset.h"

namespace nesc {

enum class Split { kTrain, kValidation, kTest };

struct Sentence {
  std::vector<std::string> tokens;
  std::vector<Pos> pos;
  std::vector<Label> labels;
  std::size_t first_line = 0;  // 1-based source line of the first token

  std::size_t size() const { return tokens.size(); }
  friend bool operator==(const Sentence& a, const Sentence& b) {
    return a.tokens == b.tokens && a.pos == b.pos && a.labels == b.labels;
  }
};

struct Corpus {
  std::vector<Sentence> sentences;
  Split split = Split::kTrain;
};

/// CoNLL-style TSV: `surface<TAB>pos<TAB>label` per token, blank line between
/// sentences. A POS of "_" means untagged and maps to X. Errors carry
/// `source:line`.
Corpus load_conll(const std::string& path, Split split = Split::kTrain);
Corpus parse_conll(std::istream& in, std::string_view source, Split split = Split::kTrain);
void write_conll(std::ostream& out, const Corpus& corpus);

std::vector<std::vector<Label>> corpus_labels(const Corpus& corpus);

// Tokens of a pre-tokenized sentence, offsets as if joined by single spaces.
std::vector<Token> sentence_tokens(const Sentence& sentence);

FeatureSequence featurize(std::span<const Token> tokens, const EmbeddingTable& table);
FeatureSequence featurize(const Sentence& sentence, const EmbeddingTable& table);

std::vector<LabeledSequence> labeled_sequences(const Corpus& corpus, const EmbeddingTable& table);

}  // namespace nesc
