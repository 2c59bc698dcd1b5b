#include "nesc/corpus.h"

#include <fstream>
#include <istream>
#include <ostream>

#include "nesc/errors.h"

namespace nesc {

Corpus load_conll(const std::string& path, Split split) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus file '" + path + "'");
  return parse_conll(in, path, split);
}

Corpus parse_conll(std::istream& in, std::string_view source, Split split) {
  Corpus corpus;
  corpus.split = split;
  Sentence current;
  std::string line;
  std::size_t line_no = 0;

  auto flush = [&] {
    if (!current.tokens.empty()) corpus.sentences.push_back(std::move(current));
    current = Sentence{};
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    const auto where = std::string(source) + ":" + std::to_string(line_no);

    std::vector<std::string_view> cols;
    std::string_view rest = line;
    for (;;) {
      const auto tab = rest.find('\t');
      cols.push_back(rest.substr(0, tab));
      if (tab == std::string_view::npos) break;
      rest.remove_prefix(tab + 1);
    }
    if (cols.size() != 3) {
      throw DataError(where + ": expected 3 tab-separated columns (surface, pos, label), found " +
                      std::to_string(cols.size()));
    }
    if (cols[0].empty()) throw DataError(where + ": empty token surface");

    Pos pos = Pos::kX;
    if (cols[1] != "_") {
      auto parsed = parse_pos(cols[1]);
      if (!parsed) throw DataError(where + ": unknown POS tag '" + std::string(cols[1]) + "'");
      pos = *parsed;
    }
    auto label = parse_label(cols[2]);
    if (!label) throw DataError(where + ": unknown label '" + std::string(cols[2]) + "'");

    if (current.tokens.empty()) current.first_line = line_no;
    current.tokens.emplace_back(cols[0]);
    current.pos.push_back(pos);
    current.labels.push_back(*label);
  }
  flush();
  return corpus;
}

void write_conll(std::ostream& out, const Corpus& corpus) {
  for (std::size_t s = 0; s < corpus.sentences.size(); ++s) {
    const auto& sentence = corpus.sentences[s];
    if (s > 0) out << '\n';
    for (std::size_t t = 0; t < sentence.size(); ++t) {
      out << sentence.tokens[t] << '\t' << pos_name(sentence.pos[t]) << '\t'
          << label_name(sentence.labels[t]) << '\n';
    }
  }
}

std::vector<std::vector<Label>> corpus_labels(const Corpus& corpus) {
  std::vector<std::vector<Label>> out;
  out.reserve(corpus.sentences.size());
  for (const auto& s : corpus.sentences) out.push_back(s.labels);
  return out;
}

std::vector<Token> sentence_tokens(const Sentence& sentence) {
  std::vector<Token> tokens;
  std::size_t offset = 0;
  for (std::size_t t = 0; t < sentence.size(); ++t) {
    const auto& surface = sentence.tokens[t];
    tokens.push_back(Token{surface, offset, offset + surface.size(),
                           t < sentence.pos.size() ? std::optional(sentence.pos[t]) : std::nullopt});
    offset += surface.size() + 1;
  }
  return tokens;
}

FeatureSequence featurize(std::span<const Token> tokens, const EmbeddingTable& table) {
  FeatureSequence out;
  out.reserve(tokens.size());
  for (const auto& token : tokens) {
    const auto v = vectorize(token, table);
    out.emplace_back(v.begin(), v.end());
  }
  return out;
}

FeatureSequence featurize(const Sentence& sentence, const EmbeddingTable& table) {
  return featurize(sentence_tokens(sentence), table);
}

std::vector<LabeledSequence> labeled_sequences(const Corpus& corpus, const EmbeddingTable& table) {
  std::vector<LabeledSequence> out;
  out.reserve(corpus.sentences.size());
  for (const auto& s : corpus.sentences) out.push_back({featurize(s, table), s.labels});
  return out;
}

}  // namespace nesc
