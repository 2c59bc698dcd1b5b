#include "nesc/pipeline.h"

#include <string>

#include "nesc/errors.h"

namespace nesc {

std::vector<Tensor> encode_corpus(const Corpus& corpus, const EmbeddingTable& table,
                                  const NerModel& ner) {
  std::vector<Tensor> out;
  out.reserve(corpus.sentences.size());
  for (const auto& s : corpus.sentences) out.push_back(encode_sequence(featurize(s, table), ner));
  return out;
}

std::vector<WindowExample> window_examples(const NescDataset& dataset,
                                           const std::vector<Tensor>& encoder_outputs) {
  std::vector<WindowExample> out;
  out.reserve(dataset.samples.size());
  for (const auto& s : dataset.samples) {
    if (s.sentence >= encoder_outputs.size()) {
      throw DataError("sample refers to sentence " + std::to_string(s.sentence) +
                      " but the corpus has " + std::to_string(encoder_outputs.size()));
    }
    const auto& enc = encoder_outputs[s.sentence];
    if (s.end >= enc.rows()) {
      throw DataError("sample span [" + std::to_string(s.start) + ", " + std::to_string(s.end) +
                      "] exceeds sentence " + std::to_string(s.sentence));
    }
    const auto window = context_window(s.start, s.end, dataset.context, enc.rows());
    out.push_back(WindowExample{window_slice(enc, window), s.target});
  }
  return out;
}

NescTrainingResult train_nesc(const NescDataset& dataset, const Corpus& corpus,
                              const EmbeddingTable& table, const NerModel& ner,
                              const NescConfig& config, Rng& rng,
                              const std::function<void(std::size_t, double)>& on_epoch) {
  if (dataset.context != config.context) {
    throw UsageError("train_nesc: dataset built with context " + std::to_string(dataset.context) +
                     " but config uses " + std::to_string(config.context));
  }
  NescConfig head = config;
  head.input_dim = 2 * ner.config.hidden;
  const auto examples = window_examples(dataset, encode_corpus(corpus, table, ner));
  return train_nesc_head(examples, head, dataset.positive_weight, dataset.negative_weight, rng,
                         on_epoch);
}

double score_span(const FeatureSequence& sentence, const EntitySpan& span, const NerModel& ner,
                  const NescModel& nesc, const IsotonicCalibrator* calibrator) {
  if (span.start > span.end || span.end >= sentence.size()) {
    throw UsageError("score_span: span [" + std::to_string(span.start) + ", " +
                     std::to_string(span.end) + "] outside sentence of length " +
                     std::to_string(sentence.size()));
  }
  const Tensor enc = encode_sequence(sentence, ner);
  const auto window = context_window(span.start, span.end, nesc.config.context, enc.rows());
  const double raw = nesc_score(window_slice(enc, window), nesc);
  return calibrator && !calibrator->empty() ? calibrate(raw, *calibrator) : raw;
}

std::vector<double> score_dataset(const NescDataset& dataset,
                                  const std::vector<Tensor>& encoder_outputs,
                                  const NescModel& nesc, const IsotonicCalibrator* calibrator) {
  if (dataset.context != nesc.config.context) {
    throw UsageError("score_dataset: dataset context " + std::to_string(dataset.context) +
                     " differs from model context " + std::to_string(nesc.config.context));
  }
  std::vector<double> scores;
  scores.reserve(dataset.samples.size());
  for (const auto& ex : window_examples(dataset, encoder_outputs)) {
    const double raw = nesc_score(ex.slice, nesc);
    scores.push_back(calibrator && !calibrator->empty() ? calibrate(raw, *calibrator) : raw);
  }
  return scores;
}

std::vector<int> dataset_targets(const NescDataset& dataset) {
  std::vector<int> out;
  out.reserve(dataset.samples.size());
  for (const auto& s : dataset.samples) out.push_back(s.target);
  return out;
}

}  // namespace nesc
