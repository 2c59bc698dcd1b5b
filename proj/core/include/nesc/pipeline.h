#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "nesc/calibration.h"
#include "nesc/corpus.h"
#include "nesc/featurize.h"
#include "nesc/nesc_model.h"
#include "nesc/ner_model.h"
#include "nesc/samples.h"

namespace nesc {

// Evaluation-mode encoder outputs for every sentence of the corpus.
std::vector<Tensor> encode_corpus(const Corpus& corpus, const EmbeddingTable& table,
                                  const NerModel& ner);

// Window slices for every sample of the dataset, using the dataset's k.
std::vector<WindowExample> window_examples(const NescDataset& dataset,
                                           const std::vector<Tensor>& encoder_outputs);

/// Trains a NESC head on windows cut from the frozen NER encoder. The encoder
/// runs with dropout off and is never updated. Throws UsageError when the
/// dataset was built for a different context size than config.context.
NescTrainingResult train_nesc(const NescDataset& dataset, const Corpus& corpus,
                              const EmbeddingTable& table, const NerModel& ner,
                              const NescConfig& config, Rng& rng,
                              const std::function<void(std::size_t, double)>& on_epoch = {});

/// P(span is an entity) for one sentence: encode, window, slice, score and
/// optionally calibrate.
double score_span(const FeatureSequence& sentence, const EntitySpan& span, const NerModel& ner,
                  const NescModel& nesc, const IsotonicCalibrator* calibrator = nullptr);

// Raw (or calibrated) scores for every sample of the dataset, in order.
std::vector<double> score_dataset(const NescDataset& dataset,
                                  const std::vector<Tensor>& encoder_outputs,
                                  const NescModel& nesc,
                                  const IsotonicCalibrator* calibrator = nullptr);

std::vector<int> dataset_targets(const NescDataset& dataset);

}  // namespace nesc
