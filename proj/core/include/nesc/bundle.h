#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "nesc/calibration.h"
#include "nesc/config.h"
#include "nesc/featurize.h"
#include "nesc/nesc_model.h"
#include "nesc/ner_model.h"
#include "nesc/samples.h"

namespace nesc {

inline constexpr int kBundleVersion = 1;

/// Everything needed to tag and score: trained weights, the sampler's length
/// distribution, the calibrator, and the identity of the embeddings used.
struct ModelBundle {
  PipelineConfig config;
  NerModel ner;
  std::optional<NescModel> nesc;
  LengthDistribution lengths;
  IsotonicCalibrator calibrator;
  std::uint64_t embedding_checksum = 0;
  // Set when the embeddings were hashed rather than loaded from a file.
  std::optional<std::uint64_t> hashed_embedding_seed;
};

/// File layout: a text header
///   NESC-BUNDLE <version>
///   meta.<key>=<value>        (embedding checksum / hashed seed)
///   config.<key>=<value>      (every PipelineConfig key)
///   array <name> <d0>x<d1>... (one line per array, in payload order)
///   end <total value count>
/// followed by the arrays as raw little-endian IEEE-754 doubles.
void write_bundle(std::ostream& out, const ModelBundle& bundle);
ModelBundle read_bundle(std::istream& in);

void save_bundle(const ModelBundle& bundle, const std::string& path);
ModelBundle load_bundle(const std::string& path);

// Rebuilds the table the bundle was trained with: hashed bundles ignore
// `embedding_path`; file bundles require it and check the checksum.
EmbeddingTable resolve_embeddings(const ModelBundle& bundle,
                                  const std::optional<std::string>& embedding_path);

}  // namespace nesc
