#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include "nesc/nesc_model.h"
#include "nesc/ner_model.h"
#include "nesc/samples.h"

namespace nesc {

/// Every tunable of the pipeline. Serialized as `key=value` lines, e.g.
///   ner.hidden=100
///   nesc.context=2
///   sampler.random_negatives_per_sentence=2
struct PipelineConfig {
  NerConfig ner;
  NescConfig nesc;
  SamplerConfig sampler;
};

// Unknown keys and malformed values raise DataError with source:line.
// Blank lines and lines starting with '#' are skipped.
PipelineConfig parse_config(std::istream& in, std::string_view source,
                            PipelineConfig base = {});
PipelineConfig load_config(const std::string& path, PipelineConfig base = {});
// Sets one key; returns false when the key is unknown.
bool set_config_value(PipelineConfig& config, std::string_view key, std::string_view value);
// Round-trips exactly through parse_config.
std::string format_config(const PipelineConfig& config);

}  // namespace nesc
