#include "nesc/config.h"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <vector>

#include "nesc/errors.h"

namespace nesc {
namespace {

struct Field {
  std::string_view key;
  std::function<bool(PipelineConfig&, std::string_view)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

template <typename T>
bool parse_number(std::string_view text, T& out) {
  T v{};
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size()) return false;
  out = v;
  return true;
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_number(std::size_t v) { return std::to_string(v); }

template <typename T>
Field field(std::string_view key, T PipelineConfig::*group, auto member) {
  return Field{
      key,
      [group, member](PipelineConfig& c, std::string_view text) {
        return parse_number(text, (c.*group).*member);
      },
      [group, member](const PipelineConfig& c) { return format_number((c.*group).*member); }};
}

template <typename T>
Field adam_field(std::string_view key, T PipelineConfig::*group, double AdamConfig::*member) {
  return Field{
      key,
      [group, member](PipelineConfig& c, std::string_view text) {
        return parse_number(text, (c.*group).adam.*member);
      },
      [group, member](const PipelineConfig& c) {
        return format_number((c.*group).adam.*member);
      }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> kFields = {
      field("ner.hidden", &PipelineConfig::ner, &NerConfig::hidden),
      field("ner.dropout", &PipelineConfig::ner, &NerConfig::dropout),
      field("ner.epochs", &PipelineConfig::ner, &NerConfig::epochs),
      field("ner.clip_norm", &PipelineConfig::ner, &NerConfig::clip_norm),
      adam_field("ner.learning_rate", &PipelineConfig::ner, &AdamConfig::learning_rate),
      adam_field("ner.beta1", &PipelineConfig::ner, &AdamConfig::beta1),
      adam_field("ner.beta2", &PipelineConfig::ner, &AdamConfig::beta2),
      adam_field("ner.epsilon", &PipelineConfig::ner, &AdamConfig::epsilon),
      field("nesc.hidden", &PipelineConfig::nesc, &NescConfig::hidden),
      field("nesc.context", &PipelineConfig::nesc, &NescConfig::context),
      field("nesc.epochs", &PipelineConfig::nesc, &NescConfig::epochs),
      field("nesc.clip_norm", &PipelineConfig::nesc, &NescConfig::clip_norm),
      adam_field("nesc.learning_rate", &PipelineConfig::nesc, &AdamConfig::learning_rate),
      adam_field("nesc.beta1", &PipelineConfig::nesc, &AdamConfig::beta1),
      adam_field("nesc.beta2", &PipelineConfig::nesc, &AdamConfig::beta2),
      adam_field("nesc.epsilon", &PipelineConfig::nesc, &AdamConfig::epsilon),
      field("sampler.random_negatives_per_sentence", &PipelineConfig::sampler,
            &SamplerConfig::random_negatives_per_sentence),
      field("sampler.max_attempts", &PipelineConfig::sampler, &SamplerConfig::max_attempts),
  };
  return kFields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

void sync_derived(PipelineConfig& c) {
  c.sampler.context = c.nesc.context;
  c.nesc.input_dim = 2 * c.ner.hidden;
}

}  // namespace

bool set_config_value(PipelineConfig& config, std::string_view key, std::string_view value) {
  for (const auto& f : fields()) {
    if (f.key == key) {
      if (!f.set(config, value)) {
        throw DataError("config: bad value '" + std::string(value) + "' for " + std::string(key));
      }
      sync_derived(config);
      return true;
    }
  }
  return false;
}

PipelineConfig parse_config(std::istream& in, std::string_view source, PipelineConfig base) {
  sync_derived(base);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto where = std::string(source) + ":" + std::to_string(line_no);
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) throw DataError(where + ": expected key=value");
    const auto key = trim(text.substr(0, eq));
    const auto value = trim(text.substr(eq + 1));
    try {
      if (!set_config_value(base, key, value)) {
        throw DataError("unknown config key '" + std::string(key) + "'");
      }
    } catch (const DataError& e) {
      throw DataError(where + ": " + e.what());
    }
  }
  return base;
}

PipelineConfig load_config(const std::string& path, PipelineConfig base) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file '" + path + "'");
  return parse_config(in, path, std::move(base));
}

std::string format_config(const PipelineConfig& config) {
  std::string out;
  for (const auto& f : fields()) {
    out += f.key;
    out += '=';
    out += f.get(config);
    out += '\n';
  }
  return out;
}

}  // namespace nesc
