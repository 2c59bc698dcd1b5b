#include "nesc/bundle.h"

#include <bit>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <vector>

#include "nesc/errors.h"

namespace nesc {
namespace {

constexpr std::string_view kMagic = "NESC-BUNDLE";

struct NamedArray {
  std::string name;
  Tensor tensor;
};

std::vector<NamedArray> collect_arrays(const ModelBundle& b) {
  std::vector<NamedArray> arrays;
  for (const auto& p : b.ner.params) arrays.push_back({"ner." + p.name, p.value});
  if (b.nesc) {
    for (const auto& p : b.nesc->params) arrays.push_back({"nesc." + p.name, p.value});
    arrays.push_back({"nesc.class_weights",
                      Tensor::vector({b.nesc->positive_weight, b.nesc->negative_weight})});
  }
  if (!b.lengths.empty()) {
    std::vector<double> lengths, probs;
    for (const auto& [len, p] : b.lengths.pmf()) {
      lengths.push_back(static_cast<double>(len));
      probs.push_back(p);
    }
    arrays.push_back({"lengths.values", Tensor::vector(std::move(lengths))});
    arrays.push_back({"lengths.probabilities", Tensor::vector(std::move(probs))});
  }
  if (!b.calibrator.empty()) {
    arrays.push_back({"calibrator.thresholds", Tensor::vector(b.calibrator.thresholds())});
    arrays.push_back({"calibrator.values", Tensor::vector(b.calibrator.values())});
  }
  return arrays;
}

void write_doubles(std::ostream& out, std::span<const double> values) {
  for (double v : values) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    unsigned char bytes[8];
    for (int k = 0; k < 8; ++k) bytes[k] = static_cast<unsigned char>(bits >> (8 * k));
    out.write(reinterpret_cast<const char*>(bytes), 8);
  }
}

double decode_double(const unsigned char* bytes) {
  std::uint64_t bits = 0;
  for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(bytes[k]) << (8 * k);
  return std::bit_cast<double>(bits);
}

Shape parse_shape(const std::string& text) {
  Shape shape;
  std::stringstream ss(text);
  std::string dim;
  while (std::getline(ss, dim, 'x')) {
    std::size_t pos = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(dim, &pos);
    } catch (const std::exception&) {
      throw FormatError("corrupt bundle: bad shape '" + text + "'");
    }
    if (pos != dim.size() || v == 0) throw FormatError("corrupt bundle: bad shape '" + text + "'");
    shape.push_back(v);
  }
  if (shape.empty()) throw FormatError("corrupt bundle: empty shape");
  return shape;
}

void load_params(ParameterSet& params, std::string_view prefix,
                 std::map<std::string, Tensor>& arrays) {
  for (auto& p : params) {
    const std::string key = std::string(prefix) + p.name;
    auto it = arrays.find(key);
    if (it == arrays.end()) throw FormatError("bundle is missing array '" + key + "'");
    if (it->second.shape() != p.value.shape()) {
      throw FormatError("bundle array '" + key + "' has shape " +
                        shape_string(it->second.shape()) + ", config implies " +
                        shape_string(p.value.shape()));
    }
    p.value = std::move(it->second);
    p.grad = Tensor(p.value.shape());
    arrays.erase(it);
  }
}

}  // namespace

void write_bundle(std::ostream& out, const ModelBundle& bundle) {
  const auto arrays = collect_arrays(bundle);
  out << kMagic << ' ' << kBundleVersion << '\n';
  char hex[32];
  std::snprintf(hex, sizeof hex, "%016" PRIx64, bundle.embedding_checksum);
  out << "meta.embedding_checksum=" << hex << '\n';
  if (bundle.hashed_embedding_seed) {
    out << "meta.hashed_embedding_seed=" << *bundle.hashed_embedding_seed << '\n';
  }
  std::istringstream config(format_config(bundle.config));
  std::string line;
  while (std::getline(config, line)) out << "config." << line << '\n';
  std::size_t total = 0;
  for (const auto& a : arrays) {
    out << "array " << a.name << ' ';
    for (std::size_t d = 0; d < a.tensor.shape().size(); ++d) {
      out << (d ? "x" : "") << a.tensor.shape()[d];
    }
    out << '\n';
    total += a.tensor.size();
  }
  out << "end " << total << '\n';
  for (const auto& a : arrays) write_doubles(out, a.tensor.data());
}

ModelBundle read_bundle(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("corrupt bundle: empty file");
  {
    std::istringstream head(line);
    std::string magic;
    int version = 0;
    if (!(head >> magic >> version) || magic != kMagic) {
      throw FormatError("corrupt bundle: missing " + std::string(kMagic) + " header");
    }
    if (version != kBundleVersion) {
      throw FormatError("unsupported bundle version " + std::to_string(version) +
                        "; this build reads version " + std::to_string(kBundleVersion));
    }
  }

  ModelBundle bundle;
  std::vector<std::pair<std::string, Shape>> directory;
  std::optional<std::size_t> total;
  bool saw_checksum = false;
  while (std::getline(in, line)) {
    if (line.starts_with("end ")) {
      try {
        total = std::stoull(line.substr(4));
      } catch (const std::exception&) {
        throw FormatError("corrupt bundle: bad end marker");
      }
      break;
    }
    if (line.starts_with("meta.embedding_checksum=")) {
      try {
        bundle.embedding_checksum = std::stoull(line.substr(24), nullptr, 16);
      } catch (const std::exception&) {
        throw FormatError("corrupt bundle: bad checksum");
      }
      saw_checksum = true;
    } else if (line.starts_with("meta.hashed_embedding_seed=")) {
      try {
        bundle.hashed_embedding_seed = std::stoull(line.substr(27));
      } catch (const std::exception&) {
        throw FormatError("corrupt bundle: bad embedding seed");
      }
    } else if (line.starts_with("config.")) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw FormatError("corrupt bundle: bad config line");
      try {
        if (!set_config_value(bundle.config, line.substr(7, eq - 7), line.substr(eq + 1))) {
          throw FormatError("corrupt bundle: unknown config key in '" + line + "'");
        }
      } catch (const FormatError&) {
        throw;
      } catch (const DataError& e) {
        throw FormatError(std::string("corrupt bundle: ") + e.what());
      }
    } else if (line.starts_with("array ")) {
      std::istringstream fields(line.substr(6));
      std::string name, shape;
      if (!(fields >> name >> shape)) throw FormatError("corrupt bundle: bad array line");
      directory.emplace_back(name, parse_shape(shape));
    } else {
      throw FormatError("corrupt bundle: unexpected header line '" + line + "'");
    }
  }
  if (!total || !saw_checksum) throw FormatError("corrupt bundle: truncated header");

  std::size_t expected = 0;
  for (const auto& [name, shape] : directory) expected += shape_size(shape);
  if (expected != *total) throw FormatError("corrupt bundle: array directory disagrees with size");

  std::vector<unsigned char> payload(*total * 8);
  in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
  if (static_cast<std::size_t>(in.gcount()) != payload.size()) {
    throw FormatError("corrupt bundle: truncated payload (" + std::to_string(in.gcount()) +
                      " of " + std::to_string(payload.size()) + " bytes)");
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError("corrupt bundle: trailing bytes after payload");
  }

  std::map<std::string, Tensor> arrays;
  std::size_t offset = 0;
  for (const auto& [name, shape] : directory) {
    std::vector<double> values(shape_size(shape));
    for (auto& v : values) {
      v = decode_double(payload.data() + offset);
      offset += 8;
    }
    arrays.emplace(name, Tensor(shape, std::move(values)));
  }

  Rng scratch(0);
  bundle.ner = init_ner_model(bundle.config.ner, scratch);
  load_params(bundle.ner.params, "ner.", arrays);

  if (arrays.count("nesc.head.weight")) {
    NescConfig nc = bundle.config.nesc;
    nc.input_dim = 2 * bundle.config.ner.hidden;
    NescModel nesc = init_nesc_model(nc, scratch);
    load_params(nesc.params, "nesc.", arrays);
    auto weights = arrays.find("nesc.class_weights");
    if (weights == arrays.end() || weights->second.size() != 2) {
      throw FormatError("bundle is missing array 'nesc.class_weights'");
    }
    nesc.positive_weight = weights->second[0];
    nesc.negative_weight = weights->second[1];
    arrays.erase(weights);
    bundle.nesc = std::move(nesc);
  }

  auto take_pair = [&](const char* a, const char* b) -> std::optional<std::pair<Tensor, Tensor>> {
    auto ia = arrays.find(a), ib = arrays.find(b);
    if (ia == arrays.end() && ib == arrays.end()) return std::nullopt;
    if (ia == arrays.end() || ib == arrays.end()) {
      throw FormatError(std::string("bundle has only one of '") + a + "' and '" + b + "'");
    }
    std::pair<Tensor, Tensor> out{std::move(ia->second), std::move(ib->second)};
    arrays.erase(a);
    arrays.erase(b);
    return out;
  };
  if (auto p = take_pair("lengths.values", "lengths.probabilities")) {
    bundle.lengths = LengthDistribution::from_pmf(p->first.data(), p->second.data());
  }
  if (auto p = take_pair("calibrator.thresholds", "calibrator.values")) {
    try {
      bundle.calibrator = IsotonicCalibrator(p->first.values(), p->second.values());
    } catch (const UsageError& e) {
      throw FormatError(std::string("corrupt bundle: ") + e.what());
    }
  }
  if (!arrays.empty()) {
    throw FormatError("bundle has unexpected array '" + arrays.begin()->first + "'");
  }
  return bundle;
}

void save_bundle(const ModelBundle& bundle, const std::string& path) {
  // Write to a sibling file first so a failed save never leaves a partial model.
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write bundle '" + path + "'");
    write_bundle(out, bundle);
    if (!out.flush()) throw DataError("failed writing bundle '" + path + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw DataError("cannot move bundle into place at '" + path + "'");
  }
}

ModelBundle load_bundle(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open bundle '" + path + "'");
  try {
    return read_bundle(in);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

EmbeddingTable resolve_embeddings(const ModelBundle& bundle,
                                  const std::optional<std::string>& embedding_path) {
  if (bundle.hashed_embedding_seed) return EmbeddingTable::hashed(*bundle.hashed_embedding_seed);
  if (!embedding_path) {
    throw UsageError("this model was trained with an embedding file; pass --embeddings");
  }
  EmbeddingTable table = EmbeddingTable::load(*embedding_path);
  if (table.checksum() != bundle.embedding_checksum) {
    throw DataError("embedding file '" + *embedding_path +
                    "' does not match the checksum recorded in the model");
  }
  return table;
}

}  // namespace nesc
