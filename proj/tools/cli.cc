#include "cli.h"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nesc/bundle.h"
#include "nesc/config.h"
#include "nesc/corpus.h"
#include "nesc/errors.h"
#include "nesc/metrics.h"
#include "nesc/pipeline.h"
#include "nesc/samples.h"

namespace nesc::cli {
namespace {

struct Globals {
  std::uint64_t seed = 1;
  std::string config;
  std::string embeddings;
  std::string model;
  std::optional<std::size_t> k;
};

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pad_right(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

const std::string& require_model(const Globals& g) {
  if (g.model.empty()) throw UsageError("this command needs --model");
  return g.model;
}

PipelineConfig base_config(const Globals& g) {
  PipelineConfig c = g.config.empty() ? PipelineConfig{} : load_config(g.config);
  if (g.k) set_config_value(c, "nesc.context", std::to_string(*g.k));
  return c;
}

std::optional<std::string> embedding_path(const Globals& g) {
  return g.embeddings.empty() ? std::nullopt : std::optional(g.embeddings);
}

// Training-time table: a file when given, otherwise per-form hashed rows.
EmbeddingTable training_table(const Globals& g, ModelBundle& bundle) {
  if (!g.embeddings.empty()) {
    auto table = EmbeddingTable::load(g.embeddings);
    bundle.embedding_checksum = table.checksum();
    bundle.hashed_embedding_seed.reset();
    return table;
  }
  bundle.embedding_checksum = 0;
  bundle.hashed_embedding_seed = g.seed;
  return EmbeddingTable::hashed(g.seed);
}

std::vector<Token> text_tokens(const std::string& text) {
  auto tokens = tokenize(text);
  for (auto& t : tokens) {
    if (!t.pos) t.pos = Pos::kX;
  }
  return tokens;
}

std::vector<std::string> input_texts(const std::vector<std::string>& args) {
  if (!args.empty()) return args;
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(std::cin, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

std::string span_text(const std::vector<Token>& tokens, const EntitySpan& s) {
  std::string out;
  for (std::size_t t = s.start; t <= s.end; ++t) out += (t > s.start ? " " : "") + tokens[t].surface;
  return out;
}

std::string type_text(const EntitySpan& s) {
  return s.type ? std::string(entity_type_name(*s.type)) : "-";
}

// Labels down the side, tokens across; the decoded label is starred.
void print_probability_table(std::ostream& out, const std::vector<Token>& tokens,
                             const TagResult& r) {
  std::size_t label_width = 0;
  for (std::size_t l = 0; l < kNumLabels; ++l) {
    label_width = std::max(label_width, label_name(label_at(l)).size());
  }
  label_width += 2;
  std::vector<std::size_t> widths;
  out << pad_right("", label_width);
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    widths.push_back(t + 1 < tokens.size() ? std::max<std::size_t>(tokens[t].surface.size(), 6) + 2
                                           : 0);
    out << pad_right(tokens[t].surface, widths.back());
  }
  out << '\n';
  for (std::size_t l = 0; l < kNumLabels; ++l) {
    out << pad_right(std::string(label_name(label_at(l))), label_width);
    for (std::size_t t = 0; t < tokens.size(); ++t) {
      std::string cell = fixed(r.probabilities.at(t, l), 3);
      if (index_of(r.labels[t]) == l) cell += '*';
      out << pad_right(cell, widths[t]);
    }
    out << '\n';
  }
}

NescDataset dataset_for(const std::string& data_path, const Corpus& corpus,
                        const PipelineConfig& config, std::uint64_t seed) {
  if (data_path.empty()) return build_dataset(corpus_labels(corpus), config.sampler, seed);
  std::ifstream in(data_path);
  if (!in) throw DataError("cannot open dataset '" + data_path + "'");
  auto d = read_dataset(in, data_path);
  for (const auto& s : d.samples) {
    if (s.sentence >= corpus.sentences.size() || s.end >= corpus.sentences[s.sentence].size()) {
      throw DataError(data_path + ": sample (" + std::to_string(s.sentence) + ", " +
                      std::to_string(s.start) + ", " + std::to_string(s.end) +
                      ") is outside the corpus");
    }
  }
  return d;
}

const NescModel& require_nesc(const ModelBundle& b) {
  if (!b.nesc) throw UsageError("the model has no NESC head yet; run train-nesc first");
  return *b.nesc;
}

std::vector<double> dataset_scores(const ModelBundle& b, const Corpus& corpus,
                                   const EmbeddingTable& table, const NescDataset& d, bool raw) {
  const auto enc = encode_corpus(corpus, table, b.ner);
  const IsotonicCalibrator* cal = raw || b.calibrator.empty() ? nullptr : &b.calibrator;
  return score_dataset(d, enc, require_nesc(b), cal);
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path + "'");
  return out;
}

// ---- subcommands ----

int validate_data(const std::vector<std::string>& files, std::ostream& out) {
  for (const auto& f : files) {
    const auto corpus = load_conll(f);
    std::size_t tokens = 0;
    std::map<EntityType, std::size_t> types;
    for (const auto& s : corpus.sentences) {
      tokens += s.size();
      for (const auto& span : decode_spans(s.labels)) ++types[*span.type];
    }
    std::size_t entities = 0;
    for (const auto& [t, n] : types) entities += n;
    out << f << ": " << corpus.sentences.size() << " sentences, " << tokens << " tokens, "
        << entities << " entities";
    for (const auto& [t, n] : types) out << ' ' << entity_type_name(t) << '=' << n;
    out << '\n';
  }
  return kOk;
}

int train_ner_cmd(const Globals& g, const std::string& train_path, std::ostream& out) {
  const auto& model_path = require_model(g);
  ModelBundle bundle;
  bundle.config = base_config(g);
  const auto table = training_table(g, bundle);
  const auto corpus = load_conll(train_path);
  if (corpus.sentences.empty()) throw DataError(train_path + ": no sentences");
  bundle.lengths = fit_length_distribution(corpus_labels(corpus));
  Rng rng(g.seed);
  auto result = train_ner(labeled_sequences(corpus, table), bundle.config.ner, rng,
                          [&](std::size_t e, double loss) {
                            out << "epoch " << e + 1 << " loss " << fixed(loss, 6) << '\n';
                          });
  bundle.ner = std::move(result.model);
  save_bundle(bundle, model_path);
  out << "wrote " << model_path << '\n';
  return kOk;
}

int tag_cmd(const Globals& g, const std::vector<std::string>& args, std::ostream& out) {
  const auto bundle = load_bundle(require_model(g));
  const auto table = resolve_embeddings(bundle, embedding_path(g));
  bool first = true;
  for (const auto& text : input_texts(args)) {
    const auto tokens = text_tokens(text);
    if (!first) out << '\n';
    first = false;
    out << text << '\n';
    if (tokens.empty()) continue;
    const auto r = tag(featurize(tokens, table), bundle.ner);
    for (const auto& s : r.spans) {
      out << "  [" << s.start << ',' << s.end << "] " << type_text(s) << ": "
          << span_text(tokens, s) << '\n';
    }
    print_probability_table(out, tokens, r);
  }
  return kOk;
}

int build_data_cmd(const Globals& g, const std::string& train_path, const std::string& out_path,
                   std::ostream& out) {
  const auto config = base_config(g);
  const auto corpus = load_conll(train_path);
  const auto d = build_dataset(corpus_labels(corpus), config.sampler, g.seed);
  auto file = open_output(out_path);
  write_dataset(file, d);
  std::size_t perturbed = 0, random = 0;
  for (const auto& s : d.samples) {
    perturbed += s.provenance == Provenance::kPerturbed;
    random += s.provenance == Provenance::kRandom;
  }
  out << d.samples.size() << " samples: " << d.positives << " positive, " << perturbed
      << " perturbed, " << random << " random\n";
  out << "class weights: positive " << fixed(d.positive_weight, 6) << ", negative "
      << fixed(d.negative_weight, 6) << '\n';
  return kOk;
}

int train_nesc_cmd(const Globals& g, const std::string& train_path, const std::string& data_path,
                   std::ostream& out) {
  const auto& model_path = require_model(g);
  auto bundle = load_bundle(model_path);
  if (!g.config.empty()) {
    const auto overrides = load_config(g.config, bundle.config);
    bundle.config.nesc = overrides.nesc;
    bundle.config.sampler = overrides.sampler;
  }
  if (g.k) set_config_value(bundle.config, "nesc.context", std::to_string(*g.k));
  const auto table = resolve_embeddings(bundle, embedding_path(g));
  const auto corpus = load_conll(train_path);
  const auto d = dataset_for(data_path, corpus, bundle.config, g.seed);
  Rng rng(g.seed);
  auto result = train_nesc(d, corpus, table, bundle.ner, bundle.config.nesc, rng,
                           [&](std::size_t e, double loss) {
                             out << "epoch " << e + 1 << " loss " << fixed(loss, 6) << '\n';
                           });
  bundle.nesc = std::move(result.model);
  bundle.calibrator = {};
  save_bundle(bundle, model_path);
  out << "wrote " << model_path << '\n';
  return kOk;
}

int calibrate_cmd(const Globals& g, const std::string& valid_path, const std::string& data_path,
                  std::ostream& out) {
  const auto& model_path = require_model(g);
  auto bundle = load_bundle(model_path);
  const auto table = resolve_embeddings(bundle, embedding_path(g));
  const auto corpus = load_conll(valid_path);
  const auto d = dataset_for(data_path, corpus, bundle.config, g.seed);
  const auto scores = dataset_scores(bundle, corpus, table, d, true);
  const auto labels = dataset_targets(d);
  bundle.calibrator = fit_pav(scores, labels);
  double raw = 0, cal = 0;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    raw += (scores[k] - labels[k]) * (scores[k] - labels[k]);
    const double c = bundle.calibrator(scores[k]);
    cal += (c - labels[k]) * (c - labels[k]);
  }
  const double n = static_cast<double>(scores.size());
  out << "fitted " << bundle.calibrator.thresholds().size() << " knots on " << scores.size()
      << " samples\n";
  out << "mse raw " << fixed(raw / n, 6) << " calibrated " << fixed(cal / n, 6) << '\n';
  save_bundle(bundle, model_path);
  out << "wrote " << model_path << '\n';
  return kOk;
}

int score_cmd(const Globals& g, const std::string& corpus_path, const std::string& data_path,
              bool raw, std::ostream& out) {
  const auto bundle = load_bundle(require_model(g));
  const auto table = resolve_embeddings(bundle, embedding_path(g));
  const auto corpus = load_conll(corpus_path);
  const auto d = dataset_for(data_path, corpus, bundle.config, g.seed);
  const auto scores = dataset_scores(bundle, corpus, table, d, raw);
  out << "sentence\tstart\tend\ttarget\tprovenance\tscore\n";
  for (std::size_t k = 0; k < d.samples.size(); ++k) {
    const auto& s = d.samples[k];
    out << s.sentence << '\t' << s.start << '\t' << s.end << '\t' << s.target << '\t'
        << provenance_name(s.provenance) << '\t' << fixed(scores[k], 6) << '\n';
  }
  return kOk;
}

void print_prf(std::ostream& out, const char* title, const PRF& c) {
  out << title << '\n';
  out << "  precision " << fixed(c.precision(), 4) << "  recall " << fixed(c.recall(), 4)
      << "  f1 " << fixed(c.f1(), 4) << "  (tp " << c.tp << ", fp " << c.fp << ", fn " << c.fn
      << ")\n";
}

int evaluate_cmd(const Globals& g, const std::string& test_path, std::ostream& out) {
  const auto bundle = load_bundle(require_model(g));
  const auto table = resolve_embeddings(bundle, embedding_path(g));
  const auto corpus = load_conll(test_path);
  PRF token, untyped, typed;
  for (const auto& s : corpus.sentences) {
    const auto r = tag(featurize(s, table), bundle.ner);
    const auto gold = decode_spans(s.labels);
    token += token_prf(s.labels, r.labels);
    untyped += entity_prf(gold, r.spans, false);
    typed += entity_prf(gold, r.spans, true);
  }
  print_prf(out, "untyped token level", token);
  print_prf(out, "untyped entity level", untyped);
  print_prf(out, "typed entity level", typed);
  if (bundle.nesc) {
    const auto d = build_dataset(corpus_labels(corpus), bundle.config.sampler, g.seed);
    const auto scores = dataset_scores(bundle, corpus, table, d, false);
    out << "nesc roc-auc " << fixed(roc_auc(scores, dataset_targets(d)), 4) << " on "
        << d.samples.size() << " sampled spans\n";
  }
  return kOk;
}

int pr_curve_cmd(const Globals& g, const std::string& test_path, const std::string& data_path,
                 const std::string& out_path, bool raw, std::ostream& out) {
  const auto bundle = load_bundle(require_model(g));
  const auto table = resolve_embeddings(bundle, embedding_path(g));
  const auto corpus = load_conll(test_path);
  const auto d = dataset_for(data_path, corpus, bundle.config, g.seed);
  const auto scores = dataset_scores(bundle, corpus, table, d, raw);
  const auto curve = pr_curve(scores, dataset_targets(d), default_thresholds());
  if (out_path.empty() || out_path == "-") {
    write_pr_csv(out, curve);
  } else {
    auto file = open_output(out_path);
    write_pr_csv(file, curve);
    out << "wrote " << out_path << '\n';
  }
  return kOk;
}

int demo_cmd(const Globals& g, const std::vector<std::string>& args,
             const std::vector<std::string>& queries, std::ostream& out) {
  const auto bundle = load_bundle(require_model(g));
  const auto& nesc = require_nesc(bundle);
  const auto table = resolve_embeddings(bundle, embedding_path(g));
  const IsotonicCalibrator* cal = bundle.calibrator.empty() ? nullptr : &bundle.calibrator;
  bool first = true;
  for (const auto& text : input_texts(args)) {
    const auto tokens = text_tokens(text);
    if (!first) out << '\n';
    first = false;
    out << text << '\n';
    if (tokens.empty()) continue;
    const auto features = featurize(tokens, table);
    const auto r = tag(features, bundle.ner);
    for (const auto& s : r.spans) {
      out << "  " << pad_right(span_text(tokens, s), 32) << pad_right(type_text(s), 14)
          << fixed(score_span(features, s, bundle.ner, nesc, cal), 3) << '\n';
    }
    for (const auto& q : queries) {
      const auto qt = tokenize(q);
      for (std::size_t i = 0; !qt.empty() && i + qt.size() <= tokens.size(); ++i) {
        bool match = true;
        for (std::size_t k = 0; k < qt.size() && match; ++k) {
          match = tokens[i + k].surface == qt[k].surface;
        }
        if (!match) continue;
        const EntitySpan s{i, i + qt.size() - 1, std::nullopt};
        out << "  " << pad_right(span_text(tokens, s), 32) << pad_right("(query)", 14)
            << fixed(score_span(features, s, bundle.ner, nesc, cal), 3) << '\n';
      }
    }
  }
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Named-entity tagging and span-level entity scoring", "nesc"};
  app.require_subcommand(1);
  app.fallthrough();
  app.failure_message(CLI::FailureMessage::help);

  Globals g;
  app.add_option("--seed", g.seed, "Seed for all randomness")->capture_default_str();
  app.add_option("--config", g.config, "Hyperparameter file of key=value lines");
  app.add_option("--embeddings", g.embeddings, "Word embedding text file");
  app.add_option("--model", g.model, "Model bundle to write or read");
  app.add_option("--k", g.k, "Context window size for span scoring");

  std::vector<std::string> files, texts, queries;
  std::string train, data, valid, test, output, corpus;
  bool raw = false;
  std::function<int()> action;

  auto* validate = app.add_subcommand("validate-data", "Check CoNLL files and print counts");
  validate->add_option("files", files, "CoNLL files")->required()->check(CLI::ExistingFile);
  validate->callback([&] { action = [&] { return validate_data(files, out); }; });

  auto* train_ner = app.add_subcommand("train-ner", "Train the tagger and write --model");
  train_ner->add_option("--train", train, "Training corpus")->required();
  train_ner->callback([&] { action = [&] { return train_ner_cmd(g, train, out); }; });

  auto* tag = app.add_subcommand("tag", "Tag text lines (arguments or stdin)");
  tag->add_option("text", texts, "Sentences to tag");
  tag->callback([&] { action = [&] { return tag_cmd(g, texts, out); }; });

  auto* build = app.add_subcommand("build-nesc-data", "Sample span classifier training data");
  build->add_option("--train", train, "Labeled corpus")->required();
  build->add_option("--out", output, "Dataset TSV to write")->required();
  build->callback([&] { action = [&] { return build_data_cmd(g, train, output, out); }; });

  auto* train_nesc = app.add_subcommand("train-nesc", "Train the span classifier into --model");
  train_nesc->add_option("--train", train, "Corpus the dataset refers to")->required();
  train_nesc->add_option("--data", data, "Dataset TSV (sampled with --seed when omitted)");
  train_nesc->callback([&] { action = [&] { return train_nesc_cmd(g, train, data, out); }; });

  auto* calibrate = app.add_subcommand("calibrate", "Fit isotonic calibration on validation data");
  calibrate->add_option("--valid", valid, "Validation corpus")->required();
  calibrate->add_option("--data", data, "Dataset TSV over the validation corpus");
  calibrate->callback([&] { action = [&] { return calibrate_cmd(g, valid, data, out); }; });

  auto* score = app.add_subcommand("score", "Score sampled spans of a corpus");
  score->add_option("--corpus", corpus, "Labeled corpus")->required();
  score->add_option("--data", data, "Dataset TSV over the corpus");
  score->add_flag("--raw", raw, "Skip calibration");
  score->callback([&] { action = [&] { return score_cmd(g, corpus, data, raw, out); }; });

  auto* evaluate = app.add_subcommand("evaluate", "Token and entity precision/recall/F1");
  evaluate->add_option("--test", test, "Labeled test corpus")->required();
  evaluate->callback([&] { action = [&] { return evaluate_cmd(g, test, out); }; });

  auto* pr = app.add_subcommand("pr-curve", "Precision/recall of span scores per threshold");
  pr->add_option("--test", test, "Labeled test corpus")->required();
  pr->add_option("--data", data, "Dataset TSV over the test corpus");
  pr->add_option("--out", output, "CSV path, '-' for stdout");
  pr->add_flag("--raw", raw, "Skip calibration");
  pr->callback([&] { action = [&] { return pr_curve_cmd(g, test, data, output, raw, out); }; });

  auto* demo = app.add_subcommand("demo", "Tag text and score each detected entity");
  demo->add_option("text", texts, "Sentences");
  demo->add_option("--query", queries, "Extra token sequence to score wherever it occurs");
  demo->callback([&] { action = [&] { return demo_cmd(g, texts, queries, out); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    return action();
  } catch (const UsageError& e) {
    err << "nesc: " << e.what() << '\n';
    return kUsageError;
  } catch (const DataError& e) {
    err << "nesc: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "nesc: " << e.what() << '\n';
    return kDataError;
  }
}

}  // namespace nesc::cli
