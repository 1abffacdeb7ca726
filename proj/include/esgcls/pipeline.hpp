#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include <esgcls/corpus.hpp>
#include <esgcls/errors.hpp>
#include <esgcls/tfidf.hpp>
#include <esgcls/tokenizer.hpp>
#include <esgcls/tuning.hpp>

namespace esgcls {

/// Anything that scores a document into a per-class confidence distribution.
/// Teachers for pseudo-labeling and ensemble members implement this.
class TextScorer {
 public:
  virtual ~TextScorer() = default;
  virtual std::vector<double> scores(const Document& doc) const = 0;
  virtual const std::vector<std::string>& class_names() const = 0;

  int predict(const Document& doc) const { return argmax_lowest(scores(doc)); }
};

/// Tokenizer + TF-IDF + classifier bundle trained on one data split.
class TextPipeline : public TextScorer {
 public:
  Task task = Task::duration;
  SubwordModel tokenizer;
  TfIdfModel tfidf;
  std::unique_ptr<Classifier> model;

  std::vector<double> scores(const Document& doc) const override {
    return model->predict_scores(transform(tfidf, tokenize(tokenizer, doc.text())));
  }

  const std::vector<std::string>& class_names() const override {
    return model->class_names();
  }

  nlohmann::json to_json() const {
    return {{"task", esgcls::to_string(task)},
            {"tokenizer", tokenizer.to_json()},
            {"tfidf", tfidf.to_json()},
            {"classifier", model->to_json()}};
  }

  static TextPipeline from_json(const nlohmann::json& j) {
    TextPipeline p;
    auto task = parse_task(j.at("task").get<std::string>());
    if (!task) throw DataError("pipeline bundle: unknown task");
    p.task = *task;
    p.tokenizer = SubwordModel::from_json(j.at("tokenizer"));
    p.tfidf = TfIdfModel::from_json(j.at("tfidf"));
    p.model = classifier_from_json(j.at("classifier"));
    return p;
  }
};

struct PipelineConfig {
  int vocab_size = 8000;
  double max_df = 0.7;
  std::vector<TrainConfig> grid;  // tuned by weighted F1 on an inner 80/20 split
};

struct TuneReport {
  int best_index = 0;
  TrainConfig best;
  std::vector<double> inner_f1;
  std::vector<std::string> failures;
};

struct TrainedPipeline {
  TextPipeline pipeline;
  TuneReport tuning;
};

/// Trains the full pipeline on the given labeled documents: subword vocabulary
/// and TF-IDF statistics are fitted on exactly this split (no leakage from
/// held-out folds), then the classifier grid is tuned and refitted.
inline TrainedPipeline train_pipeline(const Corpus& corpus,
                                      const std::vector<int>& doc_indices,
                                      const PipelineConfig& cfg, std::uint64_t seed) {
  if (cfg.grid.empty()) throw TrainError("pipeline configuration has an empty model grid");
  if (doc_indices.empty()) throw TrainError("pipeline training needs at least one document");

  std::vector<std::string> texts;
  std::vector<int> labels;
  texts.reserve(doc_indices.size());
  labels.reserve(doc_indices.size());
  for (int i : doc_indices) {
    const auto& d = corpus.docs[static_cast<std::size_t>(i)];
    auto label = corpus.label_of(d);
    if (!label) throw TrainError("unlabeled document '" + d.id + "' in a training split");
    texts.push_back(d.text());
    labels.push_back(*label);
  }

  TrainedPipeline out;
  out.pipeline.task = corpus.task;
  out.pipeline.tokenizer = train_subwords(texts, cfg.vocab_size);
  auto sequences = tokenize_all(out.pipeline.tokenizer, texts);
  out.pipeline.tfidf = fit_tfidf(sequences, cfg.max_df);
  auto X = transform_all(out.pipeline.tfidf, sequences);

  auto tuned = tune(cfg.grid, X, labels, corpus.class_names, derive_seed(seed, "tune"));
  out.tuning = {tuned.best_index, tuned.best, tuned.inner_f1, tuned.failures};
  out.pipeline.model = std::move(tuned.model);
  return out;
}

inline nlohmann::json to_json(const TuneReport& t) {
  return {{"best_index", t.best_index},
          {"best", t.best.to_json()},
          {"inner_weighted_f1", t.inner_f1},
          {"failures", t.failures}};
}

}  // namespace esgcls
