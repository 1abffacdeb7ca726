// Command-line driver for the multilingual news classification pipeline:
// corpus handling, tokenizer/TF-IDF fitting, classifier training and tuning,
// cross-validation, label de-noising, self-training and ensembling.
//
// Every subcommand takes a mandatory --seed, accepts a flat key=value config
// file (--config; command-line flags win), and writes a run manifest next to
// its primary artifact. JSON artifacts embed the seed and config hash that
// produced them.

#include <CLI11.hpp>

#include <cctype>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <esgcls/esgcls.hpp>

namespace {

constexpr const char* kToolVersion = "esgcls 0.1.0";

using esgcls::ConfigError;
using esgcls::DataError;
using esgcls::TrainError;

struct RunContext {
  std::string command;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> resolved;  // canonical option values

  void set(const std::string& key, const std::string& value) { resolved[key] = value; }
  void set(const std::string& key, std::uint64_t value) { resolved[key] = std::to_string(value); }
  void set(const std::string& key, int value) { resolved[key] = std::to_string(value); }
  void set(const std::string& key, double value) {
    std::ostringstream out;
    out.precision(17);
    out << value;
    resolved[key] = out.str();
  }
  void set(const std::string& key, bool value) { resolved[key] = value ? "true" : "false"; }

  std::string config_hash() const {
    std::string canonical;
    for (const auto& [k, v] : resolved) canonical += k + "=" + v + "\n";
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(esgcls::fnv1a64(canonical)));
    return buf;
  }

  nlohmann::json meta() const {
    return {{"command", command},
            {"seed", seed},
            {"config_hash", config_hash()},
            {"tool", kToolVersion}};
  }
};

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << content;
}

void write_json_artifact(const std::string& path, nlohmann::json j, const RunContext& ctx) {
  j["meta"] = ctx.meta();
  write_text(path, j.dump(2) + "\n");
}

void write_manifest(const std::string& primary_artifact, const RunContext& ctx) {
  nlohmann::json m = ctx.meta();
  m["created_utc"] = utc_now();
  write_text(primary_artifact + ".manifest.json", m.dump(2) + "\n");
}

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception&) {
    throw DataError("malformed JSON in " + path);
  }
  return j;
}

esgcls::Task parse_task_or_throw(const std::string& s) {
  auto task = esgcls::parse_task(s);
  if (!task) throw ConfigError("unknown task '" + s + "' (expected duration or level)");
  return *task;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) parts.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) parts.push_back(cur);
  return parts;
}

std::set<esgcls::Language> parse_language_filter(const std::string& csv) {
  std::set<esgcls::Language> out;
  for (const auto& part : split_csv(csv)) {
    auto lang = esgcls::parse_language(part);
    if (!lang) throw ConfigError("unknown language '" + part + "'");
    out.insert(*lang);
  }
  return out;
}

esgcls::Corpus load_corpus(const std::string& path, esgcls::Task task,
                           const std::string& language_filter) {
  auto [corpus, report] = esgcls::ingest(path, task);
  if (!language_filter.empty())
    corpus = corpus.filter_languages(parse_language_filter(language_filter));
  return std::move(corpus);
}

// ---------------------------------------------------------------------------
// Model / pipeline option bundles shared by train, tune, cv and denoise.

struct ModelOpts {
  std::string model = "rf";
  double C = 1.0;
  int n_trees = 100;
  int max_depth = 0;
  int min_samples_split = 2;
  bool no_bootstrap = false;
  bool class_weighted = false;
  std::string grid = "single";  // single | default | custom
  std::string c_grid;
  std::string trees_grid;
  std::string depth_grid;
  std::string min_split_grid;
};

struct PipeOpts {
  int vocab_size = 8000;
  double max_df = 0.7;
};

void add_model_options(CLI::App* cmd, ModelOpts& m, bool with_grid) {
  cmd->add_option("--model", m.model, "Classifier kind: logistic | svm | rf | prior");
  cmd->add_option("--C", m.C, "Penalty parameter for logistic / svm");
  cmd->add_option("--n-trees", m.n_trees, "Number of forest trees");
  cmd->add_option("--max-depth", m.max_depth, "Maximum tree depth (0 = unbounded)");
  cmd->add_option("--min-samples-split", m.min_samples_split,
                  "Minimum samples required to split a node");
  cmd->add_flag("--no-bootstrap", m.no_bootstrap, "Disable bootstrap sampling per tree");
  cmd->add_flag("--class-weighted", m.class_weighted, "Inverse-frequency sample weights");
  if (with_grid) {
    cmd->add_option("--grid", m.grid, "Hyperparameter grid: single | default | custom");
    cmd->add_option("--c-grid", m.c_grid, "Custom comma-separated C values");
    cmd->add_option("--trees-grid", m.trees_grid, "Custom comma-separated tree counts");
    cmd->add_option("--depth-grid", m.depth_grid, "Custom comma-separated depths (0 = unbounded)");
    cmd->add_option("--min-split-grid", m.min_split_grid, "Custom comma-separated split minima");
  }
}

void add_pipe_options(CLI::App* cmd, PipeOpts& p) {
  cmd->add_option("--vocab-size", p.vocab_size, "Subword vocabulary size");
  cmd->add_option("--max-df", p.max_df, "Maximum document-frequency fraction");
}

esgcls::TrainConfig single_config(const ModelOpts& m) {
  auto kind = esgcls::parse_model_kind(m.model);
  if (!kind) throw ConfigError("unknown model kind '" + m.model + "'");
  esgcls::TrainConfig cfg;
  cfg.kind = *kind;
  cfg.C = m.C;
  cfg.n_trees = m.n_trees;
  cfg.max_depth = m.max_depth;
  cfg.min_samples_split = m.min_samples_split;
  cfg.bootstrap = !m.no_bootstrap;
  cfg.class_weighted = m.class_weighted;
  return cfg;
}

std::vector<esgcls::TrainConfig> build_grid(const ModelOpts& m) {
  const auto base = single_config(m);
  if (m.grid == "single") return {base};
  if (m.grid == "default") return esgcls::default_grid(base.kind, m.class_weighted);
  if (m.grid != "custom") throw ConfigError("unknown grid mode '" + m.grid + "'");

  auto doubles_of = [](const std::string& csv, double fallback) {
    std::vector<double> out;
    for (const auto& p : split_csv(csv)) out.push_back(std::stod(p));
    if (out.empty()) out.push_back(fallback);
    return out;
  };
  auto ints_of = [](const std::string& csv, int fallback) {
    std::vector<int> out;
    for (const auto& p : split_csv(csv)) out.push_back(std::stoi(p));
    if (out.empty()) out.push_back(fallback);
    return out;
  };

  std::vector<esgcls::TrainConfig> grid;
  if (base.kind == esgcls::ModelKind::logistic || base.kind == esgcls::ModelKind::svm) {
    for (double C : doubles_of(m.c_grid, m.C)) {
      auto cfg = base;
      cfg.C = C;
      grid.push_back(cfg);
    }
  } else if (base.kind == esgcls::ModelKind::random_forest) {
    for (int trees : ints_of(m.trees_grid, m.n_trees)) {
      for (int depth : ints_of(m.depth_grid, m.max_depth)) {
        for (int split : ints_of(m.min_split_grid, m.min_samples_split)) {
          auto cfg = base;
          cfg.n_trees = trees;
          cfg.max_depth = depth;
          cfg.min_samples_split = split;
          grid.push_back(cfg);
        }
      }
    }
  } else {
    grid.push_back(base);
  }
  return grid;
}

void record_model_opts(RunContext& ctx, const ModelOpts& m) {
  ctx.set("model", m.model);
  ctx.set("C", m.C);
  ctx.set("n_trees", m.n_trees);
  ctx.set("max_depth", m.max_depth);
  ctx.set("min_samples_split", m.min_samples_split);
  ctx.set("bootstrap", !m.no_bootstrap);
  ctx.set("class_weighted", m.class_weighted);
  ctx.set("grid", m.grid);
  if (!m.c_grid.empty()) ctx.set("c_grid", m.c_grid);
  if (!m.trees_grid.empty()) ctx.set("trees_grid", m.trees_grid);
  if (!m.depth_grid.empty()) ctx.set("depth_grid", m.depth_grid);
  if (!m.min_split_grid.empty()) ctx.set("min_split_grid", m.min_split_grid);
}

void record_pipe_opts(RunContext& ctx, const PipeOpts& p) {
  ctx.set("vocab_size", p.vocab_size);
  ctx.set("max_df", p.max_df);
}

esgcls::PipelineConfig pipeline_config(const PipeOpts& p, const ModelOpts& m) {
  esgcls::PipelineConfig cfg;
  cfg.vocab_size = p.vocab_size;
  cfg.max_df = p.max_df;
  cfg.grid = build_grid(m);
  return cfg;
}

// ---------------------------------------------------------------------------

struct PredictionRow {
  std::string doc_id;
  std::string label;
};

std::vector<PredictionRow> read_predictions_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::vector<PredictionRow> rows;
  std::string line;
  bool first = true;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first && line.rfind("doc_id", 0) == 0) {
      first = false;
      continue;
    }
    first = false;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw DataError("predictions " + path + ": line " + std::to_string(line_no) +
                      " has no label column");
    std::string label = line.substr(comma + 1);
    const auto next = label.find(',');
    if (next != std::string::npos) label = label.substr(0, next);
    rows.push_back({line.substr(0, comma), label});
  }
  return rows;
}

int class_index_of(const std::string& name, const std::vector<std::string>& class_names) {
  for (int c = 0; c < static_cast<int>(class_names.size()); ++c) {
    if (class_names[static_cast<std::size_t>(c)] == name) return c;
  }
  throw DataError("unknown class label '" + name + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(kToolVersion) +
               " — multilingual news impact classification pipeline"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  // Shared option storage. Only one subcommand runs per invocation, so the
  // commands can share these slots.
  std::uint64_t seed = 0;
  std::string task_str = "duration";
  std::string in_path, out_path, report_path, languages;
  ModelOpts model_opts;
  PipeOpts pipe_opts;
  int k_folds = 10;

  auto add_common = [&](CLI::App* cmd, bool with_task = true) {
    cmd->set_config("--config", "", "Flat key=value config file; flags override");
    cmd->add_option("--seed", seed, "Master RNG seed (mandatory)")->required();
    if (with_task)
      cmd->add_option("--task", task_str, "Label task: duration | level")
          ->check(CLI::IsMember({"duration", "level"}));
    return cmd;
  };

  // --- synth ---------------------------------------------------------------
  std::string synth_counts = "en=300,fr=300,kr=300,jp=300";
  std::string synth_priors = "0.48,0.30,0.22";
  std::string truth_out;
  double noise = 0.0, keyword_prob = 0.55;
  int len_min = 40, len_max = 80;
  auto* synth_cmd = add_common(app.add_subcommand("synth", "Generate a synthetic corpus"));
  synth_cmd->add_option("--out", out_path, "Output corpus JSONL")->required();
  synth_cmd->add_option("--counts", synth_counts, "Per-language counts, e.g. en=300,fr=200");
  synth_cmd->add_option("--priors", synth_priors, "Comma-separated class priors");
  synth_cmd->add_option("--noise", noise, "Fraction of labels flipped");
  synth_cmd->add_option("--truth-out", truth_out, "Ground-truth JSON (labels before flips)");
  synth_cmd->add_option("--len-min", len_min, "Minimum body length in tokens");
  synth_cmd->add_option("--len-max", len_max, "Maximum body length in tokens");
  synth_cmd->add_option("--keyword-prob", keyword_prob, "Probability of a class keyword per token");
  synth_cmd->callback([&] {
    RunContext ctx{"synth", seed};
    ctx.set("task", task_str);
    ctx.set("counts", synth_counts);
    ctx.set("priors", synth_priors);
    ctx.set("noise", noise);
    ctx.set("len_min", len_min);
    ctx.set("len_max", len_max);
    ctx.set("keyword_prob", keyword_prob);
    ctx.set("out", out_path);

    std::map<esgcls::Language, int> counts;
    for (const auto& part : split_csv(synth_counts)) {
      const auto eq = part.find('=');
      if (eq == std::string::npos) throw ConfigError("bad --counts entry '" + part + "'");
      auto lang = esgcls::parse_language(part.substr(0, eq));
      if (!lang) throw ConfigError("unknown language in --counts: '" + part + "'");
      counts[*lang] = std::stoi(part.substr(eq + 1));
    }
    std::vector<double> priors;
    for (const auto& p : split_csv(synth_priors)) priors.push_back(std::stod(p));

    auto spec = esgcls::default_synth_spec(counts, priors, noise, seed,
                                           parse_task_or_throw(task_str));
    spec.len_min = len_min;
    spec.len_max = len_max;
    spec.keyword_prob = keyword_prob;
    auto result = esgcls::generate(spec);
    esgcls::write_jsonl(result.corpus, out_path);
    if (!truth_out.empty()) {
      nlohmann::json truth;
      truth["ground_truth"] = nlohmann::json::object();
      const auto& names = result.corpus.class_names;
      for (const auto& [id, cls] : result.ground_truth)
        truth["ground_truth"][id] = names[static_cast<std::size_t>(cls)];
      truth["flipped_ids"] = result.flipped_ids;
      write_json_artifact(truth_out, truth, ctx);
    }
    write_manifest(out_path, ctx);
    std::cout << "synth: wrote " << result.corpus.size() << " documents ("
              << result.flipped_ids.size() << " flipped) to " << out_path << "\n";
  });

  // --- ingest ----------------------------------------------------------------
  auto* ingest_cmd = add_common(app.add_subcommand("ingest", "Validate a JSONL corpus"));
  ingest_cmd->add_option("--in", in_path, "Input corpus JSONL")->required();
  ingest_cmd->add_option("--report", report_path, "Ingestion report JSON")->required();
  ingest_cmd->add_option("--out", out_path, "Optional normalized corpus JSONL");
  ingest_cmd->add_option("--languages", languages, "Keep only these languages (csv)");
  ingest_cmd->callback([&] {
    RunContext ctx{"ingest", seed};
    ctx.set("task", task_str);
    ctx.set("in", in_path);
    ctx.set("languages", languages);
    const auto task = parse_task_or_throw(task_str);
    auto [corpus, report] = esgcls::ingest(in_path, task);
    if (!languages.empty()) corpus = corpus.filter_languages(parse_language_filter(languages));
    nlohmann::json j;
    j["total"] = report.total;
    j["labeled"] = report.labeled;
    j["per_language"] = report.per_language;
    j["kept_after_filter"] = corpus.size();
    write_json_artifact(report_path, j, ctx);
    if (!out_path.empty()) esgcls::write_jsonl(corpus, out_path);
    write_manifest(report_path, ctx);
    std::cout << "ingest: " << report.total << " documents, " << report.labeled
              << " labeled for task " << task_str << "\n";
  });

  // --- dedup -----------------------------------------------------------------
  auto* dedup_cmd = add_common(app.add_subcommand("dedup", "Remove duplicate documents"));
  dedup_cmd->add_option("--in", in_path, "Input corpus JSONL")->required();
  dedup_cmd->add_option("--out", out_path, "Deduplicated corpus JSONL")->required();
  dedup_cmd->add_option("--report", report_path, "Dedup report JSON");
  dedup_cmd->callback([&] {
    RunContext ctx{"dedup", seed};
    ctx.set("task", task_str);
    ctx.set("in", in_path);
    ctx.set("out", out_path);
    auto corpus = load_corpus(in_path, parse_task_or_throw(task_str), "");
    auto [deduped, report] = esgcls::deduplicate(corpus, seed);
    esgcls::write_jsonl(deduped, out_path);
    if (!report_path.empty()) write_json_artifact(report_path, esgcls::to_json(report), ctx);
    write_manifest(out_path, ctx);
    std::cout << "dedup: kept " << deduped.size() << " of " << corpus.size() << " documents\n";
  });

  // --- folds -----------------------------------------------------------------
  auto* folds_cmd = add_common(app.add_subcommand("folds", "Build a stratified fold plan"));
  folds_cmd->add_option("--in", in_path, "Input corpus JSONL")->required();
  folds_cmd->add_option("--out", out_path, "Fold plan JSON")->required();
  folds_cmd->add_option("--k", k_folds, "Number of folds");
  folds_cmd->add_option("--languages", languages, "Keep only these languages (csv)");
  folds_cmd->callback([&] {
    RunContext ctx{"folds", seed};
    ctx.set("task", task_str);
    ctx.set("in", in_path);
    ctx.set("k", k_folds);
    ctx.set("languages", languages);
    auto corpus = load_corpus(in_path, parse_task_or_throw(task_str), languages);
    auto plan = esgcls::make_folds(corpus, k_folds, seed);
    write_json_artifact(out_path, esgcls::to_json(plan), ctx);
    write_manifest(out_path, ctx);
    for (const auto& w : plan.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "folds: assigned " << plan.assignment.size() << " documents to " << k_folds
              << " folds\n";
  });

  // --- tokenizer-train ---------------------------------------------------------
  auto* tok_cmd =
      add_common(app.add_subcommand("tokenizer-train", "Train the shared subword vocabulary"));
  tok_cmd->add_option("--in", in_path, "Input corpus JSONL")->required();
  tok_cmd->add_option("--out", out_path, "Tokenizer model JSON")->required();
  tok_cmd->add_option("--vocab-size", pipe_opts.vocab_size, "Subword vocabulary size");
  tok_cmd->add_option("--languages", languages, "Keep only these languages (csv)");
  tok_cmd->callback([&] {
    RunContext ctx{"tokenizer-train", seed};
    ctx.set("task", task_str);
    ctx.set("in", in_path);
    ctx.set("vocab_size", pipe_opts.vocab_size);
    ctx.set("languages", languages);
    auto corpus = load_corpus(in_path, parse_task_or_throw(task_str), languages);
    auto model = esgcls::train_subwords(corpus, pipe_opts.vocab_size, seed);
    write_json_artifact(out_path, model.to_json(), ctx);
    write_manifest(out_path, ctx);
    std::cout << "tokenizer-train: " << model.merges().size() << " merges, vocabulary "
              << model.vocab_size() << "\n";
  });

  // --- featurize ---------------------------------------------------------------
  std::string tokenizer_path, vectors_out;
  auto* feat_cmd = add_common(app.add_subcommand("featurize", "Fit TF-IDF statistics"));
  feat_cmd->add_option("--in", in_path, "Input corpus JSONL")->required();
  feat_cmd->add_option("--tokenizer", tokenizer_path, "Tokenizer model JSON")->required();
  feat_cmd->add_option("--out", out_path, "TF-IDF model JSON")->required();
  feat_cmd->add_option("--max-df", pipe_opts.max_df, "Maximum document-frequency fraction");
  feat_cmd->add_option("--vectors-out", vectors_out, "Optional per-document vectors JSONL");
  feat_cmd->add_option("--languages", languages, "Keep only these languages (csv)");
  feat_cmd->callback([&] {
    RunContext ctx{"featurize", seed};
    ctx.set("task", task_str);
    ctx.set("in", in_path);
    ctx.set("tokenizer", tokenizer_path);
    ctx.set("max_df", pipe_opts.max_df);
    ctx.set("languages", languages);
    auto corpus = load_corpus(in_path, parse_task_or_throw(task_str), languages);
    auto tokenizer = esgcls::SubwordModel::from_json(load_json(tokenizer_path));
    std::vector<std::string> texts;
    for (const auto& d : corpus.docs) texts.push_back(d.text());
    auto sequences = esgcls::tokenize_all(tokenizer, texts);
    auto tfidf = esgcls::fit_tfidf(sequences, pipe_opts.max_df);
    write_json_artifact(out_path, tfidf.to_json(), ctx);
    if (!vectors_out.empty()) {
      std::ostringstream lines;
      for (std::size_t i = 0; i < corpus.docs.size(); ++i) {
        auto v = esgcls::transform(tfidf, sequences[i]);
        nlohmann::json rec;
        rec["id"] = corpus.docs[i].id;
        auto entries = nlohmann::json::array();
        for (const auto& [t, w] : v.entries) entries.push_back({t, w});
        rec["entries"] = entries;
        lines << rec.dump() << "\n";
      }
      write_text(vectors_out, lines.str());
    }
    write_manifest(out_path, ctx);
    std::cout << "featurize: " << tfidf.doc_freq.size() << " terms over " << tfidf.n_docs
              << " documents\n";
  });

  // --- train ---------------------------------------------------------------
  auto* train_cmd =
      add_common(app.add_subcommand("train", "Train a pipeline with one fixed setting"));
  train_cmd->add_option("--in", in_path, "Training corpus JSONL")->required();
  train_cmd->add_option("--out", out_path, "Pipeline bundle JSON")->required();
  train_cmd->add_option("--languages", languages, "Keep only these languages (csv)");
  add_pipe_options(train_cmd, pipe_opts);
  add_model_options(train_cmd, model_opts, /*with_grid=*/false);
  train_cmd->callback([&] {
    RunContext ctx{"train", seed};
    ctx.set("task", task_str);
    ctx.set("in", in_path);
    ctx.set("languages", languages);
    record_pipe_opts(ctx, pipe_opts);
    record_model_opts(ctx, model_opts);
    auto corpus = load_corpus(in_path, parse_task_or_throw(task_str), languages);
    esgcls::PipelineConfig cfg;
    cfg.vocab_size = pipe_opts.vocab_size;
    cfg.max_df = pipe_opts.max_df;
    cfg.grid = {single_config(model_opts)};
    auto trained = esgcls::train_pipeline(corpus, corpus.labeled_indices(), cfg, seed);
    write_json_artifact(out_path, trained.pipeline.to_json(), ctx);
    write_manifest(out_path, ctx);
    std::cout << "train: " << trained.tuning.best.describe() << " on "
              << corpus.labeled_indices().size() << " documents\n";
  });

  // --- tune ----------------------------------------------------------------
  auto* tune_cmd = add_common(
      app.add_subcommand("tune", "Grid-search hyperparameters on an inner 80/20 split"));
  tune_cmd->add_option("--in", in_path, "Training corpus JSONL")->required();
  tune_cmd->add_option("--out", out_path, "Pipeline bundle JSON")->required();
  tune_cmd->add_option("--languages", languages, "Keep only these languages (csv)");
  add_pipe_options(tune_cmd, pipe_opts);
  add_model_options(tune_cmd, model_opts, /*with_grid=*/true);
  tune_cmd->callback([&] {
    RunContext ctx{"tune", seed};
    ctx.set("task", task_str);
    ctx.set("in", in_path);
    ctx.set("languages", languages);
    record_pipe_opts(ctx, pipe_opts);
    record_model_opts(ctx, model_opts);
    if (model_opts.grid == "single") model_opts.grid = "default";
    auto corpus = load_corpus(in_path, parse_task_or_throw(task_str), languages);
    auto cfg = pipeline_config(pipe_opts, model_opts);
    auto trained = esgcls::train_pipeline(corpus, corpus.labeled_indices(), cfg, seed);
    auto bundle = trained.pipeline.to_json();
    bundle["tuning"] = esgcls::to_json(trained.tuning);
    write_json_artifact(out_path, bundle, ctx);
    write_manifest(out_path, ctx);
    std::cout << "tune: selected " << trained.tuning.best.describe() << " (grid point "
              << trained.tuning.best_index << ")\n";
  });

  // --- cv ------------------------------------------------------------------
  std::string folds_path;
  auto* cv_cmd = add_common(app.add_subcommand("cv", "k-fold cross-validation"));
  cv_cmd->add_option("--in", in_path, "Corpus JSONL")->required();
  cv_cmd->add_option("--out", out_path, "Cross-validation report JSON")->required();
  cv_cmd->add_option("--k", k_folds, "Number of folds");
  cv_cmd->add_option("--folds", folds_path, "Existing fold plan JSON (otherwise derived)");
  cv_cmd->add_option("--languages", languages, "Keep only these languages (csv)");
  add_pipe_options(cv_cmd, pipe_opts);
  add_model_options(cv_cmd, model_opts, /*with_grid=*/true);
  cv_cmd->callback([&] {
    RunContext ctx{"cv", seed};
    ctx.set("task", task_str);
    ctx.set("in", in_path);
    ctx.set("k", k_folds);
    ctx.set("folds", folds_path);
    ctx.set("languages", languages);
    record_pipe_opts(ctx, pipe_opts);
    record_model_opts(ctx, model_opts);
    auto corpus = load_corpus(in_path, parse_task_or_throw(task_str), languages);
    esgcls::FoldPlan plan;
    if (!folds_path.empty()) {
      plan = esgcls::fold_plan_from_json(load_json(folds_path));
    } else {
      plan = esgcls::make_folds(corpus, k_folds, seed);
    }
    auto cfg = pipeline_config(pipe_opts, model_opts);
    auto cv = esgcls::cross_validate(corpus, plan, cfg, seed);
    auto j = esgcls::to_json(cv);
    j["best_fold"] = esgcls::select_best_fold(cv.folds);
    write_json_artifact(out_path, j, ctx);
    write_manifest(out_path, ctx);
    std::cout << "cv: mean weighted F1 " << cv.mean_weighted_f1 << " (stddev "
              << cv.stddev_weighted_f1 << ") over " << plan.k << " folds\n";
  });

  // --- denoise ---------------------------------------------------------------
  double x_percent = 10.0;
  bool per_language = false;
  std::string records_out;
  auto* den_cmd = add_common(
      app.add_subcommand("denoise", "Score label quality out-of-fold and prune the worst"));
  den_cmd->add_option("--in", in_path, "Corpus JSONL")->required();
  den_cmd->add_option("--out", out_path, "Pruned corpus JSONL")->required();
  den_cmd->add_option("--k", k_folds, "Number of scoring folds");
  den_cmd->add_option("--x-percent", x_percent, "Share of lowest-quality documents to delete");
  den_cmd->add_flag("--per-language", per_language, "Prune the share within each language");
  den_cmd->add_option("--records-out", records_out, "Quality records CSV");
  den_cmd->add_option("--languages", languages, "Keep only these languages (csv)");
  add_pipe_options(den_cmd, pipe_opts);
  add_model_options(den_cmd, model_opts, /*with_grid=*/true);
  den_cmd->callback([&] {
    RunContext ctx{"denoise", seed};
    ctx.set("task", task_str);
    ctx.set("in", in_path);
    ctx.set("k", k_folds);
    ctx.set("x_percent", x_percent);
    ctx.set("per_language", per_language);
    ctx.set("languages", languages);
    record_pipe_opts(ctx, pipe_opts);
    record_model_opts(ctx, model_opts);
    auto corpus = load_corpus(in_path, parse_task_or_throw(task_str), languages);
    auto plan = esgcls::make_folds(corpus, k_folds, seed);
    auto cfg = pipeline_config(pipe_opts, model_opts);
    auto records = esgcls::score_corpus(corpus, plan, cfg, seed);
    if (!records_out.empty())
      write_text(records_out, esgcls::quality_records_to_csv(records, corpus.class_names));
    auto pruned = esgcls::prune(corpus, records, x_percent, per_language);
    esgcls::write_jsonl(pruned, out_path);
    write_manifest(out_path, ctx);
    std::cout << "denoise: kept " << pruned.size() << " of " << corpus.size() << " documents\n";
  });

  // --- selftrain ---------------------------------------------------------------
  std::string pool_path, teacher_path, teacher2_path, method = "direct", pseudo_out;
  double min_confidence = 0.0;
  auto* st_cmd = add_common(
      app.add_subcommand("selftrain", "Pseudo-label a pool and balance-augment the training set"));
  st_cmd->add_option("--train-in", in_path, "Labeled training corpus JSONL")->required();
  st_cmd->add_option("--pool-in", pool_path, "Unlabeled pool corpus JSONL")->required();
  st_cmd->add_option("--teacher", teacher_path, "Teacher pipeline bundle JSON")->required();
  st_cmd->add_option("--teacher2", teacher2_path, "Second teacher (avg_conf)");
  st_cmd->add_option("--method", method, "Pseudo-label method: direct | avg_conf")
      ->check(CLI::IsMember({"direct", "avg_conf"}));
  st_cmd->add_option("--min-confidence", min_confidence, "Confidence floor for admission");
  st_cmd->add_option("--out", out_path, "Augmented corpus JSONL")->required();
  st_cmd->add_option("--pseudo-out", pseudo_out, "Pseudo-label CSV");
  st_cmd->callback([&] {
    RunContext ctx{"selftrain", seed};
    ctx.set("task", task_str);
    ctx.set("train_in", in_path);
    ctx.set("pool_in", pool_path);
    ctx.set("teacher", teacher_path);
    ctx.set("teacher2", teacher2_path);
    ctx.set("method", method);
    ctx.set("min_confidence", min_confidence);
    const auto task = parse_task_or_throw(task_str);
    auto train = load_corpus(in_path, task, "");
    auto pool = load_corpus(pool_path, task, "");
    auto teacher = esgcls::TextPipeline::from_json(load_json(teacher_path));

    std::vector<esgcls::PseudoLabel> pseudo;
    if (method == "direct") {
      pseudo = esgcls::pseudo_direct(teacher, teacher_path, pool);
    } else {
      if (teacher2_path.empty()) throw ConfigError("avg_conf needs --teacher2");
      auto teacher2 = esgcls::TextPipeline::from_json(load_json(teacher2_path));
      pseudo = esgcls::pseudo_avg_conf(teacher, teacher_path, teacher2, teacher2_path, pool);
    }
    if (!pseudo_out.empty())
      write_text(pseudo_out, esgcls::pseudo_labels_to_csv(pseudo, train.class_names));
    auto augmented = esgcls::balance_augment(train, pseudo, pool, seed, min_confidence);
    esgcls::write_jsonl(augmented, out_path);
    write_manifest(out_path, ctx);
    std::cout << "selftrain: " << augmented.size() - train.size() << " documents added ("
              << augmented.size() << " total)\n";
  });

  // --- ensemble ---------------------------------------------------------------
  std::string manifest_path, metrics_out;
  auto* ens_cmd =
      add_common(app.add_subcommand("ensemble", "Score-sum ensemble over member pipelines"));
  ens_cmd->add_option("--manifest", manifest_path, "Ensemble manifest JSON")->required();
  ens_cmd->add_option("--in", in_path, "Corpus JSONL to predict")->required();
  ens_cmd->add_option("--out", out_path, "Predictions CSV")->required();
  ens_cmd->add_option("--metrics-out", metrics_out, "Metrics JSON (requires labeled input)");
  ens_cmd->add_option("--languages", languages, "Keep only these languages (csv)");
  ens_cmd->callback([&] {
    RunContext ctx{"ensemble", seed};
    ctx.set("task", task_str);
    ctx.set("manifest", manifest_path);
    ctx.set("in", in_path);
    ctx.set("languages", languages);
    const auto task = parse_task_or_throw(task_str);
    auto corpus = load_corpus(in_path, task, languages);

    auto manifest = load_json(manifest_path);
    if (!manifest.contains("members") || manifest["members"].empty())
      throw DataError("ensemble manifest lists no members");
    const auto manifest_dir =
        std::filesystem::path(manifest_path).parent_path();
    std::vector<esgcls::TextPipeline> members;
    for (const auto& entry : manifest["members"]) {
      auto model_path = entry.at("model").get<std::string>();
      auto resolved = std::filesystem::path(model_path);
      if (resolved.is_relative()) resolved = manifest_dir / resolved;
      members.push_back(esgcls::TextPipeline::from_json(load_json(resolved.string())));
    }
    std::vector<const esgcls::TextScorer*> member_ptrs;
    for (const auto& m : members) member_ptrs.push_back(&m);

    std::ostringstream csv;
    csv.precision(17);
    csv << "doc_id,label";
    for (const auto& name : corpus.class_names) csv << ",score_" << name;
    csv << "\n";
    std::vector<int> gold, pred;
    for (const auto& d : corpus.docs) {
      auto p = esgcls::ensemble_score_document(member_ptrs, d);
      csv << d.id << "," << corpus.class_names[static_cast<std::size_t>(p.label)];
      for (double s : p.summed) csv << "," << s;
      csv << "\n";
      if (auto label = corpus.label_of(d)) {
        gold.push_back(*label);
        pred.push_back(p.label);
      }
    }
    write_text(out_path, csv.str());
    if (!metrics_out.empty()) {
      if (gold.empty()) throw DataError("metrics requested but the input corpus is unlabeled");
      write_json_artifact(metrics_out, esgcls::to_json(esgcls::score(gold, pred, corpus.class_names)),
                          ctx);
    }
    write_manifest(out_path, ctx);
    std::cout << "ensemble: predicted " << corpus.size() << " documents with " << members.size()
              << " members\n";
  });

  // --- evaluate ---------------------------------------------------------------
  std::string gold_path, pred_path;
  auto* eval_cmd =
      add_common(app.add_subcommand("evaluate", "Score predictions against gold labels"));
  eval_cmd->add_option("--gold", gold_path, "Gold corpus JSONL")->required();
  eval_cmd->add_option("--pred", pred_path, "Predictions CSV (doc_id,label)")->required();
  eval_cmd->add_option("--out", out_path, "Metrics JSON")->required();
  eval_cmd->add_option("--languages", languages, "Keep only these languages (csv)");
  eval_cmd->callback([&] {
    RunContext ctx{"evaluate", seed};
    ctx.set("task", task_str);
    ctx.set("gold", gold_path);
    ctx.set("pred", pred_path);
    ctx.set("languages", languages);
    const auto task = parse_task_or_throw(task_str);
    auto corpus = load_corpus(gold_path, task, languages);
    auto rows = read_predictions_csv(pred_path);
    std::map<std::string, std::string> predicted_label;
    for (const auto& r : rows) predicted_label[r.doc_id] = r.label;

    std::vector<int> gold, pred;
    for (const auto& d : corpus.docs) {
      auto label = corpus.label_of(d);
      if (!label) continue;
      auto it = predicted_label.find(d.id);
      if (it == predicted_label.end())
        throw DataError("no prediction for document '" + d.id + "'");
      gold.push_back(*label);
      pred.push_back(class_index_of(it->second, corpus.class_names));
    }
    if (gold.empty()) throw DataError("gold corpus has no labeled documents");
    auto report = esgcls::score(gold, pred, corpus.class_names);
    write_json_artifact(out_path, esgcls::to_json(report), ctx);
    write_manifest(out_path, ctx);
    std::cout << "evaluate: weighted F1 " << report.weighted_f1 << " over " << gold.size()
              << " documents\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const TrainError& e) {
    std::cerr << "training error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
