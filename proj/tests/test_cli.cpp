#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdlib>
#include <sys/wait.h>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

// CLI integration tests. ESGCLS_BIN is injected by the build with the path of
// the built binary.

namespace {

namespace fs = std::filesystem;

fs::path work_dir() {
  auto dir = fs::temp_directory_path() / "esgcls_cli_tests";
  fs::create_directories(dir);
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = std::string(ESGCLS_BIN) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

nlohmann::json load(const fs::path& path) { return nlohmann::json::parse(slurp(path)); }

long line_count(const fs::path& path) {
  const auto text = slurp(path);
  return std::count(text.begin(), text.end(), '\n');
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

}  // namespace

TEST_CASE("synth writes a deterministic corpus with manifest and truth file") {
  auto dir = work_dir();
  auto corpus = dir / "synth.jsonl";
  auto truth = dir / "truth.json";
  const std::string args = "synth --seed 7 --counts en=40,kr=30 --priors 0.5,0.3,0.2 "
                           "--noise 0.2 --out " + q(corpus) + " --truth-out " + q(truth);
  REQUIRE(run(args) == 0);
  REQUIRE(fs::exists(corpus));
  REQUIRE(fs::exists(truth));
  REQUIRE(fs::exists(dir / "synth.jsonl.manifest.json"));

  auto first = slurp(corpus);
  REQUIRE(run(args) == 0);
  CHECK(slurp(corpus) == first);  // byte-identical rerun

  auto truth_json = load(truth);
  CHECK(truth_json["meta"]["seed"] == 7);
  CHECK(truth_json["meta"]["command"] == "synth");
  CHECK(truth_json["flipped_ids"].size() == 14);  // floor(70 * 0.2)
}

TEST_CASE("ingest, folds and a small cv run complete with embedded meta") {
  auto dir = work_dir();
  auto corpus = dir / "cv_corpus.jsonl";
  REQUIRE(run("synth --seed 3 --counts en=60 --priors 0.5,0.3,0.2 --out " + q(corpus)) == 0);

  auto report = dir / "ingest_report.json";
  REQUIRE(run("ingest --seed 3 --in " + q(corpus) + " --report " + q(report)) == 0);
  auto rj = load(report);
  CHECK(rj["total"] == 60);
  CHECK(rj["labeled"] == 60);
  CHECK(rj["per_language"]["en"] == 60);

  auto folds = dir / "folds.json";
  REQUIRE(run("folds --seed 4 --k 3 --in " + q(corpus) + " --out " + q(folds)) == 0);
  auto fj = load(folds);
  CHECK(fj["k"] == 3);
  CHECK(fj["assignment"].size() == 60);

  auto cv_out = dir / "cv.json";
  const std::string cv_args =
      "cv --seed 5 --k 3 --in " + q(corpus) + " --out " + q(cv_out) +
      " --model rf --n-trees 8 --max-depth 8 --vocab-size 400 --grid single";
  REQUIRE(run(cv_args) == 0);
  auto cj = load(cv_out);
  CHECK(cj["folds"].size() == 3);
  CHECK(cj["mean_weighted_f1"].get<double>() > 0.7);
  CHECK(cj["meta"]["seed"] == 5);
  CHECK(cj["meta"]["config_hash"].is_string());

  // Identical config reruns are byte-identical.
  auto first = slurp(cv_out);
  REQUIRE(run(cv_args) == 0);
  CHECK(slurp(cv_out) == first);
}

TEST_CASE("config files provide defaults and flags override them") {
  auto dir = work_dir();
  auto corpus = dir / "cfg_corpus.jsonl";
  auto config = dir / "run.cfg";
  {
    std::ofstream cfg(config);
    cfg << "seed=11\n" << "counts=en=25\n" << "priors=0.5,0.3,0.2\n"
        << "out=" << corpus.string() << "\n";
  }
  REQUIRE(run("synth --config " + q(config)) == 0);
  REQUIRE(fs::exists(corpus));
  auto baseline = slurp(corpus);

  // --counts on the command line wins over the config value.
  REQUIRE(run("synth --config " + q(config) + " --counts en=10") == 0);
  auto smaller = slurp(corpus);
  CHECK(smaller != baseline);
  CHECK(std::count(smaller.begin(), smaller.end(), '\n') == 10);
}

TEST_CASE("cli maps error classes onto exit codes") {
  auto dir = work_dir();
  CHECK(run("no-such-command --seed 1") == 2);
  CHECK(run("synth --counts en=10 --out /tmp/x.jsonl") == 2);  // seed missing
  CHECK(run("cv --seed 1 --in " + q(dir / "missing.jsonl") + " --out " + q(dir / "o.json")) == 3);

  // Training on a single-class corpus fails with the training exit code.
  auto corpus = dir / "single_class.jsonl";
  REQUIRE(run("synth --seed 2 --counts en=30 --priors 1.0,0.0,0.0 --out " + q(corpus)) == 0);
  CHECK(run("train --seed 2 --model logistic --vocab-size 300 --in " + q(corpus) +
            " --out " + q(dir / "m.json")) == 4);
}

TEST_CASE("dedup drops injected duplicates") {
  auto dir = work_dir();
  auto corpus = dir / "dup_corpus.jsonl";
  REQUIRE(run("synth --seed 9 --counts en=20 --priors 0.5,0.3,0.2 --out " + q(corpus)) == 0);
  // Duplicate the first record under a new id.
  auto lines = slurp(corpus);
  const auto first_line = lines.substr(0, lines.find('\n'));
  auto rec = nlohmann::json::parse(first_line);
  rec["id"] = "copy-of-first";
  std::ofstream(corpus, std::ios::app) << rec.dump() << "\n";

  auto out = dir / "deduped.jsonl";
  auto report = dir / "dedup_report.json";
  REQUIRE(run("dedup --seed 9 --in " + q(corpus) + " --out " + q(out) +
              " --report " + q(report)) == 0);
  CHECK(line_count(out) == 20);
  auto rj = load(report);
  CHECK(rj["dropped"].size() == 1);
}

TEST_CASE("train, ensemble and evaluate round trip") {
  auto dir = work_dir();
  auto corpus = dir / "flow_corpus.jsonl";
  REQUIRE(run("synth --seed 21 --counts en=50 --priors 0.4,0.3,0.3 --out " + q(corpus)) == 0);

  auto model_a = dir / "model_a.json";
  auto model_b = dir / "model_b.json";
  REQUIRE(run("train --seed 22 --model rf --n-trees 6 --max-depth 6 --vocab-size 400 --in " +
              q(corpus) + " --out " + q(model_a)) == 0);
  REQUIRE(run("train --seed 23 --model logistic --C 5 --vocab-size 400 --in " + q(corpus) +
              " --out " + q(model_b)) == 0);

  auto manifest = dir / "ensemble.json";
  {
    nlohmann::json m;
    m["members"] = {{{"id", "rf"}, {"model", model_a.filename().string()}},
                    {{"id", "logistic"}, {"model", model_b.filename().string()}}};
    std::ofstream(manifest) << m.dump(2);
  }
  auto predictions = dir / "predictions.csv";
  auto ens_metrics = dir / "ens_metrics.json";
  REQUIRE(run("ensemble --seed 24 --manifest " + q(manifest) + " --in " + q(corpus) +
              " --out " + q(predictions) + " --metrics-out " + q(ens_metrics)) == 0);
  auto pred_text = slurp(predictions);
  CHECK(pred_text.rfind("doc_id,label", 0) == 0);
  CHECK(std::count(pred_text.begin(), pred_text.end(), '\n') == 51);  // header + 50 rows

  auto metrics = dir / "eval_metrics.json";
  REQUIRE(run("evaluate --seed 25 --gold " + q(corpus) + " --pred " + q(predictions) +
              " --out " + q(metrics)) == 0);
  auto mj = load(metrics);
  CHECK(mj["weighted_f1"].get<double>() > 0.8);  // members memorized the training corpus
  CHECK(mj["weighted_f1"] == load(ens_metrics)["weighted_f1"]);
}

TEST_CASE("tokenizer-train and featurize write loadable models") {
  auto dir = work_dir();
  auto corpus = dir / "tok_corpus.jsonl";
  REQUIRE(run("synth --seed 31 --counts en=25 --priors 0.5,0.3,0.2 --out " + q(corpus)) == 0);

  auto tok = dir / "tokenizer.json";
  REQUIRE(run("tokenizer-train --seed 31 --vocab-size 400 --in " + q(corpus) +
              " --out " + q(tok)) == 0);
  auto tj = load(tok);
  CHECK(tj["vocab"].size() == tj["vocab_size"].get<std::size_t>());

  auto tfidf = dir / "tfidf.json";
  auto vectors = dir / "vectors.jsonl";
  REQUIRE(run("featurize --seed 31 --in " + q(corpus) + " --tokenizer " + q(tok) +
              " --out " + q(tfidf) + " --vectors-out " + q(vectors)) == 0);
  CHECK(load(tfidf)["n_docs"] == 25);
  CHECK(line_count(vectors) == 25);
}

TEST_CASE("denoise prunes and selftrain augments") {
  auto dir = work_dir();
  auto corpus = dir / "noisy.jsonl";
  REQUIRE(run("synth --seed 41 --counts en=60 --priors 0.5,0.3,0.2 --noise 0.15 --out " +
              q(corpus)) == 0);

  auto pruned = dir / "pruned.jsonl";
  auto records = dir / "quality.csv";
  REQUIRE(run("denoise --seed 41 --k 3 --x-percent 10 --n-trees 8 --max-depth 8 "
              "--vocab-size 400 --grid single --in " + q(corpus) + " --out " + q(pruned) +
              " --records-out " + q(records)) == 0);
  CHECK(line_count(pruned) == 54);  // 60 - floor(6)
  CHECK(slurp(records).rfind("doc_id,gold,predicted,confidence,quality", 0) == 0);

  auto pool = dir / "pool.jsonl";
  REQUIRE(run("synth --seed 42 --counts en=80 --priors 0.34,0.33,0.33 --out " + q(pool)) == 0);
  // Strip labels so the pool is a genuine unlabeled collection.
  {
    std::istringstream in(slurp(pool));
    std::ofstream out(pool);
    std::string line;
    while (std::getline(in, line)) {
      auto rec = nlohmann::json::parse(line);
      rec.erase("impact_duration");
      rec["id"] = "pool-" + rec["id"].get<std::string>();
      out << rec.dump() << "\n";
    }
  }

  auto teacher = dir / "teacher.json";
  REQUIRE(run("train --seed 43 --model rf --n-trees 8 --max-depth 8 --vocab-size 400 --in " +
              q(corpus) + " --out " + q(teacher)) == 0);

  auto augmented = dir / "augmented.jsonl";
  auto pseudo = dir / "pseudo.csv";
  REQUIRE(run("selftrain --seed 44 --train-in " + q(corpus) + " --pool-in " + q(pool) +
              " --teacher " + q(teacher) + " --method direct --out " + q(augmented) +
              " --pseudo-out " + q(pseudo)) == 0);
  const auto n_aug = line_count(augmented);
  CHECK(n_aug >= 60);
  CHECK(line_count(pseudo) == 81);  // header + pool
}
