#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include <esgcls/corpus.hpp>
#include <esgcls/synth.hpp>

using namespace esgcls;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "esgcls_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

std::string record(const std::string& id, const std::string& lang, const std::string& title,
                   const std::string& content, const std::string& duration = "") {
  nlohmann::json j{{"id", id}, {"language", lang}, {"title", title}, {"content", content}};
  if (!duration.empty()) j["impact_duration"] = duration;
  return j.dump() + "\n";
}

}  // namespace

TEST_CASE("ingest reads valid jsonl in file order") {
  auto path = temp_file("ingest_ok.jsonl");
  write_file(path, record("a", "en", "t1", "hello world", "LT2Y") +
                       record("b", "fr", "", "bonjour", "GT5Y") +
                       record("c", "kr", "제목", "본문 내용") +
                       record("d", "jp", "", "本文", "Y2TO5"));
  auto [corpus, report] = ingest(path.string(), Task::duration);
  REQUIRE(corpus.size() == 4);
  CHECK(corpus.docs[0].id == "a");
  CHECK(corpus.docs[1].id == "b");
  CHECK(corpus.docs[2].id == "c");
  CHECK(corpus.docs[3].id == "d");
  CHECK(report.per_language.at("en") == 1);
  CHECK(report.per_language.at("fr") == 1);
  CHECK(report.per_language.at("kr") == 1);
  CHECK(report.per_language.at("jp") == 1);
  CHECK(report.labeled == 3);
  CHECK(*corpus.docs[0].duration_label == 0);
  CHECK(*corpus.docs[1].duration_label == 2);
  CHECK_FALSE(corpus.docs[2].duration_label.has_value());
}

TEST_CASE("ingest handles the full four-language record counts") {
  auto path = temp_file("ingest_counts.jsonl");
  std::ostringstream content;
  const std::vector<std::pair<std::string, int>> langs = {
      {"en", 545}, {"fr", 661}, {"kr", 800}, {"jp", 53}};
  int i = 0;
  for (const auto& [lang, n] : langs) {
    for (int j = 0; j < n; ++j, ++i)
      content << record("doc" + std::to_string(i), lang, "", "body " + std::to_string(i), "LT2Y");
  }
  write_file(path, content.str());
  auto [corpus, report] = ingest(path.string(), Task::duration);
  CHECK(corpus.size() == 2059);
  CHECK(report.per_language.at("en") == 545);
  CHECK(report.per_language.at("fr") == 661);
  CHECK(report.per_language.at("kr") == 800);
  CHECK(report.per_language.at("jp") == 53);
}

TEST_CASE("ingest of an empty file yields an empty corpus") {
  auto path = temp_file("ingest_empty.jsonl");
  write_file(path, "");
  auto [corpus, report] = ingest(path.string(), Task::duration);
  CHECK(corpus.size() == 0);
  CHECK(report.total == 0);
}

TEST_CASE("ingest rejects malformed records with line numbers") {
  SECTION("missing content on line 1") {
    auto path = temp_file("ingest_nocontent.jsonl");
    write_file(path, "{\"id\":\"a\",\"language\":\"en\",\"title\":\"t\"}\n");
    CHECK_THROWS_WITH(ingest(path.string(), Task::duration),
                      Catch::Matchers::ContainsSubstring("line 1"));
  }
  SECTION("malformed json names the offending line") {
    auto path = temp_file("ingest_badjson.jsonl");
    write_file(path, record("a", "en", "", "x") + "{not json\n");
    CHECK_THROWS_WITH(ingest(path.string(), Task::duration),
                      Catch::Matchers::ContainsSubstring("line 2"));
  }
  SECTION("unknown language") {
    auto path = temp_file("ingest_badlang.jsonl");
    write_file(path, record("a", "de", "", "x"));
    CHECK_THROWS_WITH(ingest(path.string(), Task::duration),
                      Catch::Matchers::ContainsSubstring("unknown language"));
  }
  SECTION("duplicate id") {
    auto path = temp_file("ingest_dupid.jsonl");
    write_file(path, record("a", "en", "", "x") + record("a", "en", "", "y"));
    CHECK_THROWS_WITH(ingest(path.string(), Task::duration),
                      Catch::Matchers::ContainsSubstring("duplicate id"));
  }
  SECTION("empty content") {
    auto path = temp_file("ingest_emptybody.jsonl");
    write_file(path, record("a", "en", "", ""));
    CHECK_THROWS_AS(ingest(path.string(), Task::duration), DataError);
  }
  SECTION("unknown label value") {
    auto path = temp_file("ingest_badlabel.jsonl");
    write_file(path, record("a", "en", "", "x", "SOON"));
    CHECK_THROWS_AS(ingest(path.string(), Task::duration), DataError);
  }
}

namespace {

Document make_doc(const std::string& id, Language lang, const std::string& title,
                  const std::string& body, std::optional<int> duration = std::nullopt) {
  Document d;
  d.id = id;
  d.language = lang;
  d.title = title;
  d.body = body;
  d.duration_label = duration;
  return d;
}

}  // namespace

TEST_CASE("deduplicate keeps the first of same-label duplicates") {
  Corpus c(Task::duration);
  c.docs.push_back(make_doc("k1", Language::kr, "제목", "같은 본문", 0));
  c.docs.push_back(make_doc("k2", Language::kr, "제목", "같은 본문", 0));
  c.docs.push_back(make_doc("k3", Language::kr, "제목", "다른 본문", 0));
  auto [deduped, report] = deduplicate(c, 7);
  REQUIRE(deduped.size() == 2);
  CHECK(deduped.docs[0].id == "k1");
  CHECK(deduped.docs[1].id == "k3");
  REQUIRE(report.dropped.size() == 1);
  CHECK(report.dropped[0].dropped_id == "k2");
  CHECK(report.dropped[0].reason == DropReason::same_label);
}

TEST_CASE("deduplicate picks a seeded member of conflicting-label groups") {
  Corpus c(Task::duration);
  c.docs.push_back(make_doc("f1", Language::fr, "Titre", "texte identique", 0));
  c.docs.push_back(make_doc("f2", Language::fr, "titre", "Texte Identique", 2));

  auto [d1, r1] = deduplicate(c, 42);
  auto [d2, r2] = deduplicate(c, 42);
  REQUIRE(d1.size() == 1);
  CHECK(d1.docs[0].id == d2.docs[0].id);  // same seed, same choice
  CHECK(r1.groups_conflicting == 1);

  // Across many seeds both members must be selectable.
  std::set<std::string> seen;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto [d, r] = deduplicate(c, seed);
    seen.insert(d.docs[0].id);
  }
  CHECK(seen.size() == 2);
}

TEST_CASE("deduplicate keeps documents with different bodies") {
  Corpus c(Task::duration);
  c.docs.push_back(make_doc("a", Language::en, "t", "one body", 0));
  c.docs.push_back(make_doc("b", Language::en, "t", "another body", 1));
  auto [deduped, report] = deduplicate(c, 1);
  CHECK(deduped.size() == 2);
  CHECK(report.dropped.empty());
}

TEST_CASE("identical text in different languages is not a duplicate") {
  Corpus c(Task::duration);
  c.docs.push_back(make_doc("a", Language::en, "t", "same", 0));
  c.docs.push_back(make_doc("b", Language::fr, "t", "same", 0));
  auto [deduped, report] = deduplicate(c, 1);
  CHECK(deduped.size() == 2);
}

TEST_CASE("deduplicate is idempotent") {
  auto spec = default_synth_spec({{Language::en, 30}, {Language::fr, 30}},
                                 {0.5, 0.3, 0.2}, 0.0, 11);
  auto corpus = generate(spec).corpus;
  // Inject duplicate groups of both kinds.
  auto dup_same = corpus.docs[0];
  dup_same.id = "dup-same";
  corpus.docs.push_back(dup_same);
  auto dup_conflict = corpus.docs[1];
  dup_conflict.id = "dup-conflict";
  dup_conflict.duration_label = (*dup_conflict.duration_label + 1) % 3;
  corpus.docs.push_back(dup_conflict);

  auto [once, r1] = deduplicate(corpus, 5);
  auto [twice, r2] = deduplicate(once, 5);
  REQUIRE(once.size() == twice.size());
  for (std::size_t i = 0; i < once.size(); ++i) CHECK(once.docs[i].id == twice.docs[i].id);
  CHECK(r2.dropped.empty());
}

TEST_CASE("make_folds splits proportional class counts exactly") {
  Corpus c(Task::duration);
  const std::vector<std::pair<int, int>> sizes = {{0, 60}, {1, 30}, {2, 10}};
  int id = 0;
  for (const auto& [cls, n] : sizes) {
    for (int i = 0; i < n; ++i, ++id)
      c.docs.push_back(make_doc("d" + std::to_string(id), Language::en, "", "b", cls));
  }
  auto plan = make_folds(c, 10, 3);
  REQUIRE(plan.assignment.size() == 100);
  std::map<std::pair<int, int>, int> counts;  // (class, fold) -> n
  for (const auto& d : c.docs)
    counts[{*d.duration_label, plan.assignment.at(d.id)}] += 1;
  for (int f = 0; f < 10; ++f) {
    CHECK(counts[{0, f}] == 6);
    CHECK(counts[{1, f}] == 3);
    CHECK(counts[{2, f}] == 1);
  }
  CHECK(plan.warnings.empty());
}

TEST_CASE("make_folds spreads a tiny class with a warning") {
  Corpus c(Task::duration);
  int id = 0;
  for (int i = 0; i < 40; ++i, ++id)
    c.docs.push_back(make_doc("a" + std::to_string(id), Language::en, "", "b", 0));
  for (int i = 0; i < 7; ++i, ++id)
    c.docs.push_back(make_doc("b" + std::to_string(id), Language::en, "", "b", 1));
  auto plan = make_folds(c, 10, 3);
  std::vector<int> tiny_per_fold(10, 0);
  for (const auto& d : c.docs) {
    if (*d.duration_label == 1) tiny_per_fold[static_cast<std::size_t>(plan.assignment.at(d.id))] += 1;
  }
  int ones = 0, zeros = 0;
  for (int n : tiny_per_fold) {
    CHECK(n <= 1);
    if (n == 1) ++ones;
    if (n == 0) ++zeros;
  }
  CHECK(ones == 7);
  CHECK(zeros == 3);
  REQUIRE(plan.warnings.size() == 1);
}

TEST_CASE("make_folds rejects degenerate fold counts") {
  Corpus c(Task::duration);
  for (int i = 0; i < 5; ++i)
    c.docs.push_back(make_doc("d" + std::to_string(i), Language::en, "", "b", 0));
  CHECK_THROWS_AS(make_folds(c, 1, 0), DataError);
  CHECK_THROWS_AS(make_folds(c, 10, 0), DataError);  // k > labeled documents
}

TEST_CASE("folds partition the labeled documents with stratification bound") {
  auto spec = default_synth_spec(
      {{Language::en, 120}, {Language::fr, 80}, {Language::kr, 60}}, {0.48, 0.30, 0.22}, 0.0, 9);
  auto corpus = generate(spec).corpus;
  const int k = 7;
  auto plan = make_folds(corpus, k, 1234);

  std::set<std::string> labeled_ids;
  for (const auto& d : corpus.docs)
    if (d.duration_label) labeled_ids.insert(d.id);
  std::set<std::string> assigned;
  for (const auto& [id, fold] : plan.assignment) {
    CHECK(fold >= 0);
    CHECK(fold < k);
    assigned.insert(id);
  }
  CHECK(assigned == labeled_ids);

  std::map<int, int> class_total;
  std::map<std::pair<int, int>, int> per_fold;
  for (const auto& d : corpus.docs) {
    class_total[*d.duration_label] += 1;
    per_fold[{*d.duration_label, plan.assignment.at(d.id)}] += 1;
  }
  for (const auto& [cls, total] : class_total) {
    for (int f = 0; f < k; ++f) {
      const double exact = static_cast<double>(total) / k;
      CHECK(std::abs(per_fold[{cls, f}] - exact) <= 1.0);
    }
  }
}

TEST_CASE("fold plans with around 2k documents give the expected split sizes") {
  auto spec = default_synth_spec({{Language::en, 545},
                                  {Language::fr, 661},
                                  {Language::kr, 800},
                                  {Language::jp, 53}},
                                 {0.48, 0.30, 0.22}, 0.0, 77);
  auto corpus = generate(spec).corpus;
  REQUIRE(corpus.size() == 2059);
  auto plan = make_folds(corpus, 10, 4);
  std::vector<int> fold_sizes(10, 0);
  for (const auto& [id, fold] : plan.assignment) fold_sizes[static_cast<std::size_t>(fold)] += 1;
  int total = 0;
  for (int f = 0; f < 10; ++f) {
    const int val = fold_sizes[static_cast<std::size_t>(f)];
    total += val;
    CHECK(val >= 200);
    CHECK(val <= 212);
    const int train = 2059 - val;
    CHECK(train >= 1847);
    CHECK(train <= 1859);
  }
  CHECK(total == 2059);
}

TEST_CASE("fold plans are byte-for-byte deterministic") {
  auto spec = default_synth_spec({{Language::en, 60}}, {0.5, 0.3, 0.2}, 0.0, 21);
  auto corpus = generate(spec).corpus;
  auto a = to_json(make_folds(corpus, 5, 99)).dump();
  auto b = to_json(make_folds(corpus, 5, 99)).dump();
  CHECK(a == b);
  auto c = to_json(make_folds(corpus, 5, 100)).dump();
  CHECK(a != c);
}

TEST_CASE("class_histogram counts and fractions") {
  SECTION("empty corpus") {
    Corpus c(Task::duration);
    auto h = class_histogram(c);
    CHECK(h.per_class.empty());
    CHECK(h.labeled_total == 0);
  }
  SECTION("per-language fractions") {
    Corpus c(Task::duration);
    for (int i = 0; i < 55; ++i)
      c.docs.push_back(make_doc("k" + std::to_string(i), Language::kr, "", "b", 0));
    for (int i = 0; i < 45; ++i)
      c.docs.push_back(make_doc("q" + std::to_string(i), Language::kr, "", "b", 2));
    auto h = class_histogram(c);
    CHECK(h.per_language.at("kr").at("LT2Y") == 55);
    auto j = to_json(h);
    CHECK(j["per_language"]["kr"]["LT2Y"]["fraction"].get<double>() ==
          Catch::Approx(0.55).margin(1e-12));
  }
  SECTION("direct counts") {
    Corpus c(Task::duration);
    c.docs.push_back(make_doc("1", Language::en, "", "b", 0));
    c.docs.push_back(make_doc("2", Language::en, "", "b", 0));
    c.docs.push_back(make_doc("3", Language::en, "", "b", 1));
    auto h = class_histogram(c);
    CHECK(h.per_class.at("LT2Y") == 2);
    CHECK(h.per_class.at("Y2TO5") == 1);
    CHECK(h.per_class.count("GT5Y") == 0);
  }
}

TEST_CASE("jsonl round trip preserves documents") {
  auto spec = default_synth_spec({{Language::en, 20}, {Language::jp, 10}}, {0.5, 0.3, 0.2}, 0.1, 3);
  auto corpus = generate(spec).corpus;
  auto path = temp_file("roundtrip.jsonl");
  write_jsonl(corpus, path.string());
  auto [loaded, report] = ingest(path.string(), Task::duration);
  REQUIRE(loaded.size() == corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    CHECK(loaded.docs[i].id == corpus.docs[i].id);
    CHECK(loaded.docs[i].body == corpus.docs[i].body);
    CHECK(loaded.docs[i].duration_label == corpus.docs[i].duration_label);
  }
}
