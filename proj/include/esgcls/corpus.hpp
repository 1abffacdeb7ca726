#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include <esgcls/errors.hpp>
#include <esgcls/rng.hpp>
#include <esgcls/unicode.hpp>

namespace esgcls {

enum class Language { en, fr, kr, jp };
enum class Task { duration, level };

inline const std::vector<Language>& all_languages() {
  static const std::vector<Language> langs = {Language::en, Language::fr,
                                              Language::kr, Language::jp};
  return langs;
}

inline std::string to_string(Language l) {
  switch (l) {
    case Language::en: return "en";
    case Language::fr: return "fr";
    case Language::kr: return "kr";
    case Language::jp: return "jp";
  }
  return "?";
}

inline std::optional<Language> parse_language(std::string_view s) {
  if (s == "en") return Language::en;
  if (s == "fr") return Language::fr;
  if (s == "kr") return Language::kr;
  if (s == "jp") return Language::jp;
  return std::nullopt;
}

inline std::string to_string(Task t) {
  return t == Task::duration ? "duration" : "level";
}

inline std::optional<Task> parse_task(std::string_view s) {
  if (s == "duration") return Task::duration;
  if (s == "level") return Task::level;
  return std::nullopt;
}

/// Class identifiers, in canonical (index) order for each task.
inline const std::vector<std::string>& task_class_names(Task t) {
  static const std::vector<std::string> duration = {"LT2Y", "Y2TO5", "GT5Y"};
  static const std::vector<std::string> level = {"low", "medium", "high"};
  return t == Task::duration ? duration : level;
}

/// One news article. Labels are optional; a missing label marks the document
/// as part of an unlabeled pool. `provenance` is empty for original records
/// and names the generation method for pseudo-labeled additions.
struct Document {
  std::string id;
  Language language = Language::en;
  std::string title;  // may be empty
  std::string body;   // never empty after ingestion
  std::optional<int> duration_label;  // index into duration class names
  std::optional<int> level_label;     // index into level class names
  std::string provenance;

  std::optional<int> label(Task t) const {
    return t == Task::duration ? duration_label : level_label;
  }

  void set_label(Task t, int cls) {
    if (t == Task::duration)
      duration_label = cls;
    else
      level_label = cls;
  }

  /// Text used by the tokenizer and the dedup key: title and body joined
  /// with a newline (harmless when the title is empty).
  std::string text() const { return title + "\n" + body; }
};

struct Corpus {
  Task task = Task::duration;
  std::vector<std::string> class_names;  // fixed order, index = class id
  std::vector<Document> docs;            // stable insertion order

  explicit Corpus(Task t = Task::duration)
      : task(t), class_names(task_class_names(t)) {}

  std::size_t size() const { return docs.size(); }

  std::optional<int> label_of(const Document& d) const { return d.label(task); }

  std::vector<int> labeled_indices() const {
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(docs.size()); ++i) {
      if (docs[i].label(task)) out.push_back(i);
    }
    return out;
  }

  Corpus subset(const std::vector<int>& indices) const {
    Corpus out(task);
    out.docs.reserve(indices.size());
    for (int i : indices) out.docs.push_back(docs[static_cast<std::size_t>(i)]);
    return out;
  }

  Corpus filter_languages(const std::set<Language>& keep) const {
    Corpus out(task);
    for (const auto& d : docs) {
      if (keep.count(d.language)) out.docs.push_back(d);
    }
    return out;
  }
};

// ---------------------------------------------------------------------------
// JSONL ingestion

struct IngestReport {
  std::map<std::string, int> per_language;  // language tag -> count
  int total = 0;
  int labeled = 0;  // for the corpus task
};

namespace detail {

inline int parse_class_or_throw(const std::string& value, Task t, int line_no,
                                const char* field) {
  const auto& names = task_class_names(t);
  for (int i = 0; i < static_cast<int>(names.size()); ++i) {
    if (names[i] == value) return i;
  }
  throw DataError("line " + std::to_string(line_no) + ": unknown " + field +
                  " label '" + value + "'");
}

inline Document parse_jsonl_record(const std::string& line, int line_no) {
  nlohmann::json rec;
  try {
    rec = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("line " + std::to_string(line_no) +
                    ": malformed JSON record");
  }
  if (!rec.is_object())
    throw DataError("line " + std::to_string(line_no) + ": record is not an object");

  Document d;
  if (!rec.contains("id") || !rec["id"].is_string() || rec["id"].get<std::string>().empty())
    throw DataError("line " + std::to_string(line_no) + ": missing or empty 'id'");
  d.id = rec["id"].get<std::string>();

  if (!rec.contains("language") || !rec["language"].is_string())
    throw DataError("line " + std::to_string(line_no) + ": missing 'language'");
  auto lang = parse_language(rec["language"].get<std::string>());
  if (!lang)
    throw DataError("line " + std::to_string(line_no) + ": unknown language '" +
                    rec["language"].get<std::string>() + "'");
  d.language = *lang;

  if (rec.contains("title")) {
    if (!rec["title"].is_string())
      throw DataError("line " + std::to_string(line_no) + ": 'title' must be a string");
    d.title = rec["title"].get<std::string>();
  }

  if (!rec.contains("content") || !rec["content"].is_string() ||
      rec["content"].get<std::string>().empty())
    throw DataError("line " + std::to_string(line_no) + ": missing or empty 'content'");
  d.body = rec["content"].get<std::string>();

  if (rec.contains("impact_duration") && !rec["impact_duration"].is_null()) {
    if (!rec["impact_duration"].is_string())
      throw DataError("line " + std::to_string(line_no) + ": 'impact_duration' must be a string");
    d.duration_label = parse_class_or_throw(rec["impact_duration"].get<std::string>(),
                                            Task::duration, line_no, "impact_duration");
  }
  if (rec.contains("impact_level") && !rec["impact_level"].is_null()) {
    if (!rec["impact_level"].is_string())
      throw DataError("line " + std::to_string(line_no) + ": 'impact_level' must be a string");
    d.level_label = parse_class_or_throw(rec["impact_level"].get<std::string>(),
                                         Task::level, line_no, "impact_level");
  }
  if (rec.contains("provenance") && rec["provenance"].is_string())
    d.provenance = rec["provenance"].get<std::string>();
  return d;
}

}  // namespace detail

/// Reads a JSONL corpus: one object per line with fields id, language, title,
/// content and optional impact_duration / impact_level labels. Blank lines are
/// skipped; anything else malformed raises a DataError naming the line.
inline std::pair<Corpus, IngestReport> ingest(const std::string& path, Task task) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus file: " + path);

  Corpus corpus(task);
  IngestReport report;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    Document d = detail::parse_jsonl_record(line, line_no);
    if (!seen_ids.insert(d.id).second)
      throw DataError("line " + std::to_string(line_no) + ": duplicate id '" + d.id + "'");
    report.per_language[to_string(d.language)] += 1;
    report.total += 1;
    if (d.label(task)) report.labeled += 1;
    corpus.docs.push_back(std::move(d));
  }
  return {std::move(corpus), std::move(report)};
}

inline nlohmann::json document_to_json(const Document& d) {
  nlohmann::json rec;
  rec["id"] = d.id;
  rec["language"] = to_string(d.language);
  rec["title"] = d.title;
  rec["content"] = d.body;
  if (d.duration_label)
    rec["impact_duration"] = task_class_names(Task::duration)[static_cast<std::size_t>(*d.duration_label)];
  if (d.level_label)
    rec["impact_level"] = task_class_names(Task::level)[static_cast<std::size_t>(*d.level_label)];
  if (!d.provenance.empty()) rec["provenance"] = d.provenance;
  return rec;
}

inline void write_jsonl(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write corpus file: " + path);
  for (const auto& d : corpus.docs) out << document_to_json(d).dump() << "\n";
}

// ---------------------------------------------------------------------------
// Deduplication

enum class DropReason { same_label, conflicting_label };

struct DedupReport {
  struct Entry {
    std::string dropped_id;
    std::string kept_id;
    DropReason reason;
  };
  std::vector<Entry> dropped;
  int groups_same_label = 0;
  int groups_conflicting = 0;
};

inline nlohmann::json to_json(const DedupReport& r) {
  nlohmann::json out;
  out["groups_same_label"] = r.groups_same_label;
  out["groups_conflicting"] = r.groups_conflicting;
  auto entries = nlohmann::json::array();
  for (const auto& e : r.dropped) {
    entries.push_back({{"dropped_id", e.dropped_id},
                       {"kept_id", e.kept_id},
                       {"reason", e.reason == DropReason::same_label
                                      ? "same_label"
                                      : "conflicting_label"}});
  }
  out["dropped"] = entries;
  return out;
}

/// Removes duplicate documents. The duplicate key is the lowercased
/// title+"\n"+body within one language. Groups whose task labels all agree
/// keep the first occurrence; groups with conflicting labels keep one member
/// chosen uniformly at random from the seed.
inline std::pair<Corpus, DedupReport> deduplicate(const Corpus& corpus,
                                                  std::uint64_t seed) {
  struct Group {
    std::vector<int> members;  // indices in corpus order
  };
  std::unordered_map<std::string, int> key_to_group;
  std::vector<Group> groups;

  for (int i = 0; i < static_cast<int>(corpus.docs.size()); ++i) {
    const auto& d = corpus.docs[static_cast<std::size_t>(i)];
    std::string key = to_string(d.language) + "\x1f" + fold_case(d.text());
    auto [it, inserted] = key_to_group.emplace(std::move(key), static_cast<int>(groups.size()));
    if (inserted) groups.push_back(Group{});
    groups[static_cast<std::size_t>(it->second)].members.push_back(i);
  }

  Rng rng(derive_seed(seed, "dedup"));
  DedupReport report;
  std::vector<char> keep(corpus.docs.size(), 1);

  for (const auto& g : groups) {
    if (g.members.size() < 2) continue;
    bool conflict = false;
    const auto first_label = corpus.label_of(corpus.docs[static_cast<std::size_t>(g.members[0])]);
    for (std::size_t j = 1; j < g.members.size(); ++j) {
      if (corpus.label_of(corpus.docs[static_cast<std::size_t>(g.members[j])]) != first_label) {
        conflict = true;
        break;
      }
    }
    int kept;
    if (conflict) {
      kept = g.members[static_cast<std::size_t>(rng.below(g.members.size()))];
      ++report.groups_conflicting;
    } else {
      kept = g.members[0];
      ++report.groups_same_label;
    }
    for (int m : g.members) {
      if (m == kept) continue;
      keep[static_cast<std::size_t>(m)] = 0;
      report.dropped.push_back({corpus.docs[static_cast<std::size_t>(m)].id,
                                corpus.docs[static_cast<std::size_t>(kept)].id,
                                conflict ? DropReason::conflicting_label
                                         : DropReason::same_label});
    }
  }

  Corpus out(corpus.task);
  out.docs.reserve(corpus.docs.size());
  for (std::size_t i = 0; i < corpus.docs.size(); ++i) {
    if (keep[i]) out.docs.push_back(corpus.docs[i]);
  }
  return {std::move(out), std::move(report)};
}

// ---------------------------------------------------------------------------
// Stratified folds

struct FoldPlan {
  int k = 10;
  std::map<std::string, int> assignment;  // doc id -> fold, sorted for stable output
  std::vector<std::string> warnings;

  std::vector<int> fold_of_corpus(const Corpus& corpus) const {
    std::vector<int> folds;
    folds.reserve(corpus.docs.size());
    for (const auto& d : corpus.docs) {
      auto it = assignment.find(d.id);
      folds.push_back(it == assignment.end() ? -1 : it->second);
    }
    return folds;
  }
};

inline nlohmann::json to_json(const FoldPlan& plan) {
  nlohmann::json out;
  out["k"] = plan.k;
  out["assignment"] = nlohmann::json::object();
  for (const auto& [id, fold] : plan.assignment) out["assignment"][id] = fold;
  out["warnings"] = plan.warnings;
  return out;
}

inline FoldPlan fold_plan_from_json(const nlohmann::json& j) {
  FoldPlan plan;
  plan.k = j.at("k").get<int>();
  for (auto it = j.at("assignment").begin(); it != j.at("assignment").end(); ++it)
    plan.assignment[it.key()] = it.value().get<int>();
  if (j.contains("warnings")) plan.warnings = j["warnings"].get<std::vector<std::string>>();
  return plan;
}

/// Stratified k-fold assignment over the labeled documents: per class the
/// members are shuffled with the seed and dealt round-robin, which keeps every
/// (class, fold) count within 1 of exact proportionality.
inline FoldPlan make_folds(const Corpus& corpus, int k, std::uint64_t seed) {
  if (k < 2) throw DataError("fold count must be >= 2");
  const auto labeled = corpus.labeled_indices();
  if (static_cast<int>(labeled.size()) < k)
    throw DataError("fold count " + std::to_string(k) + " exceeds labeled document count " +
                    std::to_string(labeled.size()));

  FoldPlan plan;
  plan.k = k;
  const int n_classes = static_cast<int>(corpus.class_names.size());
  for (int c = 0; c < n_classes; ++c) {
    std::vector<int> members;
    for (int i : labeled) {
      if (*corpus.label_of(corpus.docs[static_cast<std::size_t>(i)]) == c) members.push_back(i);
    }
    if (members.empty()) continue;
    if (static_cast<int>(members.size()) < k) {
      plan.warnings.push_back("class '" + corpus.class_names[static_cast<std::size_t>(c)] +
                              "' has only " + std::to_string(members.size()) +
                              " documents for " + std::to_string(k) + " folds");
    }
    Rng rng(derive_seed(seed, "folds", static_cast<std::uint64_t>(c)));
    rng.shuffle(members);
    for (std::size_t i = 0; i < members.size(); ++i) {
      plan.assignment[corpus.docs[static_cast<std::size_t>(members[i])].id] =
          static_cast<int>(i % static_cast<std::size_t>(k));
    }
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Class histogram

struct ClassHistogram {
  std::map<std::string, int> per_class;                          // class -> count
  std::map<std::string, std::map<std::string, int>> per_language;  // lang -> class -> count
  int labeled_total = 0;
};

inline ClassHistogram class_histogram(const Corpus& corpus) {
  ClassHistogram h;
  for (const auto& d : corpus.docs) {
    auto label = corpus.label_of(d);
    if (!label) continue;
    const auto& name = corpus.class_names[static_cast<std::size_t>(*label)];
    h.per_class[name] += 1;
    h.per_language[to_string(d.language)][name] += 1;
    h.labeled_total += 1;
  }
  return h;
}

inline nlohmann::json to_json(const ClassHistogram& h) {
  nlohmann::json out;
  out["labeled_total"] = h.labeled_total;
  out["per_class"] = nlohmann::json::object();
  for (const auto& [cls, n] : h.per_class) {
    out["per_class"][cls] = {
        {"count", n},
        {"fraction", h.labeled_total > 0 ? static_cast<double>(n) / h.labeled_total : 0.0}};
  }
  out["per_language"] = nlohmann::json::object();
  for (const auto& [lang, classes] : h.per_language) {
    int lang_total = 0;
    for (const auto& [cls, n] : classes) lang_total += n;
    auto& node = out["per_language"][lang];
    node = nlohmann::json::object();
    for (const auto& [cls, n] : classes) {
      node[cls] = {{"count", n},
                   {"fraction", lang_total > 0 ? static_cast<double>(n) / lang_total : 0.0}};
    }
  }
  return out;
}

}  // namespace esgcls
