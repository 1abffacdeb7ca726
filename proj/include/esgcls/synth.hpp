#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <esgcls/corpus.hpp>
#include <esgcls/errors.hpp>
#include <esgcls/rng.hpp>

namespace esgcls {

/// Seeded synthetic corpus recipe: per-language document counts and class
/// priors, class-indicative keyword lexicons over a shared background
/// vocabulary, and a label-noise rate. Stands in for non-redistributable news
/// data in tests and desk-scale experiments.
struct SynthSpec {
  Task task = Task::duration;
  std::map<Language, int> n_docs;
  std::map<Language, std::vector<double>> class_priors;
  std::map<Language, std::vector<std::vector<std::string>>> lexicons;  // [class] -> keywords
  std::map<Language, std::vector<std::string>> background;
  double noise_rate = 0.0;
  int len_min = 40;
  int len_max = 80;
  double keyword_prob = 0.55;
  std::uint64_t seed = 0;
};

struct SynthResult {
  Corpus corpus;
  std::map<std::string, int> ground_truth;  // id -> class before any flip
  std::set<std::string> flipped_ids;
};

/// Uniform spec with auto-generated lexicons: `count` documents per language,
/// the same priors everywhere.
inline SynthSpec default_synth_spec(const std::map<Language, int>& counts,
                                    const std::vector<double>& priors, double noise_rate,
                                    std::uint64_t seed, Task task = Task::duration) {
  SynthSpec spec;
  spec.task = task;
  spec.noise_rate = noise_rate;
  spec.seed = seed;
  const int k = static_cast<int>(task_class_names(task).size());
  for (const auto& [lang, n] : counts) {
    spec.n_docs[lang] = n;
    spec.class_priors[lang] = priors;
    std::vector<std::vector<std::string>> lex(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c) {
      for (int i = 0; i < 20; ++i)
        lex[static_cast<std::size_t>(c)].push_back(to_string(lang) + "c" + std::to_string(c) +
                                                   "w" + std::to_string(i));
    }
    spec.lexicons[lang] = std::move(lex);
    std::vector<std::string> bg;
    for (int i = 0; i < 30; ++i) bg.push_back(to_string(lang) + "bg" + std::to_string(i));
    spec.background[lang] = std::move(bg);
  }
  return spec;
}

namespace detail {

/// Largest-remainder allocation of n documents over class priors.
inline std::vector<int> allocate_counts(int n, const std::vector<double>& priors) {
  const int k = static_cast<int>(priors.size());
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  std::vector<std::pair<double, int>> remainders;  // (-fraction, class)
  int assigned = 0;
  for (int c = 0; c < k; ++c) {
    const double exact = static_cast<double>(n) * priors[static_cast<std::size_t>(c)];
    counts[static_cast<std::size_t>(c)] = static_cast<int>(std::floor(exact));
    assigned += counts[static_cast<std::size_t>(c)];
    remainders.push_back({-(exact - std::floor(exact)), c});
  }
  std::sort(remainders.begin(), remainders.end());
  for (int i = 0; i < n - assigned; ++i)
    counts[static_cast<std::size_t>(remainders[static_cast<std::size_t>(i)].second)] += 1;
  return counts;
}

}  // namespace detail

inline SynthResult generate(const SynthSpec& spec) {
  const int k = static_cast<int>(task_class_names(spec.task).size());
  long long total = 0;
  for (const auto& [lang, n] : spec.n_docs) total += n;
  if (total <= 0) throw DataError("synthetic spec generates no documents");
  if (!(spec.noise_rate >= 0.0 && spec.noise_rate < 1.0))
    throw DataError("noise rate must lie in [0, 1)");
  if (spec.len_min < 1 || spec.len_max < spec.len_min)
    throw DataError("invalid document length range");

  SynthResult result;
  result.corpus = Corpus(spec.task);

  for (Language lang : all_languages()) {
    auto it = spec.n_docs.find(lang);
    if (it == spec.n_docs.end() || it->second <= 0) continue;
    const int n = it->second;

    const auto& priors = spec.class_priors.at(lang);
    if (static_cast<int>(priors.size()) != k)
      throw DataError("priors for " + to_string(lang) + " do not match the class count");
    double prior_sum = 0.0;
    for (double p : priors) prior_sum += p;
    if (std::abs(prior_sum - 1.0) > 1e-9)
      throw DataError("priors for " + to_string(lang) + " do not sum to 1");
    const auto& lex = spec.lexicons.at(lang);
    if (static_cast<int>(lex.size()) != k)
      throw DataError("lexicons for " + to_string(lang) + " do not match the class count");
    for (const auto& words : lex) {
      if (words.empty()) throw DataError("empty keyword lexicon for " + to_string(lang));
    }
    const auto& bg = spec.background.at(lang);
    if (bg.empty() && spec.keyword_prob < 1.0)
      throw DataError("empty background vocabulary for " + to_string(lang));

    const auto counts = detail::allocate_counts(n, priors);
    Rng rng(derive_seed(spec.seed, "lang", static_cast<std::uint64_t>(lang)));
    int doc_index = 0;
    for (int c = 0; c < k; ++c) {
      const auto& keywords = lex[static_cast<std::size_t>(c)];
      for (int j = 0; j < counts[static_cast<std::size_t>(c)]; ++j, ++doc_index) {
        auto draw_token = [&]() -> const std::string& {
          if (rng.next_double() < spec.keyword_prob)
            return keywords[rng.below(keywords.size())];
          return bg[rng.below(bg.size())];
        };
        Document d;
        char buf[16];
        std::snprintf(buf, sizeof buf, "%05d", doc_index);
        d.id = "syn-" + to_string(lang) + "-" + buf;
        d.language = lang;
        d.title = draw_token() + " " + draw_token();
        const int len = spec.len_min +
                        static_cast<int>(rng.below(static_cast<std::uint64_t>(
                            spec.len_max - spec.len_min + 1)));
        std::string body;
        for (int t = 0; t < len; ++t) {
          if (t > 0) body += " ";
          body += draw_token();
        }
        d.body = std::move(body);
        d.set_label(spec.task, c);
        result.ground_truth[d.id] = c;
        result.corpus.docs.push_back(std::move(d));
      }
    }
  }

  const auto n_flip = static_cast<std::size_t>(
      static_cast<double>(result.corpus.docs.size()) * spec.noise_rate);
  if (n_flip > 0) {
    std::vector<int> order(result.corpus.docs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    Rng rng(derive_seed(spec.seed, "flip"));
    rng.shuffle(order);
    for (std::size_t i = 0; i < n_flip; ++i) {
      auto& d = result.corpus.docs[static_cast<std::size_t>(order[i])];
      const int old_label = *d.label(spec.task);
      int flipped = static_cast<int>(rng.below(static_cast<std::uint64_t>(k - 1)));
      if (flipped >= old_label) ++flipped;
      d.set_label(spec.task, flipped);
      result.flipped_ids.insert(d.id);
    }
  }
  return result;
}

}  // namespace esgcls
