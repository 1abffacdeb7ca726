#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include <esgcls/corpus.hpp>
#include <esgcls/errors.hpp>
#include <esgcls/unicode.hpp>

namespace esgcls {

using TokenSequence = std::vector<int>;

/// Byte-pair subword model shared across all corpus languages.
///
/// Base symbols are a reserved <unk> slot, the 256 raw byte values, and a
/// word-initial marker, so any text segments without failure: characters never
/// seen in training fall back to their bytes. Words are marked SentencePiece
/// style (marker prepended), and learned merges fuse adjacent symbols.
class SubwordModel {
 public:
  static constexpr int kUnkId = 0;
  static constexpr int kMarkerId = 257;
  static constexpr int kNumBaseSymbols = 258;
  static constexpr const char* kMarker = "\xE2\x96\x81";  // U+2581

  SubwordModel() { reset_base(); }

  int vocab_size() const { return static_cast<int>(vocab_.size()); }
  const std::vector<std::string>& vocab() const { return vocab_; }
  const std::vector<std::pair<int, int>>& merges() const { return merges_; }
  const std::string& surface(int id) const { return vocab_[static_cast<std::size_t>(id)]; }

  void add_merge(int left, int right) {
    const int id = static_cast<int>(vocab_.size());
    vocab_.push_back(vocab_[static_cast<std::size_t>(left)] +
                     vocab_[static_cast<std::size_t>(right)]);
    merges_.push_back({left, right});
    rank_.emplace(pair_key(left, right),
                  std::pair<int, int>{static_cast<int>(merges_.size()) - 1, id});
  }

  /// (rank, merged id) for a symbol pair, or nullopt when the pair was never
  /// learned.
  const std::pair<int, int>* merge_of(int left, int right) const {
    auto it = rank_.find(pair_key(left, right));
    return it == rank_.end() ? nullptr : &it->second;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["type"] = "bpe";
    j["vocab_size"] = vocab_size();
    auto merges = nlohmann::json::array();
    for (const auto& [l, r] : merges_) merges.push_back({l, r});
    j["merges"] = merges;
    auto vocab = nlohmann::json::array();
    for (const auto& s : vocab_) vocab.push_back(hex_encode(s));
    j["vocab"] = vocab;
    return j;
  }

  static SubwordModel from_json(const nlohmann::json& j) {
    SubwordModel m;
    for (const auto& entry : j.at("merges")) {
      const int l = entry.at(0).get<int>();
      const int r = entry.at(1).get<int>();
      if (l < 0 || r < 0 || l >= m.vocab_size() || r >= m.vocab_size())
        throw DataError("subword model: merge references unknown symbol");
      m.add_merge(l, r);
    }
    if (j.contains("vocab")) {
      const auto& stored = j["vocab"];
      if (stored.size() != static_cast<std::size_t>(m.vocab_size()))
        throw DataError("subword model: vocab list does not match merges");
      for (int i = 0; i < m.vocab_size(); ++i) {
        if (hex_decode(stored[static_cast<std::size_t>(i)].get<std::string>()) != m.surface(i))
          throw DataError("subword model: vocab entry " + std::to_string(i) +
                          " does not match merges");
      }
    }
    return m;
  }

  static std::string hex_encode(std::string_view raw) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(raw.size() * 2);
    for (unsigned char c : raw) {
      out.push_back(digits[c >> 4]);
      out.push_back(digits[c & 0xF]);
    }
    return out;
  }

  static std::string hex_decode(std::string_view hex) {
    if (hex.size() % 2 != 0) throw DataError("subword model: odd hex string");
    auto nibble = [](char c) -> int {
      if (c >= '0' && c <= '9') return c - '0';
      if (c >= 'a' && c <= 'f') return c - 'a' + 10;
      if (c >= 'A' && c <= 'F') return c - 'A' + 10;
      throw DataError("subword model: invalid hex digit");
    };
    std::string out;
    out.reserve(hex.size() / 2);
    for (std::size_t i = 0; i < hex.size(); i += 2)
      out.push_back(static_cast<char>((nibble(hex[i]) << 4) | nibble(hex[i + 1])));
    return out;
  }

 private:
  void reset_base() {
    vocab_.clear();
    merges_.clear();
    rank_.clear();
    vocab_.reserve(kNumBaseSymbols);
    vocab_.push_back("<unk>");
    for (int b = 0; b < 256; ++b) vocab_.push_back(std::string(1, static_cast<char>(b)));
    vocab_.push_back(kMarker);
  }

  static std::uint64_t pair_key(int l, int r) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(l)) << 32) |
           static_cast<std::uint32_t>(r);
  }

  std::vector<std::string> vocab_;
  std::vector<std::pair<int, int>> merges_;
  std::unordered_map<std::uint64_t, std::pair<int, int>> rank_;  // pair -> (rank, id)
};

namespace detail {

inline std::vector<int> word_to_base_symbols(std::string_view word) {
  std::vector<int> syms;
  syms.reserve(word.size() + 1);
  syms.push_back(SubwordModel::kMarkerId);
  for (unsigned char b : word) syms.push_back(1 + static_cast<int>(b));
  return syms;
}

inline void encode_word(const SubwordModel& model, std::vector<int>& syms) {
  // Repeatedly apply the occurring merge with the lowest rank. Newly created
  // symbols can only enable merges of higher rank, so this reproduces the
  // training-time rewrite order.
  while (syms.size() > 1) {
    int best_rank = -1;
    for (std::size_t i = 0; i + 1 < syms.size(); ++i) {
      const auto* m = model.merge_of(syms[i], syms[i + 1]);
      if (m && (best_rank < 0 || m->first < best_rank)) best_rank = m->first;
    }
    if (best_rank < 0) break;
    const auto [left, right] = model.merges()[static_cast<std::size_t>(best_rank)];
    const int merged = SubwordModel::kNumBaseSymbols + best_rank;
    std::vector<int> next;
    next.reserve(syms.size());
    std::size_t i = 0;
    while (i < syms.size()) {
      if (i + 1 < syms.size() && syms[i] == left && syms[i + 1] == right) {
        next.push_back(merged);
        i += 2;
      } else {
        next.push_back(syms[i]);
        ++i;
      }
    }
    syms.swap(next);
  }
}

}  // namespace detail

/// Segments text into subword token ids: lowercase, split on whitespace, then
/// apply learned merges per word. Total for any input.
inline TokenSequence tokenize(const SubwordModel& model, std::string_view text) {
  TokenSequence out;
  const std::string folded = fold_case(text);
  for (const auto& word : split_words(folded)) {
    auto syms = detail::word_to_base_symbols(word);
    detail::encode_word(model, syms);
    out.insert(out.end(), syms.begin(), syms.end());
  }
  return out;
}

/// Batch tokenization with a per-call word cache; useful when featurizing a
/// corpus where the same words recur across documents.
inline std::vector<TokenSequence> tokenize_all(const SubwordModel& model,
                                               const std::vector<std::string>& texts) {
  std::unordered_map<std::string, std::vector<int>> cache;
  std::vector<TokenSequence> out;
  out.reserve(texts.size());
  for (const auto& text : texts) {
    TokenSequence seq;
    const std::string folded = fold_case(text);
    for (auto& word : split_words(folded)) {
      auto it = cache.find(word);
      if (it == cache.end()) {
        auto syms = detail::word_to_base_symbols(word);
        detail::encode_word(model, syms);
        it = cache.emplace(std::move(word), std::move(syms)).first;
      }
      seq.insert(seq.end(), it->second.begin(), it->second.end());
    }
    out.push_back(std::move(seq));
  }
  return out;
}

/// Concatenates token surfaces and turns word markers back into spaces.
inline std::string decode(const SubwordModel& model, const TokenSequence& tokens) {
  std::string raw;
  for (int id : tokens) raw += model.surface(id);
  std::string out;
  std::size_t pos = 0;
  const std::string marker = SubwordModel::kMarker;
  while (pos < raw.size()) {
    if (raw.compare(pos, marker.size(), marker) == 0) {
      out.push_back(' ');
      pos += marker.size();
    } else {
      out.push_back(raw[pos]);
      ++pos;
    }
  }
  if (!out.empty() && out.front() == ' ') out.erase(out.begin());
  return out;
}

/// Trains byte-pair merges until the vocabulary reaches vocab_size or no
/// adjacent pair remains. Ties on pair frequency break lexicographically on
/// the pair surfaces, so training is order-independent and deterministic.
inline SubwordModel train_subwords(const std::vector<std::string>& texts, int vocab_size) {
  if (texts.empty()) throw DataError("subword training requires a non-empty corpus");
  if (vocab_size < SubwordModel::kNumBaseSymbols)
    throw DataError("vocab_size " + std::to_string(vocab_size) + " is below the " +
                    std::to_string(SubwordModel::kNumBaseSymbols) + " base symbols");

  std::map<std::string, long long> word_counts;
  for (const auto& text : texts) {
    const std::string folded = fold_case(text);
    for (auto& w : split_words(folded)) word_counts[std::move(w)] += 1;
  }

  struct Word {
    std::vector<int> syms;
    long long count = 0;
  };
  std::vector<Word> words;
  words.reserve(word_counts.size());
  for (const auto& [w, n] : word_counts)
    words.push_back({detail::word_to_base_symbols(w), n});

  struct PairStat {
    long long count = 0;
    std::set<int> words;
  };
  std::map<std::pair<int, int>, PairStat> stats;

  auto add_word = [&](int widx, int sign) {
    const auto& w = words[static_cast<std::size_t>(widx)];
    for (std::size_t i = 0; i + 1 < w.syms.size(); ++i) {
      const std::pair<int, int> p{w.syms[i], w.syms[i + 1]};
      auto& s = stats[p];
      s.count += sign * w.count;
      if (sign > 0)
        s.words.insert(widx);
      else
        s.words.erase(widx);
      if (s.count <= 0) stats.erase(p);
    }
  };
  for (int i = 0; i < static_cast<int>(words.size()); ++i) add_word(i, +1);

  SubwordModel model;
  while (model.vocab_size() < vocab_size && !stats.empty()) {
    auto best = stats.begin();
    for (auto it = std::next(stats.begin()); it != stats.end(); ++it) {
      if (it->second.count != best->second.count) {
        if (it->second.count > best->second.count) best = it;
        continue;
      }
      const auto& bs = best->first;
      const auto& cs = it->first;
      const auto bsur = std::make_pair(model.surface(bs.first), model.surface(bs.second));
      const auto csur = std::make_pair(model.surface(cs.first), model.surface(cs.second));
      if (csur < bsur || (csur == bsur && cs < bs)) best = it;
    }

    const auto [left, right] = best->first;
    const int merged = model.vocab_size();
    model.add_merge(left, right);

    const std::set<int> affected = best->second.words;
    for (int widx : affected) {
      add_word(widx, -1);
      auto& syms = words[static_cast<std::size_t>(widx)].syms;
      std::vector<int> next;
      next.reserve(syms.size());
      std::size_t i = 0;
      while (i < syms.size()) {
        if (i + 1 < syms.size() && syms[i] == left && syms[i + 1] == right) {
          next.push_back(merged);
          i += 2;
        } else {
          next.push_back(syms[i]);
          ++i;
        }
      }
      syms.swap(next);
      add_word(widx, +1);
    }
  }
  return model;
}

/// Corpus convenience overload; training itself is deterministic, the seed is
/// accepted for interface uniformity.
inline SubwordModel train_subwords(const Corpus& corpus, int vocab_size,
                                   std::uint64_t seed = 0) {
  (void)seed;
  if (corpus.docs.empty()) throw DataError("subword training requires a non-empty corpus");
  std::vector<std::string> texts;
  texts.reserve(corpus.docs.size());
  for (const auto& d : corpus.docs) texts.push_back(d.text());
  return train_subwords(texts, vocab_size);
}

}  // namespace esgcls
