#include "tdlm/vocabulary.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

TDLM_NAMESPACE_BEGIN

namespace {
const char* kReservedWords[] = {"<pad>", "<unk>", "<eos>"};
}

Vocabulary::Vocabulary() {
  for (const char* w : kReservedWords) {
    words_.emplace_back(w);
    frequencies_.push_back(0);
    stopword_.push_back(false);
  }
  reindex();
}

Vocabulary Vocabulary::build(const WordCounts& counts, const VocabOptions& options, const StopwordSet& stopwords) {
  if (counts.empty()) throw DataError("cannot build a vocabulary from an empty corpus");
  if (!(options.top_exclude_fraction >= 0.0 && options.top_exclude_fraction < 1.0)) {
    throw ConfigError("top_exclude_fraction must lie in [0, 1)");
  }
  std::vector<std::pair<std::string, std::uint64_t>> kept;
  for (const auto& [word, count] : counts) {
    if (count >= options.min_count) kept.emplace_back(word, count);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& x, const auto& y) {
    if (x.second != y.second) return x.second > y.second;
    return x.first < y.first;
  });
  const auto excluded =
      static_cast<std::size_t>(std::ceil(options.top_exclude_fraction * static_cast<double>(kept.size())));

  Vocabulary vocab;
  for (std::size_t i = excluded; i < kept.size(); ++i) {
    vocab.words_.push_back(kept[i].first);
    vocab.frequencies_.push_back(kept[i].second);
    vocab.stopword_.push_back(stopwords.count(kept[i].first) != 0);
  }
  vocab.reindex();
  return vocab;
}

Vocabulary Vocabulary::from_entries(std::vector<std::string> words, std::vector<std::uint64_t> frequencies,
                                    std::vector<bool> stopword) {
  if (words.size() != frequencies.size() || words.size() != stopword.size()) {
    throw DataError("vocabulary columns differ in length");
  }
  if (words.size() < static_cast<std::size_t>(kReserved)) throw DataError("vocabulary lacks reserved entries");
  for (int i = 0; i < kReserved; ++i) {
    if (words[static_cast<std::size_t>(i)] != kReservedWords[i]) {
      throw DataError("vocabulary id " + std::to_string(i) + " must be " + kReservedWords[i]);
    }
  }
  Vocabulary vocab;
  vocab.words_ = std::move(words);
  vocab.frequencies_ = std::move(frequencies);
  vocab.stopword_ = std::move(stopword);
  vocab.reindex();
  if (vocab.index_.size() != vocab.words_.size()) throw DataError("vocabulary contains duplicate words");
  return vocab;
}

void Vocabulary::reindex() {
  index_.clear();
  for (std::size_t i = 0; i < words_.size(); ++i) index_.emplace(words_[i], static_cast<TokenId>(i));
}

TokenId Vocabulary::id(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end() || it->second < kReserved) return kUnk;
  return it->second;
}

bool Vocabulary::contains(std::string_view word) const {
  auto it = index_.find(std::string(word));
  return it != index_.end() && it->second >= kReserved;
}

const std::string& Vocabulary::word(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= words_.size()) {
    throw IndexError("word id " + std::to_string(id) + " outside vocabulary of " + std::to_string(words_.size()));
  }
  return words_[static_cast<std::size_t>(id)];
}

std::string Vocabulary::to_tsv() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < words_.size(); ++i) {
    out << i << '\t' << words_[i] << '\t' << frequencies_[i] << '\t' << (stopword_[i] ? 1 : 0) << '\n';
  }
  return out.str();
}

Vocabulary Vocabulary::from_tsv(std::string_view text) {
  std::vector<std::string> words;
  std::vector<std::uint64_t> freqs;
  std::vector<bool> stops;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      auto tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    if (fields.size() != 4) throw DataError("vocabulary line " + std::to_string(line_no) + ": expected 4 fields");
    std::uint64_t id = 0, freq = 0;
    int flag = 0;
    auto parse = [&](std::string_view f, auto& v) {
      auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || p != f.data() + f.size()) {
        throw DataError("vocabulary line " + std::to_string(line_no) + ": bad number '" + std::string(f) + "'");
      }
    };
    parse(fields[0], id);
    parse(fields[2], freq);
    parse(fields[3], flag);
    if (id != words.size()) throw DataError("vocabulary line " + std::to_string(line_no) + ": ids must be dense");
    words.emplace_back(fields[1]);
    freqs.push_back(freq);
    stops.push_back(flag != 0);
  }
  return from_entries(std::move(words), std::move(freqs), std::move(stops));
}

NameIndex::NameIndex(std::vector<std::string> names) : names_(std::move(names)) {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (!index_.emplace(names_[i], static_cast<TokenId>(i)).second) {
      throw DataError("duplicate name '" + names_[i] + "'");
    }
  }
}

TokenId NameIndex::id(std::string_view name) const {
  auto found = find(name);
  if (found < 0) throw DataError("unknown name '" + std::string(name) + "'");
  return found;
}

TokenId NameIndex::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  return it == index_.end() ? -1 : it->second;
}

TDLM_NAMESPACE_END
