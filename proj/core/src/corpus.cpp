#include "tdlm/corpus.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <map>
#include <set>

#include "tdlm/io.hpp"
#include "tdlm/random.hpp"

TDLM_NAMESPACE_BEGIN

namespace {

std::string_view trim(std::string_view s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

class ByteWriter {
 public:
  void u32(std::uint32_t v) {
    static_assert(std::endian::native == std::endian::little, "little-endian host required");
    char b[4];
    std::memcpy(b, &v, 4);
    out_.append(b, 4);
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void bytes(std::string_view s) { out_.append(s); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view in) : in_(in) {}
  std::uint32_t u32() {
    if (pos_ + 4 > in_.size()) throw DataError("binary corpus is truncated");
    std::uint32_t v;
    std::memcpy(&v, in_.data() + pos_, 4);
    pos_ += 4;
    return v;
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  std::string_view bytes(std::size_t n) {
    if (pos_ + n > in_.size()) throw DataError("binary corpus is truncated");
    auto s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  std::string_view in_;
  std::size_t pos_ = 0;
};

constexpr std::string_view kCorpusMagic = "TDLMCORPUS1\n";

}  // namespace

std::vector<RawDocument> parse_corpus(std::string_view text, const TokenizerOptions& options) {
  std::vector<RawDocument> docs;
  std::optional<RawDocument> current;
  bool in_header = false;
  std::size_t line_no = 0;
  auto finish = [&] {
    if (!current) return;
    if (current->sentences.empty()) {
      throw DataError("line " + std::to_string(current->first_line) + ": document has no sentences");
    }
    docs.push_back(std::move(*current));
    current.reset();
  };

  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const auto raw_line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    const auto line = trim(raw_line);
    if (line.empty()) {
      finish();
      if (end == text.size()) break;
      continue;
    }
    if (!current) {
      current.emplace();
      current->first_line = line_no;
      in_header = true;
    }
    if (in_header && line[0] == '#') {
      if (starts_with(line, "#label=")) {
        auto value = trim(line.substr(7));
        if (value.empty() || current->label) {
          throw DataError("line " + std::to_string(line_no) + ": malformed document header '" + std::string(line) +
                          "'");
        }
        current->label = std::string(value);
      } else if (starts_with(line, "#tags=")) {
        auto value = line.substr(6);
        if (!current->tags.empty()) {
          throw DataError("line " + std::to_string(line_no) + ": duplicate #tags header");
        }
        std::size_t start = 0;
        while (start <= value.size()) {
          auto comma = value.find(',', start);
          if (comma == std::string_view::npos) comma = value.size();
          auto name = trim(value.substr(start, comma - start));
          if (name.empty()) {
            throw DataError("line " + std::to_string(line_no) + ": malformed document header '" + std::string(line) +
                            "'");
          }
          current->tags.emplace_back(name);
          start = comma + 1;
        }
      } else {
        throw DataError("line " + std::to_string(line_no) + ": malformed document header '" + std::string(line) + "'");
      }
      continue;
    }
    in_header = false;
    for (auto& sentence : tokenize(line, options)) current->sentences.push_back(std::move(sentence));
    if (end == text.size()) break;
  }
  finish();
  return docs;
}

std::vector<RawDocument> read_corpus(const std::filesystem::path& path, const TokenizerOptions& options) {
  return parse_corpus(read_file(path), options);
}

WordCounts count_words(std::span<const RawDocument> docs) {
  WordCounts counts;
  for (const auto& doc : docs)
    for (const auto& sentence : doc.sentences)
      for (const auto& w : sentence) ++counts[w];
  return counts;
}

std::size_t Document::token_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.size();
  return n;
}

Document make_document(std::vector<std::vector<TokenId>> sentences, TokenId label, std::vector<TokenId> tags,
                       const Vocabulary& vocab) {
  Document doc;
  doc.sentences = std::move(sentences);
  doc.label = label;
  doc.tags = std::move(tags);
  std::vector<std::vector<TokenId>> per_sentence(doc.sentences.size());
  for (std::size_t j = 0; j < doc.sentences.size(); ++j) {
    for (auto id : doc.sentences[j]) {
      if (id < 0 || static_cast<std::size_t>(id) >= vocab.size()) {
        throw DataError("word id " + std::to_string(id) + " outside vocabulary");
      }
      if (vocab.is_content(id)) per_sentence[j].push_back(id);
    }
    doc.content.insert(doc.content.end(), per_sentence[j].begin(), per_sentence[j].end());
  }
  doc.bow_context.resize(doc.sentences.size());
  for (std::size_t j = 0; j < doc.sentences.size(); ++j) {
    auto& ctx = doc.bow_context[j];
    ctx.reserve(doc.content.size() - per_sentence[j].size());
    for (std::size_t other = 0; other < doc.sentences.size(); ++other) {
      if (other == j) continue;
      ctx.insert(ctx.end(), per_sentence[other].begin(), per_sentence[other].end());
    }
  }
  return doc;
}

std::size_t Corpus::token_count() const {
  std::size_t n = 0;
  for (const auto& d : documents) n += d.token_count();
  return n;
}

NameIndex build_label_index(std::span<const RawDocument> docs) {
  std::set<std::string> names;
  for (const auto& d : docs)
    if (d.label) names.insert(*d.label);
  return NameIndex(std::vector<std::string>(names.begin(), names.end()));
}

NameIndex build_tag_index(std::span<const RawDocument> docs) {
  std::map<std::string, std::uint64_t> counts;
  for (const auto& d : docs) {
    std::set<std::string> unique(d.tags.begin(), d.tags.end());
    for (const auto& t : unique) ++counts[t];
  }
  std::vector<std::pair<std::string, std::uint64_t>> order(counts.begin(), counts.end());
  std::stable_sort(order.begin(), order.end(), [](const auto& x, const auto& y) { return x.second > y.second; });
  std::vector<std::string> names;
  for (auto& [name, count] : order) names.push_back(name);
  return NameIndex(std::move(names));
}

std::vector<std::uint64_t> tag_frequencies(std::span<const RawDocument> docs, const NameIndex& tags) {
  std::vector<std::uint64_t> counts(tags.size(), 0);
  for (const auto& d : docs) {
    std::set<std::string> unique(d.tags.begin(), d.tags.end());
    for (const auto& t : unique) {
      auto id = tags.find(t);
      if (id >= 0) ++counts[static_cast<std::size_t>(id)];
    }
  }
  return counts;
}

Corpus index_corpus(std::span<const RawDocument> docs, const Vocabulary& vocab, const NameIndex& labels,
                    const NameIndex& tags) {
  Corpus corpus;
  corpus.documents.reserve(docs.size());
  for (const auto& raw : docs) {
    std::vector<std::vector<TokenId>> sentences;
    sentences.reserve(raw.sentences.size());
    for (const auto& s : raw.sentences) {
      std::vector<TokenId> ids;
      ids.reserve(s.size());
      for (const auto& w : s) ids.push_back(vocab.id(w));
      sentences.push_back(std::move(ids));
    }
    TokenId label = -1;
    if (raw.label) {
      label = labels.find(*raw.label);
      if (label < 0) {
        throw DataError("line " + std::to_string(raw.first_line) + ": unknown label '" + *raw.label + "'");
      }
    }
    std::vector<TokenId> tag_ids;
    for (const auto& t : raw.tags) {
      auto id = tags.find(t);
      if (id >= 0 && std::find(tag_ids.begin(), tag_ids.end(), id) == tag_ids.end()) tag_ids.push_back(id);
    }
    corpus.documents.push_back(make_document(std::move(sentences), label, std::move(tag_ids), vocab));
  }
  return corpus;
}

std::string encode_corpus(const Corpus& corpus) {
  ByteWriter w;
  w.bytes(kCorpusMagic);
  w.u32(static_cast<std::uint32_t>(corpus.documents.size()));
  for (const auto& doc : corpus.documents) {
    w.i32(doc.label);
    w.u32(static_cast<std::uint32_t>(doc.tags.size()));
    for (auto t : doc.tags) w.i32(t);
    w.u32(static_cast<std::uint32_t>(doc.sentences.size()));
    for (const auto& s : doc.sentences) {
      w.u32(static_cast<std::uint32_t>(s.size()));
      for (auto id : s) w.i32(id);
    }
  }
  return w.take();
}

Corpus decode_corpus(std::string_view bytes, const Vocabulary& vocab) {
  ByteReader r(bytes);
  if (r.bytes(kCorpusMagic.size()) != kCorpusMagic) throw DataError("not a binary corpus (bad magic)");
  Corpus corpus;
  const auto ndocs = r.u32();
  corpus.documents.reserve(ndocs);
  for (std::uint32_t d = 0; d < ndocs; ++d) {
    const auto label = r.i32();
    std::vector<TokenId> tags(r.u32());
    for (auto& t : tags) t = r.i32();
    std::vector<std::vector<TokenId>> sentences(r.u32());
    for (auto& s : sentences) {
      s.resize(r.u32());
      for (auto& id : s) id = r.i32();
    }
    corpus.documents.push_back(make_document(std::move(sentences), label, std::move(tags), vocab));
  }
  if (!r.done()) throw DataError("trailing bytes after binary corpus");
  return corpus;
}

RawSplits split_documents(std::vector<RawDocument> docs, const SplitOptions& options) {
  if (options.dev_fraction < 0.0 || options.test_fraction < 0.0 ||
      options.dev_fraction + options.test_fraction >= 1.0) {
    throw ConfigError("dev and test fractions must be non-negative and sum to less than 1");
  }
  Rng rng = Rng::derive(options.seed, "split");
  rng.shuffle(docs.begin(), docs.end());
  const auto n = static_cast<double>(docs.size());
  const auto n_dev = static_cast<std::size_t>(std::llround(options.dev_fraction * n));
  const auto n_test = static_cast<std::size_t>(std::llround(options.test_fraction * n));
  RawSplits out;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    auto& target = i < n_dev ? out.dev : i < n_dev + n_test ? out.test : out.train;
    target.push_back(std::move(docs[i]));
  }
  return out;
}

Dataset build_dataset(const RawSplits& raw, const VocabOptions& vocab_options, const StopwordSet& stopwords) {
  if (raw.train.empty()) throw DataError("the training split has no documents");
  std::vector<RawDocument> all;
  all.reserve(raw.train.size() + raw.dev.size() + raw.test.size());
  for (const auto* split : {&raw.train, &raw.dev, &raw.test}) all.insert(all.end(), split->begin(), split->end());
  Dataset ds;
  ds.vocab = Vocabulary::build(count_words(raw.train), vocab_options, stopwords);
  ds.labels = build_label_index(all);
  ds.tags = build_tag_index(all);
  ds.tag_counts = tag_frequencies(all, ds.tags);
  ds.train = index_corpus(raw.train, ds.vocab, ds.labels, ds.tags);
  ds.dev = index_corpus(raw.dev, ds.vocab, ds.labels, ds.tags);
  ds.test = index_corpus(raw.test, ds.vocab, ds.labels, ds.tags);
  return ds;
}

const Corpus& Dataset::split(std::string_view name) const {
  if (name == "train") return train;
  if (name == "dev") return dev;
  if (name == "test") return test;
  throw ConfigError("unknown split '" + std::string(name) + "' (expected train, dev or test)");
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "vocab.tsv", dataset.vocab.to_tsv());
  std::string labels;
  for (const auto& n : dataset.labels.names()) labels += n + "\n";
  write_file_atomic(dir / "labels.txt", labels);
  std::string tags;
  for (std::size_t i = 0; i < dataset.tags.size(); ++i) {
    tags += dataset.tags.name(static_cast<TokenId>(i)) + "\t" +
            std::to_string(i < dataset.tag_counts.size() ? dataset.tag_counts[i] : 0) + "\n";
  }
  write_file_atomic(dir / "tags.tsv", tags);
  write_file_atomic(dir / "train.bin", encode_corpus(dataset.train));
  write_file_atomic(dir / "dev.bin", encode_corpus(dataset.dev));
  write_file_atomic(dir / "test.bin", encode_corpus(dataset.test));
}

Dataset load_dataset(const std::filesystem::path& dir) {
  Dataset ds;
  ds.vocab = Vocabulary::from_tsv(read_file(dir / "vocab.tsv"));
  {
    std::vector<std::string> names;
    const auto text = read_file(dir / "labels.txt");
    std::size_t pos = 0;
    while (pos < text.size()) {
      auto end = text.find('\n', pos);
      if (end == std::string::npos) end = text.size();
      if (end > pos) names.push_back(text.substr(pos, end - pos));
      pos = end + 1;
    }
    ds.labels = NameIndex(std::move(names));
  }
  {
    std::vector<std::string> names;
    const auto text = read_file(dir / "tags.tsv");
    std::size_t pos = 0;
    while (pos < text.size()) {
      auto end = text.find('\n', pos);
      if (end == std::string::npos) end = text.size();
      auto line = std::string_view(text).substr(pos, end - pos);
      pos = end + 1;
      if (line.empty()) continue;
      auto tab = line.find('\t');
      if (tab == std::string_view::npos) throw DataError("tags.tsv: expected name<TAB>count");
      names.emplace_back(line.substr(0, tab));
      ds.tag_counts.push_back(std::stoull(std::string(line.substr(tab + 1))));
    }
    ds.tags = NameIndex(std::move(names));
  }
  ds.train = decode_corpus(read_file(dir / "train.bin"), ds.vocab);
  ds.dev = decode_corpus(read_file(dir / "dev.bin"), ds.vocab);
  ds.test = decode_corpus(read_file(dir / "test.bin"), ds.vocab);
  return ds;
}

TDLM_NAMESPACE_END
