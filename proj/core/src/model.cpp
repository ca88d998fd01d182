#include "tdlm/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "tdlm/batching.hpp"

TDLM_NAMESPACE_BEGIN

namespace {

Tensor uniform_init(Shape shape, double bound, std::uint64_t seed, const std::string& name) {
  Rng rng = Rng::derive(seed, "init/" + name);
  Tensor t = Tensor::zeros(std::move(shape), true);
  for (auto& v : t.data()) v = static_cast<Real>(rng.uniform(-bound, bound));
  return t;
}

Tensor glorot(std::size_t fan_in, std::size_t fan_out, std::uint64_t seed, const std::string& name) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  return uniform_init({fan_in, fan_out}, bound, seed, name);
}

Tensor bias(std::size_t n) { return Tensor::zeros({n}, true); }

Tensor embedding_table(std::size_t vocab, std::size_t dim, std::uint64_t seed, const std::string& name) {
  Tensor t = glorot(vocab, dim, seed, name);
  for (std::size_t j = 0; j < dim; ++j) t[static_cast<std::size_t>(Vocabulary::kPad) * dim + j] = Real(0);
  return t;
}

using Slot = std::pair<std::string, Tensor*>;

void add_topic_encoder(std::vector<Slot>& out, TopicParams& t) {
  out.emplace_back("tm.embeddings", &t.embeddings);
  out.emplace_back("tm.conv.filters", &t.conv_filters);
  out.emplace_back("tm.conv.bias", &t.conv_bias);
  out.emplace_back("tm.topic_in", &t.topic_in);
  out.emplace_back("tm.topic_out", &t.topic_out);
  if (t.has_tags()) out.emplace_back("tm.tag_embeddings", &t.tag_embeddings);
}

void add_topic_output(std::vector<Slot>& out, TopicParams& t) {
  out.emplace_back("tm.out.weight", &t.out_weight);
  out.emplace_back("tm.out.bias", &t.out_bias);
}

void add_language_model(std::vector<Slot>& out, LmParams& lm) {
  out.emplace_back("lm.embeddings", &lm.embeddings);
  for (std::size_t l = 0; l < lm.layers.size(); ++l) {
    auto& layer = lm.layers[l];
    const std::string p = "lm.layer" + std::to_string(l) + ".";
    out.emplace_back(p + "w_input", &layer.w_input);
    out.emplace_back(p + "w_forget", &layer.w_forget);
    out.emplace_back(p + "w_output", &layer.w_output);
    out.emplace_back(p + "w_cell", &layer.w_cell);
    out.emplace_back(p + "u_input", &layer.u_input);
    out.emplace_back(p + "u_forget", &layer.u_forget);
    out.emplace_back(p + "u_output", &layer.u_output);
    out.emplace_back(p + "u_cell", &layer.u_cell);
    out.emplace_back(p + "b_input", &layer.b_input);
    out.emplace_back(p + "b_forget", &layer.b_forget);
    out.emplace_back(p + "b_output", &layer.b_output);
    out.emplace_back(p + "b_cell", &layer.b_cell);
  }
  if (lm.has_gate()) {
    auto& g = lm.gate;
    out.emplace_back("lm.gate.w_update", &g.w_update);
    out.emplace_back("lm.gate.w_reset", &g.w_reset);
    out.emplace_back("lm.gate.w_candidate", &g.w_candidate);
    out.emplace_back("lm.gate.u_update", &g.u_update);
    out.emplace_back("lm.gate.u_reset", &g.u_reset);
    out.emplace_back("lm.gate.u_candidate", &g.u_candidate);
    out.emplace_back("lm.gate.b_update", &g.b_update);
    out.emplace_back("lm.gate.b_reset", &g.b_reset);
    out.emplace_back("lm.gate.b_candidate", &g.b_candidate);
  }
  out.emplace_back("lm.out.weight", &lm.out_weight);
  out.emplace_back("lm.out.bias", &lm.out_bias);
}

void add_head(std::vector<Slot>& out, ClassifierHead& head) {
  out.emplace_back("cls.weight", &head.weight);
  out.emplace_back("cls.bias", &head.bias);
}

std::vector<NamedParam> to_named(const std::vector<Slot>& slots) {
  std::vector<NamedParam> out;
  out.reserve(slots.size());
  for (const auto& [name, tensor] : slots) out.push_back({name, *tensor});
  return out;
}

}  // namespace

TdlmModel TdlmModel::create(const TrainConfig& config, Vocabulary vocab, NameIndex labels, NameIndex tags,
                            std::vector<std::uint64_t> tag_counts) {
  config.validate();
  TdlmModel m;
  m.config_ = config;
  m.vocab_ = std::move(vocab);
  m.labels_ = std::move(labels);
  m.tags_ = std::move(tags);
  m.tag_counts_ = std::move(tag_counts);
  if (m.tag_counts_.empty()) m.tag_counts_.assign(m.tags_.size(), 0);
  if (m.tag_counts_.size() != m.tags_.size()) throw DimensionError("one frequency per tag expected");

  const std::size_t V = m.vocab_.size();
  const std::size_t e = config.e, H = config.n_hidden, a = config.a, b = config.b, k = config.k;
  const std::uint64_t seed = config.seed;

  if (!config.vanilla) {
    auto& t = m.topic_;
    t.embeddings = embedding_table(V, e, seed, "tm.embeddings");
    t.conv_filters = glorot(a, e * config.h, seed, "tm.conv.filters");
    t.conv_bias = bias(a);
    t.topic_in = uniform_init({k, a}, config.topic_init, seed, "tm.topic_in");
    if (config.tags) {
      if (m.tags_.size() == 0) throw ConfigError("tags=true but the corpus has no tags");
      t.tag_embeddings = Tensor::zeros({m.tags_.size(), config.f}, true);
      // The first a columns match the untagged model's table.
      const Tensor extra = uniform_init({k, config.f}, config.topic_init, seed, "tm.topic_in/tags");
      Tensor joined = Tensor::zeros({k, a + config.f}, true);
      for (std::size_t r = 0; r < k; ++r) {
        for (std::size_t c = 0; c < a; ++c) joined[r * (a + config.f) + c] = t.topic_in.at(r, c);
        for (std::size_t c = 0; c < config.f; ++c) joined[r * (a + config.f) + a + c] = extra.at(r, c);
      }
      t.topic_in = joined;
    }
    t.topic_out = uniform_init({k, b}, config.topic_out_init, seed, "tm.topic_out");
    t.out_weight = glorot(b, V, seed, "tm.out.weight");
    t.out_bias = bias(V);
  }

  auto& lm = m.lm_;
  lm.embeddings = embedding_table(V, e, seed, "lm.embeddings");
  for (std::size_t l = 0; l < config.n_layer; ++l) {
    const std::size_t in = l == 0 ? e : H;
    const std::string p = "lm.layer" + std::to_string(l) + ".";
    LstmLayerParams layer;
    layer.w_input = glorot(in, H, seed, p + "w_input");
    layer.w_forget = glorot(in, H, seed, p + "w_forget");
    layer.w_output = glorot(in, H, seed, p + "w_output");
    layer.w_cell = glorot(in, H, seed, p + "w_cell");
    layer.u_input = glorot(H, H, seed, p + "u_input");
    layer.u_forget = glorot(H, H, seed, p + "u_forget");
    layer.u_output = glorot(H, H, seed, p + "u_output");
    layer.u_cell = glorot(H, H, seed, p + "u_cell");
    layer.b_input = bias(H);
    layer.b_forget = bias(H);
    layer.b_output = bias(H);
    layer.b_cell = bias(H);
    lm.layers.push_back(std::move(layer));
  }
  if (!config.vanilla) {
    auto& g = lm.gate;
    g.w_update = glorot(b, H, seed, "lm.gate.w_update");
    g.w_reset = glorot(b, H, seed, "lm.gate.w_reset");
    g.w_candidate = glorot(b, H, seed, "lm.gate.w_candidate");
    g.u_update = glorot(H, H, seed, "lm.gate.u_update");
    g.u_reset = glorot(H, H, seed, "lm.gate.u_reset");
    g.u_candidate = glorot(H, H, seed, "lm.gate.u_candidate");
    g.b_update = bias(H);
    g.b_reset = bias(H);
    g.b_candidate = bias(H);
  }
  lm.out_weight = glorot(H, V, seed, "lm.out.weight");
  lm.out_bias = bias(V);

  if (config.supervised) {
    if (m.labels_.size() == 0) throw ConfigError("supervised=true but the corpus has no labels");
    const std::size_t in = m.topic_.topic_in.cols() + b;
    m.head_.weight = glorot(in, m.labels_.size(), seed, "cls.weight");
    m.head_.bias = bias(m.labels_.size());
  }
  return m;
}

TdlmModel TdlmModel::create(const TrainConfig& config, const Dataset& dataset) {
  return create(config, dataset.vocab, dataset.labels, dataset.tags, dataset.tag_counts);
}

TdlmModel TdlmModel::clone() const {
  TdlmModel copy = *this;
  std::vector<Slot> slots;
  if (!copy.vanilla()) {
    add_topic_encoder(slots, copy.topic_);
    add_topic_output(slots, copy.topic_);
  }
  add_language_model(slots, copy.lm_);
  if (copy.supervised()) add_head(slots, copy.head_);
  for (auto& [name, tensor] : slots) {
    const bool grad = tensor->requires_grad();
    *tensor = tensor->clone();
    tensor->set_requires_grad(grad);
  }
  return copy;
}

TopicOptions TdlmModel::topic_options() const { return {config_.m3, config_.p1}; }

LmOptions TdlmModel::lm_options() const { return {config_.p2, topic_options()}; }

std::vector<NamedParam> TdlmModel::parameters() const {
  auto& self = const_cast<TdlmModel&>(*this);
  std::vector<Slot> slots;
  if (!vanilla()) {
    add_topic_encoder(slots, self.topic_);
    add_topic_output(slots, self.topic_);
  }
  add_language_model(slots, self.lm_);
  if (supervised()) add_head(slots, self.head_);
  return to_named(slots);
}

std::vector<NamedParam> TdlmModel::tm_parameters() const {
  if (vanilla()) return {};
  auto& self = const_cast<TdlmModel&>(*this);
  std::vector<Slot> slots;
  add_topic_encoder(slots, self.topic_);
  add_topic_output(slots, self.topic_);
  return to_named(slots);
}

std::vector<NamedParam> TdlmModel::lm_parameters() const {
  auto& self = const_cast<TdlmModel&>(*this);
  std::vector<Slot> slots;
  if (!vanilla()) add_topic_encoder(slots, self.topic_);
  add_language_model(slots, self.lm_);
  return to_named(slots);
}

std::vector<NamedParam> TdlmModel::cls_parameters() const {
  if (!supervised()) return {};
  auto& self = const_cast<TdlmModel&>(*this);
  std::vector<Slot> slots;
  add_topic_encoder(slots, self.topic_);
  add_head(slots, self.head_);
  return to_named(slots);
}

std::size_t TdlmModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : parameters()) n += p.tensor.size();
  return n;
}

void TdlmModel::assign(const std::string& name, const Shape& shape, std::span<const Real> values) {
  for (auto& p : parameters()) {
    if (p.name != name) continue;
    if (p.tensor.shape() != shape || values.size() != p.tensor.size()) {
      throw DimensionError("parameter " + name + ": expected " + shape_string(p.tensor.shape()) + ", got " +
                           shape_string(shape));
    }
    std::copy(values.begin(), values.end(), p.tensor.data().begin());
    return;
  }
  throw DataError("unknown parameter " + name);
}

Tensor TdlmModel::tm_loss(const TmBatch& batch, bool training, Rng& rng) const {
  if (vanilla()) throw ConfigError("the vanilla model has no topic component");
  return tdlm::tm_loss(topic_, batch, topic_options(), training, rng);
}

LmLoss TdlmModel::lm_loss(const LmBatch& batch, bool training, Rng& rng) const {
  return tdlm::lm_loss(lm_, vanilla() ? nullptr : &topic_, batch, lm_options(), training, rng);
}

Tensor TdlmModel::cls_loss(const ClassBatch& batch, bool training, Rng& rng) const {
  return classification_loss(topic_, head_, batch, topic_options(), training, rng);
}

Perplexity TdlmModel::perplexity(const Corpus& corpus) const {
  Perplexity out;
  Rng unused(0);
  for (const auto& batch : make_lm_batches(corpus, config_.n_batch, config_.m2, config_.m3, nullptr)) {
    auto loss = lm_loss(batch, false, unused);
    out.total_loss += static_cast<double>(loss.total.item());
    out.tokens += loss.tokens;
  }
  if (out.tokens == 0) throw DataError("perplexity of a split with no tokens");
  out.value = std::exp(out.total_loss / static_cast<double>(out.tokens));
  return out;
}

double TdlmModel::accuracy(const Corpus& corpus) const {
  std::size_t correct = 0, total = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& doc = corpus.documents[i];
    if (doc.label < 0) throw DataError("document " + std::to_string(i) + " has no label");
    auto probs = classify(topic_, head_, doc.content, doc.tags, topic_options());
    auto best = static_cast<TokenId>(std::max_element(probs.begin(), probs.end()) - probs.begin());
    correct += best == doc.label ? 1 : 0;
    ++total;
  }
  if (total == 0) throw DataError("accuracy of an empty split");
  return static_cast<double>(correct) / static_cast<double>(total);
}

std::size_t load_pretrained_embeddings(TdlmModel& model, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::size_t count = 0, dim = 0;
  std::string header;
  std::getline(in, header);
  std::istringstream hs(header);
  if (!(hs >> count >> dim)) throw DataError(path.string() + ": first line must be '<count> <dim>'");
  const std::size_t e = model.config().e;
  if (dim != e) {
    throw DataError(path.string() + ": vectors have " + std::to_string(dim) + " dimensions, the model uses " +
                    std::to_string(e));
  }
  std::vector<Tensor> tables{model.lm().embeddings};
  if (!model.vanilla()) tables.push_back(model.topic().embeddings);
  std::size_t copied = 0;
  std::string line;
  std::size_t line_no = 1;
  std::vector<Real> values(dim);
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word)) continue;
    for (std::size_t j = 0; j < dim; ++j) {
      double v;
      if (!(ls >> v)) throw DataError(path.string() + ": line " + std::to_string(line_no) + " has too few values");
      values[j] = static_cast<Real>(v);
    }
    if (!model.vocab().contains(word)) continue;
    const TokenId token = model.vocab().id(word);
    if (token < Vocabulary::kReserved) continue;
    const auto id = static_cast<std::size_t>(token);
    for (auto& table : tables) std::copy(values.begin(), values.end(), table.data().begin() + id * dim);
    ++copied;
  }
  return copied;
}

TDLM_NAMESPACE_END
