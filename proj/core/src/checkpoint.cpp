#include "tdlm/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

#include "json.hpp"
#include "tdlm/io.hpp"

TDLM_NAMESPACE_BEGIN

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint payload assumes a little-endian host");

using nlohmann::json;

constexpr std::string_view kMagic = "TDLM1";

#ifdef TDLM_REAL_DOUBLE
constexpr const char* kDtype = "f64";
#else
constexpr const char* kDtype = "f32";
#endif

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_or(const json& j, double fallback) { return j.is_null() ? fallback : j.get<double>(); }

class Payload {
 public:
  std::size_t append(std::span<const Real> values) {
    const std::size_t offset = bytes_.size();
    const auto* p = reinterpret_cast<const char*>(values.data());
    bytes_.append(p, values.size_bytes());
    return offset;
  }
  const std::string& bytes() const { return bytes_; }

 private:
  std::string bytes_;
};

std::vector<Real> read_values(std::string_view payload, std::size_t offset, std::size_t count,
                              const std::string& what) {
  const std::size_t size = count * sizeof(Real);
  if (offset > payload.size() || payload.size() - offset < size) {
    throw TruncatedCheckpointError("checkpoint truncated: payload for " + what + " is incomplete");
  }
  std::vector<Real> values(count);
  std::memcpy(values.data(), payload.data() + offset, size);
  return values;
}

json encode_history(const std::vector<EpochMetrics>& history) {
  json out = json::array();
  for (const auto& m : history) {
    out.push_back({{"epoch", m.epoch},
                   {"tm_loss", number_or_null(m.tm_loss)},
                   {"lm_loss", number_or_null(m.lm_loss)},
                   {"dev_ppl", number_or_null(m.dev_ppl)},
                   {"dev_acc", m.dev_acc ? number_or_null(*m.dev_acc) : json(nullptr)},
                   {"schedule", m.schedule}});
  }
  return out;
}

std::vector<EpochMetrics> decode_history(const json& j) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<EpochMetrics> out;
  for (const auto& item : j) {
    EpochMetrics m;
    m.epoch = item.at("epoch").get<std::size_t>();
    m.tm_loss = number_or(item.at("tm_loss"), nan);
    m.lm_loss = number_or(item.at("lm_loss"), nan);
    m.dev_ppl = number_or(item.at("dev_ppl"), nan);
    if (!item.at("dev_acc").is_null()) m.dev_acc = item.at("dev_acc").get<double>();
    m.schedule = item.at("schedule").get<std::string>();
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace

std::string encode_checkpoint(const TdlmModel& model, const TrainState& state) {
  Payload payload;
  json header;
  header["format_version"] = kCheckpointVersion;
  header["dtype"] = kDtype;
  header["config"] = model.config().to_text();
  const auto& vocab = model.vocab();
  header["vocab"] = {{"words", vocab.words()},
                     {"frequencies", vocab.frequencies()},
                     {"stopwords", std::vector<bool>(vocab.stopword_flags())}};
  header["labels"] = model.labels().names();
  header["tags"] = model.tags().names();
  header["tag_counts"] = model.tag_counts();

  json tensors = json::array();
  for (const auto& p : model.parameters()) {
    const std::size_t offset = payload.append(p.tensor.data());
    tensors.push_back({{"name", p.name}, {"shape", p.tensor.shape()}, {"offset", offset}});
  }
  header["tensors"] = std::move(tensors);

  const auto& adam = state.adam;
  json moments = json::array();
  for (const auto& [name, m] : adam.moments()) {
    const std::size_t first = payload.append(m.first);
    const std::size_t second = payload.append(m.second);
    moments.push_back(
        {{"name", name}, {"steps", m.steps}, {"size", m.first.size()}, {"first", first}, {"second", second}});
  }
  header["adam"] = {{"steps", adam.step_count()},       {"learning_rate", adam.config().learning_rate},
                    {"beta1", adam.config().beta1},     {"beta2", adam.config().beta2},
                    {"epsilon", adam.config().epsilon}, {"moments", std::move(moments)}};
  header["epoch"] = state.epoch;
  header["rng"] = state.rng.serialize();
  header["best_dev_ppl"] = number_or_null(state.best_dev_ppl);
  header["best_epoch"] = state.best_epoch;
  header["history"] = encode_history(state.history);

  const std::string text = header.dump();
  std::string out(kMagic);
  const auto length = static_cast<std::uint64_t>(text.size());
  out.append(reinterpret_cast<const char*>(&length), sizeof length);
  out += text;
  out += payload.bytes();
  return out;
}

Checkpoint decode_checkpoint(std::string_view bytes) {
  if (bytes.size() < kMagic.size() || bytes.substr(0, kMagic.size()) != kMagic) {
    throw BadMagicError("bad magic: not a TDLM checkpoint");
  }
  bytes.remove_prefix(kMagic.size());
  std::uint64_t length = 0;
  if (bytes.size() < sizeof length) throw TruncatedCheckpointError("checkpoint truncated inside the header length");
  std::memcpy(&length, bytes.data(), sizeof length);
  bytes.remove_prefix(sizeof length);
  if (bytes.size() < length) throw TruncatedCheckpointError("checkpoint truncated inside the header");
  json header;
  try {
    header = json::parse(bytes.substr(0, length));
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("malformed checkpoint header: ") + e.what());
  }
  const std::string_view payload = bytes.substr(length);

  try {
    const int version = header.at("format_version").get<int>();
    if (version != kCheckpointVersion) {
      throw VersionMismatchError("checkpoint format version " + std::to_string(version) + ", this build reads " +
                                 std::to_string(kCheckpointVersion));
    }
    const auto dtype = header.at("dtype").get<std::string>();
    if (dtype != kDtype) {
      throw VersionMismatchError("checkpoint stores " + dtype + " values, this build uses " + kDtype);
    }

    const TrainConfig config = load_config(header.at("config").get<std::string>());
    const auto& v = header.at("vocab");
    Vocabulary vocab = Vocabulary::from_entries(v.at("words").get<std::vector<std::string>>(),
                                                v.at("frequencies").get<std::vector<std::uint64_t>>(),
                                                v.at("stopwords").get<std::vector<bool>>());
    Checkpoint ck;
    ck.model =
        TdlmModel::create(config, std::move(vocab), NameIndex(header.at("labels").get<std::vector<std::string>>()),
                          NameIndex(header.at("tags").get<std::vector<std::string>>()),
                          header.at("tag_counts").get<std::vector<std::uint64_t>>());

    const auto expected = ck.model.parameters();
    const auto& tensors = header.at("tensors");
    if (tensors.size() != expected.size()) {
      throw ShapeMismatchError("checkpoint holds " + std::to_string(tensors.size()) + " tensors, the model has " +
                               std::to_string(expected.size()));
    }
    for (std::size_t i = 0; i < expected.size(); ++i) {
      const auto& entry = tensors[i];
      const auto name = entry.at("name").get<std::string>();
      const auto shape = entry.at("shape").get<Shape>();
      if (name != expected[i].name || shape != expected[i].tensor.shape()) {
        throw ShapeMismatchError("checkpoint tensor " + name + " " + shape_string(shape) + " does not match " +
                                 expected[i].name + " " + shape_string(expected[i].tensor.shape()));
      }
      auto values = read_values(payload, entry.at("offset").get<std::size_t>(), shape_numel(shape), name);
      ck.model.assign(name, shape, values);
    }

    const auto& a = header.at("adam");
    TrainState& state = ck.state;
    state.adam = Adam({a.at("learning_rate").get<double>(), a.at("beta1").get<double>(), a.at("beta2").get<double>(),
                       a.at("epsilon").get<double>()});
    std::map<std::string, AdamMoments> moments;
    for (const auto& m : a.at("moments")) {
      const auto name = m.at("name").get<std::string>();
      const auto size = m.at("size").get<std::size_t>();
      AdamMoments entry;
      entry.steps = m.at("steps").get<std::uint64_t>();
      entry.first = read_values(payload, m.at("first").get<std::size_t>(), size, "Adam state of " + name);
      entry.second = read_values(payload, m.at("second").get<std::size_t>(), size, "Adam state of " + name);
      moments.emplace(name, std::move(entry));
    }
    state.adam.restore(a.at("steps").get<std::uint64_t>(), std::move(moments));
    state.epoch = header.at("epoch").get<std::size_t>();
    state.rng = Rng::deserialize(header.at("rng").get<std::string>());
    state.best_dev_ppl = number_or(header.at("best_dev_ppl"), std::numeric_limits<double>::infinity());
    state.best_epoch = header.at("best_epoch").get<std::size_t>();
    state.history = decode_history(header.at("history"));
    return ck;
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("malformed checkpoint header: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const TdlmModel& model, const TrainState& state) {
  write_file_atomic(path, encode_checkpoint(model, state));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(read_file(path)); }

TDLM_NAMESPACE_END
