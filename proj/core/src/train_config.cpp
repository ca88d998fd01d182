#include "tdlm/train_config.hpp"

#include <charconv>
#include <set>
#include <sstream>
#include <variant>

TDLM_NAMESPACE_BEGIN

namespace {

static_assert(std::is_same_v<std::size_t, std::uint64_t>, "64-bit size_t expected");

using Field =
    std::variant<std::size_t TrainConfig::*, double TrainConfig::*, bool TrainConfig::*, std::string TrainConfig::*>;

struct Key {
  const char* name;
  Field field;
};

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      {"m1", &TrainConfig::m1},
      {"m2", &TrainConfig::m2},
      {"m3", &TrainConfig::m3},
      {"n_batch", &TrainConfig::n_batch},
      {"n_layer", &TrainConfig::n_layer},
      {"n_hidden", &TrainConfig::n_hidden},
      {"n_epoch", &TrainConfig::n_epoch},
      {"k", &TrainConfig::k},
      {"e", &TrainConfig::e},
      {"h", &TrainConfig::h},
      {"a", &TrainConfig::a},
      {"b", &TrainConfig::b},
      {"l", &TrainConfig::l},
      {"p1", &TrainConfig::p1},
      {"p2", &TrainConfig::p2},
      {"seed", &TrainConfig::seed},
      {"clip_norm", &TrainConfig::clip_norm},
      {"lr_decay", &TrainConfig::lr_decay},
      {"beta1", &TrainConfig::beta1},
      {"beta2", &TrainConfig::beta2},
      {"epsilon", &TrainConfig::epsilon},
      {"vanilla", &TrainConfig::vanilla},
      {"supervised", &TrainConfig::supervised},
      {"tags", &TrainConfig::tags},
      {"f", &TrainConfig::f},
      {"topic_init", &TrainConfig::topic_init},
      {"topic_out_init", &TrainConfig::topic_out_init},
      {"min_count", &TrainConfig::min_count},
      {"top_exclude_fraction", &TrainConfig::top_exclude_fraction},
      {"split_sentences", &TrainConfig::split_sentences},
      {"split_contractions", &TrainConfig::split_contractions},
      {"stopwords", &TrainConfig::stopwords},
  };
  return table;
}

std::string_view trim(std::string_view s) {
  const char* ws = " \t\r";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || p != value.data() + value.size()) {
    throw ConfigError("config key '" + std::string(key) + "': cannot parse '" + std::string(value) + "'");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
  if (value == "0" || value == "false" || value == "no" || value == "off") return false;
  throw ConfigError("config key '" + std::string(key) + "': expected a boolean, got '" + std::string(value) + "'");
}

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> names;
  for (const auto& k : keys()) names.emplace_back(k.name);
  return names;
}

void set_config_value(TrainConfig& config, std::string_view key, std::string_view value) {
  for (const auto& k : keys()) {
    if (key != k.name) continue;
    std::visit(
        [&](auto member) {
          using T = std::remove_cvref_t<decltype(config.*member)>;
          if constexpr (std::is_same_v<T, bool>) {
            config.*member = parse_bool(key, value);
          } else if constexpr (std::is_same_v<T, std::string>) {
            config.*member = std::string(value);
          } else {
            config.*member = parse_number<T>(key, value);
          }
        },
        k.field);
    return;
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

TrainConfig load_config(std::string_view text, const std::map<std::string, std::string>& overrides) {
  TrainConfig config;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
    }
    auto key = std::string(trim(line.substr(0, eq)));
    auto value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) throw ConfigError("config key '" + key + "' set twice");
    set_config_value(config, key, value);
  }
  for (const auto& [key, value] : overrides) {
    set_config_value(config, key, value);
    seen.insert(key);
  }
  if (config.supervised) {
    if (!seen.count("a")) config.a = 80;
    if (!seen.count("b")) config.b = 100;
    if (!seen.count("m3")) config.m3 = 150;
    if (!seen.count("n_epoch")) config.n_epoch = 20;
  }
  config.validate();
  return config;
}

void TrainConfig::validate() const {
  auto positive = [](const char* name, std::size_t v) {
    if (v == 0) throw ConfigError(std::string("config key '") + name + "' must be positive");
  };
  positive("m1", m1);
  positive("m2", m2);
  positive("m3", m3);
  positive("n_batch", n_batch);
  positive("n_layer", n_layer);
  positive("n_hidden", n_hidden);
  positive("k", k);
  positive("e", e);
  positive("h", h);
  positive("a", a);
  positive("b", b);
  positive("f", f);
  if (!(l > 0.0)) throw ConfigError("config key 'l' must be positive");
  if (!(p1 > 0.0 && p1 <= 1.0)) throw ConfigError("config key 'p1' must lie in (0, 1]");
  if (!(p2 > 0.0 && p2 <= 1.0)) throw ConfigError("config key 'p2' must lie in (0, 1]");
  if (!(lr_decay > 0.0)) throw ConfigError("config key 'lr_decay' must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
  if (!(topic_init > 0.0) || !(topic_out_init > 0.0)) {
    throw ConfigError("config keys 'topic_init' and 'topic_out_init' must be positive");
  }
  if (!(epsilon > 0.0)) throw ConfigError("config key 'epsilon' must be positive");
  if (!(top_exclude_fraction >= 0.0 && top_exclude_fraction < 1.0)) {
    throw ConfigError("config key 'top_exclude_fraction' must lie in [0, 1)");
  }
  if (vanilla && (supervised || tags)) {
    throw ConfigError("the vanilla LSTM has no topic component; it cannot be combined with supervised or tags");
  }
}

std::string TrainConfig::to_text() const {
  std::ostringstream out;
  for (const auto& k : keys()) {
    out << k.name << '=';
    std::visit(
        [&](auto member) {
          using T = std::remove_cvref_t<decltype(this->*member)>;
          if constexpr (std::is_same_v<T, bool>) {
            out << (this->*member ? "true" : "false");
          } else if constexpr (std::is_same_v<T, double>) {
            out << format_double(this->*member);
          } else {
            out << this->*member;
          }
        },
        k.field);
    out << '\n';
  }
  return out.str();
}

TDLM_NAMESPACE_END
