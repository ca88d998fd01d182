#include "tdlm/tokenizer.hpp"

#include <array>
#include <cctype>

TDLM_NAMESPACE_BEGIN

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool is_alnum(char c) {
  const auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) != 0 || u >= 0x80;
}

bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

bool is_punct(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < 0x80 && std::ispunct(u) != 0;
}

char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

void push_word(Sentence& sentence, std::string word, bool split_contractions) {
  if (word.empty()) return;
  if (split_contractions) {
    if (word.size() > 3 && word.compare(word.size() - 3, 3, "n't") == 0) {
      sentence.push_back(word.substr(0, word.size() - 3));
      sentence.emplace_back("n't");
      return;
    }
    static constexpr std::array<std::string_view, 6> suffixes{"'s", "'re", "'ll", "'ve", "'d", "'m"};
    for (auto suffix : suffixes) {
      if (word.size() > suffix.size() && word.compare(word.size() - suffix.size(), suffix.size(), suffix) == 0) {
        sentence.push_back(word.substr(0, word.size() - suffix.size()));
        sentence.emplace_back(suffix);
        return;
      }
    }
  }
  sentence.push_back(std::move(word));
}

}  // namespace

std::vector<Sentence> tokenize(std::string_view text, const TokenizerOptions& options) {
  std::vector<Sentence> sentences;
  Sentence current;
  std::string word;
  auto flush_word = [&] {
    push_word(current, std::move(word), options.split_contractions);
    word.clear();
  };
  auto end_sentence = [&] {
    flush_word();
    if (!current.empty()) sentences.push_back(std::move(current));
    current.clear();
  };

  const std::size_t n = text.size();
  for (std::size_t i = 0; i < n; ++i) {
    const char c = text[i];
    if (c == '\n') {
      end_sentence();
      continue;
    }
    if (is_space(c)) {
      flush_word();
      continue;
    }
    if (!is_punct(c)) {
      word.push_back(lower(c));
      continue;
    }
    const char prev = i > 0 ? text[i - 1] : ' ';
    const char next = i + 1 < n ? text[i + 1] : ' ';
    const bool joins_word = (c == '\'' || c == '-') && !word.empty() && is_alnum(prev) && is_alnum(next);
    const bool joins_number = (c == '.' || c == ',') && !word.empty() && is_digit(prev) && is_digit(next);
    if (joins_word || joins_number) {
      word.push_back(c);
      continue;
    }
    flush_word();
    current.emplace_back(1, c);
    if (options.split_sentences && (c == '.' || c == '?' || c == '!') && (i + 1 == n || is_space(next))) {
      end_sentence();
    }
  }
  end_sentence();
  return sentences;
}

TDLM_NAMESPACE_END
