#ifndef TDLM_GENERATION_HPP_
#define TDLM_GENERATION_HPP_

#include <span>
#include <string>
#include <vector>

#include "tdlm/model.hpp"

TDLM_NAMESPACE_BEGIN

struct GenerationOptions {
  double temperature = 0.75;  // below 1e-6 selects greedy decoding
  std::size_t max_words = 40;
  std::uint64_t seed = 1;
};

struct GeneratedSentence {
  std::vector<TokenId> ids;  // without the terminating eos
  std::vector<std::string> words;
};

// Samples one sentence with the topic vector fixed to row `topic` of the
// topic output table. Starts from eos with a zero state and stops at eos or
// after max_words words. Pad is never emitted.
GeneratedSentence generate_sentence(const TdlmModel& model, std::size_t topic, const GenerationOptions& options);

// As generate_sentence with the topic vector set to the weights' mixture of
// topic output rows. Weights must be non-negative and sum to 1 within 1e-6.
GeneratedSentence generate_mixture(const TdlmModel& model, std::span<const double> weights,
                                   const GenerationOptions& options);

TDLM_NAMESPACE_END

#endif  // TDLM_GENERATION_HPP_
