#ifndef TDLM_STOPWORDS_HPP_
#define TDLM_STOPWORDS_HPP_

#include <filesystem>
#include <string>
#include <unordered_set>

#include "tdlm/base.hpp"

TDLM_NAMESPACE_BEGIN

using StopwordSet = std::unordered_set<std::string>;

// Bundled English list (function words and punctuation).
const StopwordSet& default_stopwords();

// One word per line; blank lines and lines starting with '#' are ignored.
StopwordSet load_stopwords(const std::filesystem::path& path);

TDLM_NAMESPACE_END

#endif  // TDLM_STOPWORDS_HPP_
