#ifndef TDLM_IO_HPP_
#define TDLM_IO_HPP_

#include <filesystem>
#include <string>
#include <string_view>

#include "tdlm/base.hpp"

TDLM_NAMESPACE_BEGIN

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

TDLM_NAMESPACE_END

#endif  // TDLM_IO_HPP_
