#pragma once

// Flat "key = value" files with '#' comments, merged into argv so that
// command-line flags take precedence.

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rlab {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Keys and values are trimmed; blank lines and '#' comments are skipped.
/// Malformed lines raise invalid-input naming the origin and line.
KeyValues parse_key_values(std::string_view text, std::string_view origin = "<config>");
KeyValues read_key_values(const std::filesystem::path& path);

/// Appends "--key value" for every entry whose "--key" is not already in
/// args. The values "true" and "false" map to a bare flag and to nothing.
std::vector<std::string> merge_config(std::vector<std::string> args, const KeyValues& kv);

}  // namespace rlab
