#include "rlab/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "rlab/error.hpp"

namespace rlab {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

KeyValues parse_key_values(std::string_view text, std::string_view origin) {
  KeyValues out;
  std::size_t lineno = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = std::string(origin) + ":" + std::to_string(lineno);
    require(eq != std::string_view::npos, ErrorKind::InvalidInput, where + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    require(!key.empty(), ErrorKind::InvalidInput, where + ": empty key");
    require(key.find_first_of(" \t") == std::string_view::npos, ErrorKind::InvalidInput,
            where + ": key contains whitespace");
    out.emplace_back(key, value);
  }
  return out;
}

KeyValues read_key_values(const std::filesystem::path& path) {
  std::ifstream f(path);
  require(static_cast<bool>(f), ErrorKind::InvalidInput, "cannot open config " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_key_values(ss.str(), path.string());
}

std::vector<std::string> merge_config(std::vector<std::string> args, const KeyValues& kv) {
  auto given = [&](const std::string& flag) {
    return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || (a.size() > flag.size() && a.compare(0, flag.size() + 1, flag + "=") == 0);
    });
  };
  std::vector<std::string> extra;
  for (const auto& [key, value] : kv) {
    const std::string flag = "--" + key;
    if (given(flag)) continue;
    if (value == "false") continue;
    extra.push_back(flag);
    if (value != "true") extra.push_back(value);
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

}  // namespace rlab
