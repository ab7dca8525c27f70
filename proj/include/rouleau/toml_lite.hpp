#ifndef ROULEAU_TOML_LITE_HPP
#define ROULEAU_TOML_LITE_HPP

#include <string>

#include "json.hpp"

namespace rouleau {

// The TOML subset used by scenario files: [table] and [a.b] headers, bare or
// quoted keys, strings, integers, floats, booleans, (nested, multi-line) arrays
// and inline tables. Anything else is a ConfigError naming the line.
nlohmann::ordered_json parse_toml(const std::string& text);
nlohmann::ordered_json parse_toml_file(const std::string& path);

}  // namespace rouleau

#endif
