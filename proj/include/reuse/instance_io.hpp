#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "reuse/instance.hpp"

namespace reuse {

// The document is not a well-formed instance file: malformed JSON, a schema
// violation, an unknown field or an unsupported version.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kInstanceFileVersion = 1;

// Parses the version-1 instance schema:
//   {"version": 1, "T": int,
//    "resources": [{"reward": x, "dist": {"type": "geometric", "p": x}
//                                      | {"type": "finite", "pmf": [[d, prob], ...]}}],
//    "arrivals": [[0-based indices], ...]}
// The result is neither validated nor canonicalized.
Instance parse_instance(std::string_view text);
Instance load_instance(const std::filesystem::path& path);

// Writes resources in their current order with 0-based indices.
std::string instance_to_json(const Instance& instance);
void save_instance(const Instance& instance, const std::filesystem::path& path);

}  // namespace reuse
