#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "core/eval.hpp"

namespace gaitscreen::config {

inline constexpr std::string_view kVersion = "0.3.0";

struct KeyInfo {
  std::string name;
  std::string default_value;
  std::string help;
};

// Every recognized key, in echo order, with its default rendering.
const std::vector<KeyInfo>& keys();

// Parameters of one run. Keys are `section.name`; see keys().
class RunConfig {
 public:
  eval::ProtocolConfig protocol;

  // Throws Config on unknown keys or unparsable values.
  void set(std::string_view key, std::string_view value);
  std::string get(std::string_view key) const;

  // `key = value` lines; '#' starts a comment.
  void load_text(std::string_view text, std::string_view origin = "<config>");
  void load_file(const std::string& path);

  // Cross-field validation (filter against the nominal rate, CZT, folds).
  void validate() const;

  eval::ConfigEcho echo() const;
  std::string render() const;
};

}  // namespace gaitscreen::config
