#pragma once

#include <map>
#include <string>

namespace scts {

// Parses a flat `key = value` file. '#' starts a comment, blank lines are
// skipped, keys and values are whitespace-trimmed. Later keys overwrite
// earlier ones. Throws DataError if the file cannot be read, ConfigError
// on a malformed line.
std::map<std::string, std::string> parse_key_value_file(const std::string& path);

// Same grammar, from an in-memory string (used by tests and by inline CLI
// overrides of the form key=value).
std::map<std::string, std::string> parse_key_value_text(const std::string& text);

}  // namespace scts
