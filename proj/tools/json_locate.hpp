#pragma once

#include <cstddef>
#include <map>
#include <string>

namespace etale::cli {

struct TextPosition {
  std::size_t line = 1;
  std::size_t column = 1;
};

// Start position of every value in a JSON text, keyed by JSON pointer
// ("" for the root). Positions of a malformed text are recorded up to the
// first error.
class JsonLocator {
public:
  explicit JsonLocator(const std::string &text);
  // Position of the value at pointer, or of its closest recorded ancestor.
  TextPosition find(const std::string &pointer) const;
  // Line and column of a byte offset.
  TextPosition at_offset(std::size_t offset) const;

private:
  void value(const std::string &pointer);
  void skip_ws();
  std::string string_token();
  void record(const std::string &pointer) { where_.emplace(pointer, pos_); }

  const std::string &text_;
  std::size_t pos_ = 0;
  std::map<std::string, std::size_t> where_;
};

// RFC 6901 escaping of one reference token.
std::string pointer_token(const std::string &key);

}  // namespace etale::cli
