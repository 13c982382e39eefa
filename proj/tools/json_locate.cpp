#include "json_locate.hpp"

#include <cctype>
#include <stdexcept>

namespace etale::cli {

namespace {
struct Stop {};
}  // namespace

std::string pointer_token(const std::string &key) {
  std::string out;
  for (char c : key) {
    if (c == '~')
      out += "~0";
    else if (c == '/')
      out += "~1";
    else
      out += c;
  }
  return out;
}

JsonLocator::JsonLocator(const std::string &text) : text_(text) {
  try {
    value("");
  } catch (const Stop &) {
  }
}

void JsonLocator::skip_ws() {
  while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
    ++pos_;
}

std::string JsonLocator::string_token() {
  if (pos_ >= text_.size() || text_[pos_] != '"')
    throw Stop{};
  ++pos_;
  std::string out;
  while (pos_ < text_.size() && text_[pos_] != '"') {
    if (text_[pos_] == '\\') {
      if (++pos_ >= text_.size())
        throw Stop{};
      const char e = text_[pos_];
      switch (e) {
      case 'n': out += '\n'; break;
      case 't': out += '\t'; break;
      case 'r': out += '\r'; break;
      case 'b': out += '\b'; break;
      case 'f': out += '\f'; break;
      case 'u':
        // Keys with \u escapes are matched on their raw form.
        out += "\\u";
        break;
      default: out += e;
      }
      ++pos_;
      continue;
    }
    out += text_[pos_++];
  }
  if (pos_ >= text_.size())
    throw Stop{};
  ++pos_;
  return out;
}

void JsonLocator::value(const std::string &pointer) {
  skip_ws();
  if (pos_ >= text_.size())
    throw Stop{};
  record(pointer);
  const char c = text_[pos_];
  if (c == '{') {
    ++pos_;
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == '}') {
      ++pos_;
      return;
    }
    while (true) {
      skip_ws();
      const std::string key = string_token();
      skip_ws();
      if (pos_ >= text_.size() || text_[pos_] != ':')
        throw Stop{};
      ++pos_;
      value(pointer + "/" + pointer_token(key));
      skip_ws();
      if (pos_ >= text_.size())
        throw Stop{};
      if (text_[pos_] == ',') {
        ++pos_;
        continue;
      }
      if (text_[pos_] == '}') {
        ++pos_;
        return;
      }
      throw Stop{};
    }
  }
  if (c == '[') {
    ++pos_;
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == ']') {
      ++pos_;
      return;
    }
    for (std::size_t k = 0;; ++k) {
      value(pointer + "/" + std::to_string(k));
      skip_ws();
      if (pos_ >= text_.size())
        throw Stop{};
      if (text_[pos_] == ',') {
        ++pos_;
        continue;
      }
      if (text_[pos_] == ']') {
        ++pos_;
        return;
      }
      throw Stop{};
    }
  }
  if (c == '"') {
    string_token();
    return;
  }
  while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '-' ||
                                 text_[pos_] == '+' || text_[pos_] == '.'))
    ++pos_;
}

TextPosition JsonLocator::at_offset(std::size_t offset) const {
  TextPosition p;
  for (std::size_t i = 0; i < offset && i < text_.size(); ++i) {
    if (text_[i] == '\n') {
      ++p.line;
      p.column = 1;
    } else {
      ++p.column;
    }
  }
  return p;
}

TextPosition JsonLocator::find(const std::string &pointer) const {
  std::string p = pointer;
  while (true) {
    auto it = where_.find(p);
    if (it != where_.end())
      return at_offset(it->second);
    if (p.empty())
      return {};
    p.erase(p.rfind('/'));
  }
}

}  // namespace etale::cli
