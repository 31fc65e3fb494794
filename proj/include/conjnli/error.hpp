#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace conjnli {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed bracketed tree; offset is the character position in the input.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t offset)
      : Error(message + " at offset " + std::to_string(offset)),
        message_(message),
        offset_(offset) {}

  const std::string& message() const { return message_; }
  std::size_t offset() const { return offset_; }

 private:
  std::string message_;
  std::size_t offset_;
};

// Malformed line in a line-oriented input file (1-based line number).
class FormatError : public Error {
 public:
  FormatError(const std::string& message, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Operation called outside its contract (wrong operation kind, empty data...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace conjnli
