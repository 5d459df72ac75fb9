#ifndef SUBSEG_ERRORS_HPP
#define SUBSEG_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace subseg {

// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Malformed input file. Carries a 1-based line number when known.
class ParseError : public Error {
public:
  ParseError(const std::string& msg, long line = 0)
      : Error(line > 0 ? msg + " (line " + std::to_string(line) + ")" : msg),
        line_(line) {}
  long line() const { return line_; }

private:
  long line_;
};

// Invalid configuration or data that violates a documented invariant.
class ValidationError : public Error {
public:
  using Error::Error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
  using Error::Error;
};

// A word whose lattice has no path from start to end under the model.
class UnsegmentableWordError : public Error {
public:
  explicit UnsegmentableWordError(const std::string& word_utf8)
      : Error("word cannot be segmented with the current lexicon: \"" +
              word_utf8 + "\""),
        word_(word_utf8) {}
  const std::string& word() const { return word_; }

private:
  std::string word_;
};

}  // namespace subseg

#endif
