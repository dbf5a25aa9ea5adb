#pragma once

#include <stdexcept>
#include <string>

namespace prototrack {

// Base class for all engine errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Cosine similarity requested against a zero-norm vector.
class ZeroVectorError : public Error {
 public:
  using Error::Error;
};

// Scalar input outside its documented domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Masked pooling over a mask with no foreground pixels.
class EmptyMaskError : public Error {
 public:
  using Error::Error;
};

// Frame indices appended out of order.
class SequenceError : public Error {
 public:
  using Error::Error;
};

// Lookup of a frame index not present in the bank.
class MissingEntryError : public Error {
 public:
  using Error::Error;
};

// Tensor dimensions that violate an operation's contract.
class BadShapeError : public Error {
 public:
  using Error::Error;
};

// First-frame box prompt that is empty or out of bounds.
class BadPromptError : public Error {
 public:
  using Error::Error;
};

// Malformed text input; carries the 1-based offending line.
class ParseError : public Error {
 public:
  ParseError(int line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Paired sequences of different length.
class LengthMismatchError : public Error {
 public:
  using Error::Error;
};

}  // namespace prototrack
