#pragma once

#include <stdexcept>
#include <string>

namespace parselab {

/// File/stream content that cannot be parsed (CoNLL, config, model files).
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Structurally invalid data (bad head indices, misaligned corpora, ...).
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Bad command line or configuration.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace parselab
