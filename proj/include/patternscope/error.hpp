// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 PatternScope Contributors

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace patternscope {

/// Error classes. Each maps to a distinct CLI exit code (see exit_code()).
enum class ErrorClass {
  kConfig = 2,
  kIo = 3,
  kParse = 4,
  kDependency = 5,
  kTraining = 6,
  kExternalScorer = 7,
  kData = 8,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string& what)
      : std::runtime_error(what), cls_(cls) {}

  ErrorClass error_class() const { return cls_; }
  int exit_code() const { return static_cast<int>(cls_); }

 private:
  ErrorClass cls_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorClass::kConfig, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorClass::kIo, what) {}
};

/// Malformed document. `offset` is the byte offset where parsing failed.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(ErrorClass::kParse, what), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Well-formed document that violates the hierarchy schema.
class SchemaError : public Error {
 public:
  SchemaError(const std::string& what, std::string node_path)
      : Error(ErrorClass::kParse, what), node_path_(std::move(node_path)) {}
  const std::string& node_path() const { return node_path_; }

 private:
  std::string node_path_;
};

class DependencyError : public Error {
 public:
  explicit DependencyError(const std::string& what) : Error(ErrorClass::kDependency, what) {}
};

class ExternalScorerError : public Error {
 public:
  explicit ExternalScorerError(const std::string& what)
      : Error(ErrorClass::kExternalScorer, what) {}
};

/// Statistically or geometrically degenerate input (empty group, zero variance,
/// zero-area crop, empty heatmap, ...).
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorClass::kData, what) {}
};

}  // namespace patternscope
