#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dialect {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;

  // Validation errors describe bad input (files, flags, configuration) and map
  // to CLI exit code 1. Everything else is a runtime failure (exit code 2).
  virtual bool is_validation() const noexcept { return false; }
};

class ValidationError : public Error {
 public:
  using Error::Error;
  bool is_validation() const noexcept override { return true; }
};

// Malformed record. line() is 1-based, 0 when no file position applies.
class SchemaError : public ValidationError {
 public:
  SchemaError(const std::string& message, std::size_t line = 0);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ReferenceError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DuplicateIdError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class HyperParamError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class UsageError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class LocaleOverlapError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class MissingAnnotationError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InsufficientDataError : public Error {
 public:
  InsufficientDataError(std::string feature_id, std::string polarity,
                        std::size_t shortfall);
  const std::string& feature_id() const noexcept { return feature_id_; }
  // "positive" or "negative".
  const std::string& polarity() const noexcept { return polarity_; }
  std::size_t shortfall() const noexcept { return shortfall_; }

 private:
  std::string feature_id_;
  std::string polarity_;
  std::size_t shortfall_;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class EmptyDatasetError : public Error {
 public:
  using Error::Error;
};

class UnknownFeatureError : public Error {
 public:
  using Error::Error;
};

class VocabularyError : public Error {
 public:
  using Error::Error;
};

class EncoderUnavailableError : public Error {
 public:
  using Error::Error;
};

class ArtifactError : public Error {
 public:
  using Error::Error;
};

class ZeroTokenError : public Error {
 public:
  using Error::Error;
};

class EmptyTranscriptError : public Error {
 public:
  using Error::Error;
};

class DegenerateLabelsError : public Error {
 public:
  using Error::Error;
};

class EmptyReportError : public Error {
 public:
  using Error::Error;
};

class LengthMismatchError : public Error {
 public:
  using Error::Error;
};

class ConstantInputError : public Error {
 public:
  using Error::Error;
};

class ZeroVarianceError : public Error {
 public:
  using Error::Error;
};

class EmptyPopulationError : public Error {
 public:
  using Error::Error;
};

class DegenerateError : public Error {
 public:
  using Error::Error;
};

class FeatureSetMismatchError : public Error {
 public:
  using Error::Error;
};

}  // namespace dialect
