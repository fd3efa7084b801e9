#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace xalign {

// Root of the error hierarchy. ValidationError descendants map to CLI exit
// code 1, TransportError descendants to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class TransportError : public Error {
 public:
  using Error::Error;
};

// core-data
class SchemaError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};
class DuplicateIdError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};
class LanguageMismatchError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};
class UnknownIdError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};
class DuplicateVariantError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};
class IoError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// prompt-and-parse
class EvidenceLanguageMismatchError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// consistency-engine
class MixedQuestionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// pair-factory
class MissingGroundTruthError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// metrics-and-eval
class IdMismatchError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};
class SubsetTooSmallError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};
class EmptyCorpusError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// pipeline-cli
class MissingPrerequisiteError : public ValidationError {
 public:
  explicit MissingPrerequisiteError(std::string stage)
      : ValidationError("missing prerequisite stage: " + stage), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
  ConfigError(const std::string& message, std::vector<std::string> keys)
      : ValidationError(message), keys_(std::move(keys)) {}
  const std::vector<std::string>& keys() const { return keys_; }

 private:
  std::vector<std::string> keys_;
};

// llm-gateway
class NetworkError : public TransportError {
 public:
  using TransportError::TransportError;
};
class TimeoutError : public TransportError {
 public:
  using TransportError::TransportError;
};
class EndpointError : public TransportError {
 public:
  EndpointError(int status, std::string body)
      : TransportError("endpoint returned status " + std::to_string(status)),
        status_(status),
        body_(std::move(body)) {}
  int status() const { return status_; }
  const std::string& body() const { return body_; }

 private:
  int status_;
  std::string body_;
};
class ProviderError : public TransportError {
 public:
  using TransportError::TransportError;
};
class TranslationError : public TransportError {
 public:
  using TransportError::TransportError;
};

}  // namespace xalign
