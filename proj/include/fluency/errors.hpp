#pragma once

#include <stdexcept>
#include <string>

namespace fluency {

// Input could not be parsed (manifest lines, rule files, model files, LLM replies).
class ParseError : public std::runtime_error {
public:
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Well-formed input that violates a domain invariant.
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Argument outside an operation's domain (bad score, non-positive duration).
class DomainError : public std::runtime_error {
public:
  explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

// Missing or unusable runtime configuration (auth token, paths, flags).
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Remote endpoint failed after all retries.
class EndpointError : public std::runtime_error {
public:
  explicit EndpointError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace fluency
