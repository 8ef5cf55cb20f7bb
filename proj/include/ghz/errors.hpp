#pragma once

#include <stdexcept>
#include <string>

namespace ghz {

/// Two states passed to a product share a photon index.
class LabelCollisionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An element expected a photon in a mode that is empty (or overfull).
class RoutingError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A conditioning step (post-selection, projection) has zero probability.
class ImpossibleOutcomeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed configuration; key() names the offending entry.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace ghz
