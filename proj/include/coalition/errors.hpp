#pragma once

#include <stdexcept>
#include <string>

namespace coalition {

// Argument outside an operation's mathematical domain (N > M, a > N, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A chain level with zero advance probability; absorption is not certain.
class NonAbsorbingChain : public DomainError {
 public:
  using DomainError::DomainError;
};

// No cluster size, not even a singleton, has a positive interference estimate.
class InfeasibleNetwork : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration (placement geometry, CLI parameters, files).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// step() called on a state that already reached the grand coalition.
class AlreadyAbsorbed : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace coalition
