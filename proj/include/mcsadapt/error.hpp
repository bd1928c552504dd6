#pragma once

#include <stdexcept>
#include <string>

namespace mcsadapt {

// Error categories map onto CLI exit codes: config/usage = 1, data = 2,
// numerical/training = 3. ContractError signals a violated precondition.

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Header row does not provide a mandatory column.
class SchemaError : public DataError {
 public:
  using DataError::DataError;
};

/// Timestamps not strictly increasing.
class OrderingError : public DataError {
 public:
  OrderingError(const std::string& what, long long offending_ms)
      : DataError(what), offending_ms_(offending_ms) {}
  long long offending_ms() const noexcept { return offending_ms_; }

 private:
  long long offending_ms_;
};

class EmptyInputError : public DataError {
 public:
  using DataError::DataError;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training diverged; carries the last epoch whose loss was finite.
class TrainingError : public NumericalError {
 public:
  TrainingError(const std::string& what, int last_stable_epoch)
      : NumericalError(what), last_stable_epoch_(last_stable_epoch) {}
  int last_stable_epoch() const noexcept { return last_stable_epoch_; }

 private:
  int last_stable_epoch_;
};

class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace mcsadapt
