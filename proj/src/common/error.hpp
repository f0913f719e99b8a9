#ifndef ROCCG_COMMON_ERROR_HPP_
#define ROCCG_COMMON_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace roccg {

// Failure categories shared by the core library, the C API and the CLI exit
// codes (usage = 1, input = 2, solver = 3).
enum class ErrorKind {
  kUsage = 1,
  kInput = 2,
  kSolver = 3,
  kInternal = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Malformed optimization model (dangling variable, inverted bounds).
class ModelError : public Error {
 public:
  explicit ModelError(const std::string& what)
      : Error(ErrorKind::kInput, "model error: " + what) {}
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what)
      : Error(ErrorKind::kUsage, what) {}
};

class InputError : public Error {
 public:
  explicit InputError(const std::string& what)
      : Error(ErrorKind::kInput, what) {}
};

class SolverError : public Error {
 public:
  explicit SolverError(const std::string& what)
      : Error(ErrorKind::kSolver, what) {}
};

}  // namespace roccg

#endif  // ROCCG_COMMON_ERROR_HPP_
