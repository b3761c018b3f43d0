#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace dflow {

// Every error raised by the library carries a short machine-readable category
// so the CLI can report it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(std::string category, const std::string& message)
      : std::runtime_error(message), category_(std::move(category)) {}

  const std::string& category() const noexcept { return category_; }

  // Input errors map to exit status 2, everything else to 1.
  virtual bool is_input_error() const noexcept { return false; }

 private:
  std::string category_;
};

class InputError : public Error {
 public:
  using Error::Error;
  bool is_input_error() const noexcept override { return true; }
};

struct ParseError : InputError {
  explicit ParseError(const std::string& msg) : InputError("parse", msg) {}
};

struct InvalidNetwork : InputError {
  explicit InvalidNetwork(const std::string& msg) : InputError("validation", msg) {}
};

struct DomainError : InputError {
  explicit DomainError(const std::string& msg) : InputError("domain", msg) {}
};

struct DiscretizationMismatch : InputError {
  explicit DiscretizationMismatch(const std::string& msg)
      : InputError("discretization", msg) {}
};

struct NegativeRate : Error {
  explicit NegativeRate(const std::string& msg) : Error("negative_rate", msg) {}
};

struct PathExplosion : Error {
  explicit PathExplosion(const std::string& msg) : Error("path_explosion", msg) {}
};

struct NotParallelPath : Error {
  explicit NotParallelPath(const std::string& msg) : Error("not_parallel_path", msg) {}
};

struct NotParallelLinks : Error {
  explicit NotParallelLinks(const std::string& msg) : Error("not_parallel_links", msg) {}
};

struct NotBlockFlow : Error {
  explicit NotBlockFlow(const std::string& msg) : Error("not_block_flow", msg) {}
};

struct AssumptionViolated : Error {
  explicit AssumptionViolated(const std::string& msg) : Error("assumption", msg) {}
};

struct CyclicDependencyUnresolved : Error {
  explicit CyclicDependencyUnresolved(const std::string& msg)
      : Error("cyclic_dependency", msg) {}
};

// Fixed-point iteration failed to settle; the last iterate is kept for
// diagnostics.
struct NoConvergence : Error {
  NoConvergence(const std::string& msg, std::vector<double> last)
      : Error("no_convergence", msg), last_iterate(std::move(last)) {}
  std::vector<double> last_iterate;
};

}  // namespace dflow
