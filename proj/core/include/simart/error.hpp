#pragma once

#include <stdexcept>
#include <string>

namespace simart {

// Failure classes reported by the library. Command line tools map these to
// process exit codes, so the class a throw site picks is part of the contract:
//   validation  bad parameters or malformed input (exit 2)
//   unsupported a combination the library refuses by design (exit 2)
//   singularity a numerically degenerate configuration (exit 2)
//   resource    a computation would exceed its declared budget (exit 3)
//   io          filesystem or stream failure (exit 4)
enum class ErrorKind {
  validation,
  unsupported,
  singularity,
  resource,
  io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail_validation(const std::string& message) {
  throw Error(ErrorKind::validation, message);
}

[[noreturn]] inline void fail_unsupported(const std::string& message) {
  throw Error(ErrorKind::unsupported, message);
}

[[noreturn]] inline void fail_singularity(const std::string& message) {
  throw Error(ErrorKind::singularity, message);
}

[[noreturn]] inline void fail_resource(const std::string& message) {
  throw Error(ErrorKind::resource, message);
}

[[noreturn]] inline void fail_io(const std::string& message) {
  throw Error(ErrorKind::io, message);
}

inline void require(bool condition, const std::string& message) {
  if (!condition) fail_validation(message);
}

}  // namespace simart
