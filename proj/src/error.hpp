#pragma once

#include <stdexcept>
#include <string>

namespace bflow {

// Error categories mirrored one-to-one by the C API status codes.
enum class ErrorCode {
    InvalidArgument,
    Config,
    Containment,
    DegenerateSet,
    Solver,
    Contract,
    Io,
};

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
    ErrorCode code() const { return code_; }

  private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) { throw Error(code, msg); }

inline void require(bool cond, ErrorCode code, const std::string& msg) {
    if (!cond) fail(code, msg);
}

}  // namespace bflow
