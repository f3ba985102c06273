#pragma once

#include <stdexcept>
#include <string>

namespace pucci {

enum class ErrorCode {
    InvalidArgument = 1,  // bad parameters or configuration
    Numerical = 2,        // solver-level failure (no zero, no sign change, underflow, ...)
    Internal = 3          // invariant violation
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string msg) : std::runtime_error(std::move(msg)), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail_invalid(const std::string& msg) {
    throw Error(ErrorCode::InvalidArgument, msg);
}
[[noreturn]] inline void fail_numeric(const std::string& msg) {
    throw Error(ErrorCode::Numerical, msg);
}
[[noreturn]] inline void fail_internal(const std::string& msg) {
    throw Error(ErrorCode::Internal, msg);
}

}  // namespace pucci
