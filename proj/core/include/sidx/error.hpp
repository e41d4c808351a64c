#pragma once

#include <stdexcept>
#include <string>

namespace sidx {

/// Coarse classification used by the CLI to pick an exit code.
enum class ErrorKind {
    Config,     // bad input, bad configuration, violated precondition
    Numerical,  // solver failure, degenerate estimate, overflow
};

/// Every failure raised by the library. `what()` carries a stage/reason message.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void config_error(const std::string& msg) { throw Error(ErrorKind::Config, msg); }
[[noreturn]] inline void numerical_error(const std::string& msg) { throw Error(ErrorKind::Numerical, msg); }

}  // namespace sidx
