#pragma once

#include <stdexcept>
#include <string>

namespace gode {

enum class ErrorCode {
    validation = 2,   // bad inputs, malformed files, broken invariants
    trial_failure = 3,
    io = 4,
    internal = 5,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& message)
        : Error(ErrorCode::validation, message) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& message) : Error(ErrorCode::io, message) {}
};

// Thrown by detectors when the training loss goes non-finite.
class DivergenceError : public Error {
public:
    explicit DivergenceError(const std::string& message)
        : Error(ErrorCode::trial_failure, message) {}
};

}  // namespace gode
