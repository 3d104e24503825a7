#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace gvar {

/// Base class for all library errors. `code()` is a stable machine-parsable
/// identifier (the CLI prints `error: <code>: <detail>`); `what()` carries the
/// full message.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

    [[nodiscard]] const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

struct DomainError : Error {
    explicit DomainError(const std::string& m) : Error("domain-error", m) {}
};

struct SingularityError : Error {
    explicit SingularityError(const std::string& m) : Error("singular-matrix", m) {}
};

struct InsufficientSampleError : Error {
    explicit InsufficientSampleError(const std::string& m) : Error("insufficient-sample", m) {}
};

struct DegenerateMeasureError : Error {
    explicit DegenerateMeasureError(const std::string& m) : Error("degenerate-measure", m) {}
};

struct DegenerateInputError : Error {
    explicit DegenerateInputError(const std::string& m) : Error("degenerate-input", m) {}
};

struct TooLargeError : Error {
    explicit TooLargeError(const std::string& m) : Error("too-large", m) {}
};

struct IoError : Error {
    explicit IoError(const std::string& m) : Error("io-error", m) {}
};

} // namespace gvar
