#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tracewise {

enum class ErrorCode {
    EmptyTrace,
    InvalidTraceInput,
    DomainError,
    SizeOutOfRange,
    UnsatisfiableConstraint,
    NoSolution,
    TooLargeForOracle,
    TooLargeForEnumeration,
    ParseError,
    DivisionByZero,
    CardMisuse,
    NonSerializable,
    KindMismatch,
    InapplicableCorruption,
    FixtureFormatError,
    WrongKind,
    EmptyInput,
    IoError,
    TemplateMissing,
    AuthError,
    Timeout,
    RateLimited,
    MalformedResponse,
    FormatError,
    DuplicateKey,
    InapplicablePolicy,
    ConfigError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

} // namespace tracewise
