#include "tracewise/error.hpp"

namespace tracewise {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::EmptyTrace: return "EmptyTrace";
    case ErrorCode::InvalidTraceInput: return "InvalidTraceInput";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::SizeOutOfRange: return "SizeOutOfRange";
    case ErrorCode::UnsatisfiableConstraint: return "UnsatisfiableConstraint";
    case ErrorCode::NoSolution: return "NoSolution";
    case ErrorCode::TooLargeForOracle: return "TooLargeForOracle";
    case ErrorCode::TooLargeForEnumeration: return "TooLargeForEnumeration";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DivisionByZero: return "DivisionByZero";
    case ErrorCode::CardMisuse: return "CardMisuse";
    case ErrorCode::NonSerializable: return "NonSerializable";
    case ErrorCode::KindMismatch: return "KindMismatch";
    case ErrorCode::InapplicableCorruption: return "InapplicableCorruption";
    case ErrorCode::FixtureFormatError: return "FixtureFormatError";
    case ErrorCode::WrongKind: return "WrongKind";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::TemplateMissing: return "TemplateMissing";
    case ErrorCode::AuthError: return "AuthError";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::RateLimited: return "RateLimited";
    case ErrorCode::MalformedResponse: return "MalformedResponse";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::DuplicateKey: return "DuplicateKey";
    case ErrorCode::InapplicablePolicy: return "InapplicablePolicy";
    case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

} // namespace tracewise
