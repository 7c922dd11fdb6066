#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace editprog {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Grammar text rejected. `offset` is the byte position of the problem.
struct ParseError : Error {
    std::size_t offset;
    ParseError(std::string msg, std::size_t at)
        : Error(msg + " (byte offset " + std::to_string(at) + ")"), offset(at) {}
};

/// Escape input already contains one of the entity forms; escaping it would
/// break injectivity, so the caller must reject or pre-sanitize.
struct EscapeDomainError : Error {
    using Error::Error;
};

enum class ResolveErrorKind { OutOfRange, MalformedOp, MixedGranularity, NeedsTokenizer };

struct ResolveError : Error {
    ResolveErrorKind kind;
    std::size_t op_index;
    ResolveError(ResolveErrorKind k, std::size_t op, std::string msg)
        : Error(std::move(msg)), kind(k), op_index(op) {}
};

struct TokenizerError : Error {
    using Error::Error;
};

struct OracleError : Error {  // LossyTokenization and friends
    using Error::Error;
};

struct ReplayError : Error {  // a Program the FSM replay cannot reproduce
    using Error::Error;
};

struct SchemaError : Error {  // bad fixture / corpus / report input
    using Error::Error;
};

struct CostModelError : Error {  // HistogramMismatch, NoViableSpan, NonMonotoneN
    using Error::Error;
};

enum class FormatErrorKind { EmptyAnchor, NoMatch, HunkMismatch, BadScript };

struct FormatError : Error {
    FormatErrorKind kind;
    FormatError(FormatErrorKind k, std::string msg) : Error(std::move(msg)), kind(k) {}
};

}  // namespace editprog
