#pragma once

#include <stdexcept>
#include <string>

namespace hypermax {

// Stable error codes; the CLI maps these onto process exit codes and
// machine-readable error JSON.
enum class ErrorCode {
    // core-model
    ArityMismatch,
    VertexOutOfRange,
    RepeatedVertexInTuple,
    BadRelationIndex,
    TooLargeForExactIso,
    // stepfn
    SimplexViolation,
    SymmetryViolation,
    RangeViolation,
    BadBlockIndex,
    ExactBoundExceeded,
    PartitionsNotPermutable,
    EmptyGraph,
    // density
    TooManyTerms,
    IndexArityMismatch,
    // objective
    DomainViolation,
    // solver
    Infeasible,
    NonConvergent,
    InfeasibleUpToMax,
    // logic
    EmptySolutionSet,
    SyntaxError,
    UnknownRelation,
    ArityError,
    UnquantifiedVariable,
    RepeatedVariableInAtom,
    // io / cli
    ValidationError,
    IoError,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code), message_(std::move(message)) {}

    ErrorCode code() const { return code_; }
    const std::string& message() const { return message_; }

private:
    ErrorCode code_;
    std::string message_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

} // namespace hypermax
