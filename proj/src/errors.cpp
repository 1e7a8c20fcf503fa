#include "hypermax/errors.hpp"

namespace hypermax {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::ArityMismatch: return "ArityMismatch";
        case ErrorCode::VertexOutOfRange: return "VertexOutOfRange";
        case ErrorCode::RepeatedVertexInTuple: return "RepeatedVertexInTuple";
        case ErrorCode::BadRelationIndex: return "BadRelationIndex";
        case ErrorCode::TooLargeForExactIso: return "TooLargeForExactIso";
        case ErrorCode::SimplexViolation: return "SimplexViolation";
        case ErrorCode::SymmetryViolation: return "SymmetryViolation";
        case ErrorCode::RangeViolation: return "RangeViolation";
        case ErrorCode::BadBlockIndex: return "BadBlockIndex";
        case ErrorCode::ExactBoundExceeded: return "ExactBoundExceeded";
        case ErrorCode::PartitionsNotPermutable: return "PartitionsNotPermutable";
        case ErrorCode::EmptyGraph: return "EmptyGraph";
        case ErrorCode::TooManyTerms: return "TooManyTerms";
        case ErrorCode::IndexArityMismatch: return "IndexArityMismatch";
        case ErrorCode::DomainViolation: return "DomainViolation";
        case ErrorCode::Infeasible: return "Infeasible";
        case ErrorCode::NonConvergent: return "NonConvergent";
        case ErrorCode::InfeasibleUpToMax: return "InfeasibleUpToMax";
        case ErrorCode::EmptySolutionSet: return "EmptySolutionSet";
        case ErrorCode::SyntaxError: return "SyntaxError";
        case ErrorCode::UnknownRelation: return "UnknownRelation";
        case ErrorCode::ArityError: return "ArityError";
        case ErrorCode::UnquantifiedVariable: return "UnquantifiedVariable";
        case ErrorCode::RepeatedVariableInAtom: return "RepeatedVariableInAtom";
        case ErrorCode::ValidationError: return "ValidationError";
        case ErrorCode::IoError: return "IoError";
    }
    return "UnknownError";
}

} // namespace hypermax
