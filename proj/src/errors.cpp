#include "hpbl/types.hpp"

namespace hpbl {

const char* error_kind_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::NonSquare: return "NonSquare";
        case ErrorKind::NumericalFailure: return "NumericalFailure";
        case ErrorKind::GlancingOrCharacteristic: return "GlancingOrCharacteristic";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::RankDeficient: return "RankDeficient";
        case ErrorKind::NotInStableSubspace: return "NotInStableSubspace";
        case ErrorKind::SingularAd: return "SingularAd";
        case ErrorKind::ClustersNotSeparated: return "ClustersNotSeparated";
        case ErrorKind::ContractionDiverged: return "ContractionDiverged";
        case ErrorKind::SingularH: return "SingularH";
        case ErrorKind::CharacteristicBoundary: return "CharacteristicBoundary";
        case ErrorKind::TransversalityFailure: return "TransversalityFailure";
        case ErrorKind::ZeroFrequency: return "ZeroFrequency";
        case ErrorKind::NotEvolutionary: return "NotEvolutionary";
        case ErrorKind::NotEvolutionaryAtPoint: return "NotEvolutionaryAtPoint";
        case ErrorKind::GlancingLimitFailure: return "GlancingLimitFailure";
        case ErrorKind::WrongShape: return "WrongShape";
        case ErrorKind::RankConditionFails: return "RankConditionFails";
        case ErrorKind::NonSymmetric: return "NonSymmetric";
        case ErrorKind::TraceNotInStableSubspace: return "TraceNotInStableSubspace";
        case ErrorKind::AdNotPositive: return "AdNotPositive";
        case ErrorKind::NonlinearSolveDiverged: return "NonlinearSolveDiverged";
        case ErrorKind::SolvabilityResidualLarge: return "SolvabilityResidualLarge";
        case ErrorKind::CFLBlowup: return "CFLBlowup";
        case ErrorKind::SupportReachedOutflow: return "SupportReachedOutflow";
        case ErrorKind::SyntaxError: return "SyntaxError";
        case ErrorKind::UnknownIdentifier: return "UnknownIdentifier";
        case ErrorKind::DivisionGuard: return "DivisionGuard";
        case ErrorKind::SchemaError: return "SchemaError";
        case ErrorKind::InvariantViolation: return "InvariantViolation";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

bool is_input_error(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::SyntaxError:
        case ErrorKind::UnknownIdentifier:
        case ErrorKind::DivisionGuard:
        case ErrorKind::SchemaError:
        case ErrorKind::InvariantViolation:
        case ErrorKind::InvalidArgument:
        case ErrorKind::NonSymmetric:
        case ErrorKind::WrongShape:
        case ErrorKind::SingularAd:
        case ErrorKind::CharacteristicBoundary:
        case ErrorKind::TransversalityFailure:
            return true;
        default:
            return false;
    }
}

}  // namespace hpbl
