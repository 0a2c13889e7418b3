#include "trendlab/errors.hpp"

namespace trendlab {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::MissingFile: return "MissingFile";
        case ErrorCode::MalformedRow: return "MalformedRow";
        case ErrorCode::NonPositivePrice: return "NonPositivePrice";
        case ErrorCode::DuplicateObservation: return "DuplicateObservation";
        case ErrorCode::SeriesTooShort: return "SeriesTooShort";
        case ErrorCode::InvalidSpec: return "InvalidSpec";
        case ErrorCode::ZeroVolatility: return "ZeroVolatility";
        case ErrorCode::HorizonMismatch: return "HorizonMismatch";
        case ErrorCode::MisalignedDates: return "MisalignedDates";
        case ErrorCode::EmptyUniverse: return "EmptyUniverse";
        case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
        case ErrorCode::DimensionZero: return "DimensionZero";
        case ErrorCode::OnesInKernel: return "OnesInKernel";
        case ErrorCode::NotSymmetric: return "NotSymmetric";
        case ErrorCode::DimensionTooLarge: return "DimensionTooLarge";
        case ErrorCode::ParameterOutOfRange: return "ParameterOutOfRange";
        case ErrorCode::WOutOfRange: return "WOutOfRange";
        case ErrorCode::InsufficientData: return "InsufficientData";
        case ErrorCode::DegenerateCovariance: return "DegenerateCovariance";
        case ErrorCode::PopulationTooSmall: return "PopulationTooSmall";
        case ErrorCode::EmptySeries: return "EmptySeries";
        case ErrorCode::AlphaOutOfRange: return "AlphaOutOfRange";
        case ErrorCode::InsufficientHistory: return "InsufficientHistory";
        case ErrorCode::SingularInnovation: return "SingularInnovation";
        case ErrorCode::NoCrisisMonths: return "NoCrisisMonths";
        case ErrorCode::ZeroVol: return "ZeroVol";
        case ErrorCode::ZeroDrawdown: return "ZeroDrawdown";
        case ErrorCode::NonPositiveInput: return "NonPositiveInput";
        case ErrorCode::InsufficientOverlap: return "InsufficientOverlap";
        case ErrorCode::UnknownVariant: return "UnknownVariant";
        case ErrorCode::NegativeCost: return "NegativeCost";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::IoError: return "IoError";
    }
    return "UnknownError";
}

ErrorCategory error_category(ErrorCode code) {
    switch (code) {
        case ErrorCode::ConfigError:
        case ErrorCode::InvalidSpec:
        case ErrorCode::ParameterOutOfRange:
        case ErrorCode::AlphaOutOfRange:
        case ErrorCode::UnknownVariant:
            return ErrorCategory::Config;
        case ErrorCode::MissingFile:
        case ErrorCode::MalformedRow:
        case ErrorCode::NonPositivePrice:
        case ErrorCode::DuplicateObservation:
        case ErrorCode::SeriesTooShort:
        case ErrorCode::MisalignedDates:
        case ErrorCode::EmptyUniverse:
        case ErrorCode::HorizonMismatch:
        case ErrorCode::InsufficientData:
        case ErrorCode::InsufficientHistory:
        case ErrorCode::InsufficientOverlap:
        case ErrorCode::EmptySeries:
        case ErrorCode::PopulationTooSmall:
        case ErrorCode::NoCrisisMonths:
        case ErrorCode::IoError:
            return ErrorCategory::Data;
        default:
            return ErrorCategory::Numerical;
    }
}

}  // namespace trendlab
