#pragma once

#include <stdexcept>
#include <string>

namespace trendlab {

// Broad failure families, used by the CLI to pick an exit code.
enum class ErrorCategory {
    Config,
    Data,
    Numerical,
};

enum class ErrorCode {
    // market_data
    MissingFile,
    MalformedRow,
    NonPositivePrice,
    DuplicateObservation,
    SeriesTooShort,
    InvalidSpec,
    // signals
    ZeroVolatility,
    HorizonMismatch,
    MisalignedDates,
    EmptyUniverse,
    // allocator
    NotPositiveDefinite,
    DimensionZero,
    OnesInKernel,
    NotSymmetric,
    DimensionTooLarge,
    ParameterOutOfRange,
    WOutOfRange,
    // dynamic_weights
    InsufficientData,
    DegenerateCovariance,
    PopulationTooSmall,
    EmptySeries,
    AlphaOutOfRange,
    InsufficientHistory,
    // decoder
    SingularInnovation,
    // backtest
    NoCrisisMonths,
    ZeroVol,
    ZeroDrawdown,
    NonPositiveInput,
    InsufficientOverlap,
    UnknownVariant,
    NegativeCost,
    // cli
    ConfigError,
    IoError,
};

const char* error_code_name(ErrorCode code);
ErrorCategory error_category(ErrorCode code);

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }
    ErrorCategory category() const noexcept { return error_category(code_); }

  private:
    ErrorCode code_;
};

}  // namespace trendlab
