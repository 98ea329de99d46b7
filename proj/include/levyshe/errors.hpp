#pragma once

#include <stdexcept>
#include <string>

namespace levyshe {

// Failure classes surfaced across the library. The CLI maps these to exit
// codes, so keep the set small and stable.
enum class ErrorCode {
    ConfigInvalid,      // unparseable or inconsistent experiment config
    ConditionViolated,  // a required integrability condition fails
    Divergent,          // a requested moment/integral is infinite
    InfiniteIntensity,  // sampling requested with infinite atom intensity
    SupInfinite,        // local suprema are a.s. infinite for this measure
    Unclassified,       // measure fits no asymptotic regime
    BracketViolation,   // theorem-backed bound violated (internal bug)
    NumericFailure,     // quadrature disagreement / loss of precision
};

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const { return code_; }

  private:
    ErrorCode code_;
};

inline const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::ConfigInvalid: return "CONFIG_INVALID";
        case ErrorCode::ConditionViolated: return "CONDITION_VIOLATED";
        case ErrorCode::Divergent: return "DIVERGENT";
        case ErrorCode::InfiniteIntensity: return "INFINITE_INTENSITY";
        case ErrorCode::SupInfinite: return "SUP_INFINITE";
        case ErrorCode::Unclassified: return "UNCLASSIFIED";
        case ErrorCode::BracketViolation: return "BRACKET_VIOLATION";
        case ErrorCode::NumericFailure: return "NUMERIC_FAILURE";
    }
    return "UNKNOWN";
}

}  // namespace levyshe
