#pragma once

#include <stdexcept>
#include <string>

namespace orbitctl {

/// Broad failure classes; the CLI maps them onto exit codes.
enum class ErrorClass { config, math_domain, incomplete_census, io };

class Error : public std::runtime_error {
public:
    Error(std::string kind, ErrorClass cls, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)), class_(cls) {}

    const std::string& kind() const noexcept { return kind_; }
    ErrorClass error_class() const noexcept { return class_; }

private:
    std::string kind_;
    ErrorClass class_;
};

#define ORBITCTL_DEFINE_ERROR(Name, cls)                                   \
    class Name : public Error {                                            \
    public:                                                                \
        explicit Name(const std::string& what) : Error(#Name, cls, what) {} \
    };

// map-core
ORBITCTL_DEFINE_ERROR(InvalidMapError, ErrorClass::config)
ORBITCTL_DEFINE_ERROR(PoleError, ErrorClass::math_domain)
ORBITCTL_DEFINE_ERROR(CriticalPointError, ErrorClass::math_domain)
ORBITCTL_DEFINE_ERROR(NotPeriodicError, ErrorClass::math_domain)
ORBITCTL_DEFINE_ERROR(SuperattractingError, ErrorClass::math_domain)
ORBITCTL_DEFINE_ERROR(NotHyperbolicError, ErrorClass::math_domain)

// orbit-enum
ORBITCTL_DEFINE_ERROR(BranchCutError, ErrorClass::math_domain)
ORBITCTL_DEFINE_ERROR(DegreeOverflowError, ErrorClass::math_domain)
ORBITCTL_DEFINE_ERROR(NonConvergenceError, ErrorClass::math_domain)
ORBITCTL_DEFINE_ERROR(OrbitMatchingError, ErrorClass::math_domain)
ORBITCTL_DEFINE_ERROR(IncompleteCensusError, ErrorClass::incomplete_census)
ORBITCTL_DEFINE_ERROR(VersionMismatchError, ErrorClass::io)
ORBITCTL_DEFINE_ERROR(FingerprintMismatchError, ErrorClass::io)

// thermo
ORBITCTL_DEFINE_ERROR(DegenerateError, ErrorClass::math_domain)
ORBITCTL_DEFINE_ERROR(AlphaOutOfRangeError, ErrorClass::math_domain)
ORBITCTL_DEFINE_ERROR(OverflowGuardError, ErrorClass::math_domain)
ORBITCTL_DEFINE_ERROR(BracketError, ErrorClass::math_domain)

// transfer-op
ORBITCTL_DEFINE_ERROR(CriticalValueError, ErrorClass::math_domain)
ORBITCTL_DEFINE_ERROR(NormalizationError, ErrorClass::math_domain)

// counting
ORBITCTL_DEFINE_ERROR(ScheduleError, ErrorClass::math_domain)
ORBITCTL_DEFINE_ERROR(TruncationError, ErrorClass::incomplete_census)
ORBITCTL_DEFINE_ERROR(DomainError, ErrorClass::math_domain)

// cli-io
ORBITCTL_DEFINE_ERROR(ConfigError, ErrorClass::config)
ORBITCTL_DEFINE_ERROR(IoError, ErrorClass::io)

#undef ORBITCTL_DEFINE_ERROR

} // namespace orbitctl
