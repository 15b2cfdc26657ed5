#ifndef AMPLITUDER_ERRORS_HPP
#define AMPLITUDER_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ampl {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define AMPLITUDER_DEFINE_ERROR(Name)                                  \
    struct Name : Error {                                              \
        explicit Name(const std::string& msg) : Error(msg) {}          \
    }

AMPLITUDER_DEFINE_ERROR(DimensionMismatch);
AMPLITUDER_DEFINE_ERROR(ValidationError);
AMPLITUDER_DEFINE_ERROR(NonDiagonalizable);
AMPLITUDER_DEFINE_ERROR(BranchTrackingFailure);
AMPLITUDER_DEFINE_ERROR(DegenerateEigenvalue);
AMPLITUDER_DEFINE_ERROR(EmptyCriticalSet);
AMPLITUDER_DEFINE_ERROR(OrderExceeded);
AMPLITUDER_DEFINE_ERROR(EllipticityFailure);
AMPLITUDER_DEFINE_ERROR(CarrierNotPeriodic);
AMPLITUDER_DEFINE_ERROR(GridMismatch);
AMPLITUDER_DEFINE_ERROR(PropagatorOverflow);
AMPLITUDER_DEFINE_ERROR(SolverError);
AMPLITUDER_DEFINE_ERROR(NewtonDiverged);
AMPLITUDER_DEFINE_ERROR(SingularJacobian);
AMPLITUDER_DEFINE_ERROR(DegenerateFit);
AMPLITUDER_DEFINE_ERROR(PreconditionFailure);

#undef AMPLITUDER_DEFINE_ERROR

// Parse failures carry the offending line number (0 = not line specific).
struct ParseError : Error {
    int line;
    ParseError(int line_, const std::string& msg)
        : Error("line " + std::to_string(line_) + ": " + msg), line(line_) {}
    explicit ParseError(const std::string& msg) : Error(msg), line(0) {}
};

} // namespace ampl

#endif
