#pragma once

#include <stdexcept>
#include <string>

namespace eapm {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define EAPM_DEFINE_ERROR(Name)                                                \
    struct Name : Error {                                                      \
        explicit Name(const std::string& msg) : Error(#Name ": " + msg) {}     \
    }

EAPM_DEFINE_ERROR(NonHermitian);
EAPM_DEFINE_ERROR(NonSquare);
EAPM_DEFINE_ERROR(DimMismatch);
EAPM_DEFINE_ERROR(IncompleteChannel);
EAPM_DEFINE_ERROR(InvalidEnergy);
EAPM_DEFINE_ERROR(EnergyTooHigh);
EAPM_DEFINE_ERROR(ShapeMismatch);
EAPM_DEFINE_ERROR(InvalidParams);
EAPM_DEFINE_ERROR(InvalidInput);
EAPM_DEFINE_ERROR(Infeasible);
EAPM_DEFINE_ERROR(NumericalFailure);
EAPM_DEFINE_ERROR(SamplingExhausted);
EAPM_DEFINE_ERROR(InfeasibleObservation);
EAPM_DEFINE_ERROR(OptimizationFailure);
EAPM_DEFINE_ERROR(IoError);
EAPM_DEFINE_ERROR(VerificationFailed);

#undef EAPM_DEFINE_ERROR

}  // namespace eapm
