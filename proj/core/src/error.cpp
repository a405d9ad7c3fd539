#include "frontlab/error.hpp"

namespace frontlab {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidModel: return "InvalidModel";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::NotPinched: return "NotPinched";
        case ErrorKind::ComplexDoubleRoot: return "ComplexDoubleRoot";
        case ErrorKind::NegativeAlpha: return "NegativeAlpha";
        case ErrorKind::TrackAmbiguity: return "TrackAmbiguity";
        case ErrorKind::NoInteriorMinimum: return "NoInteriorMinimum";
        case ErrorKind::NewtonDiverged: return "NewtonDiverged";
        case ErrorKind::DegenerateFit: return "DegenerateFit";
        case ErrorKind::GridTooCoarse: return "GridTooCoarse";
        case ErrorKind::EigensolverFailure: return "EigensolverFailure";
        case ErrorKind::AdjointKernelNotOneDimensional: return "AdjointKernelNotOneDimensional";
        case ErrorKind::BorderedSingular: return "BorderedSingular";
        case ErrorKind::NoSignChange: return "NoSignChange";
        case ErrorKind::SingularSystem: return "SingularSystem";
        case ErrorKind::NoContraction: return "NoContraction";
        case ErrorKind::LinearSolveFailure: return "LinearSolveFailure";
        case ErrorKind::BlowUp: return "BlowUp";
        case ErrorKind::NoCrossing: return "NoCrossing";
        case ErrorKind::IllConditioned: return "IllConditioned";
    }
    return "Unknown";
}

}  // namespace frontlab
