#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace frontlab {

enum class ErrorKind {
    InvalidModel,
    InvalidArgument,
    NoConvergence,
    NotPinched,
    ComplexDoubleRoot,
    NegativeAlpha,
    TrackAmbiguity,
    NoInteriorMinimum,
    NewtonDiverged,
    DegenerateFit,
    GridTooCoarse,
    EigensolverFailure,
    AdjointKernelNotOneDimensional,
    BorderedSingular,
    NoSignChange,
    SingularSystem,
    NoContraction,
    LinearSolveFailure,
    BlowUp,
    NoCrossing,
    IllConditioned,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

    /// Input problems (bad model, bad arguments) as opposed to numerical failures.
    [[nodiscard]] bool is_input_error() const noexcept {
        return kind_ == ErrorKind::InvalidModel || kind_ == ErrorKind::InvalidArgument;
    }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

inline void require(bool condition, const std::string& message) {
    if (!condition) fail(ErrorKind::InvalidArgument, message);
}

}  // namespace frontlab
