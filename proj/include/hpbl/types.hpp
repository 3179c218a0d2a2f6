#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hpbl {

using Real = double;
using Complex = std::complex<double>;

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using CMatrix = Mat<Complex>;
using CVector = Vec<Complex>;
using RMatrix = Mat<Real>;
using RVector = Vec<Real>;

inline constexpr Complex I_unit{0.0, 1.0};

enum class ErrorKind {
    NonSquare,
    NumericalFailure,
    GlancingOrCharacteristic,
    DimensionMismatch,
    RankDeficient,
    NotInStableSubspace,
    SingularAd,
    ClustersNotSeparated,
    ContractionDiverged,
    SingularH,
    CharacteristicBoundary,
    TransversalityFailure,
    ZeroFrequency,
    NotEvolutionary,
    NotEvolutionaryAtPoint,
    GlancingLimitFailure,
    WrongShape,
    RankConditionFails,
    NonSymmetric,
    TraceNotInStableSubspace,
    AdNotPositive,
    NonlinearSolveDiverged,
    SolvabilityResidualLarge,
    CFLBlowup,
    SupportReachedOutflow,
    SyntaxError,
    UnknownIdentifier,
    DivisionGuard,
    SchemaError,
    InvariantViolation,
    InvalidArgument,
};

const char* error_kind_name(ErrorKind kind);

// True for errors caused by bad user input (model files, expressions, flags).
bool is_input_error(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(error_kind_name(kind)) + ": " + what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

// Laplace-Fourier frequency (tau, gamma, eta) with gamma >= 0.
struct Frequency {
    Real tau = 0.0;
    Real gamma = 0.0;
    RVector eta;

    Frequency() = default;
    Frequency(Real tau_, Real gamma_, RVector eta_ = RVector()) : tau(tau_), gamma(gamma_), eta(std::move(eta_)) {
        if (gamma < 0.0) throw Error(ErrorKind::InvalidArgument, "gamma must be nonnegative");
    }
    static Frequency d2(Real tau, Real gamma, Real eta1) {
        RVector e(1);
        e(0) = eta1;
        return Frequency(tau, gamma, e);
    }

    Real eta_norm() const { return eta.size() ? eta.norm() : 0.0; }
    Real rho() const { return std::sqrt(tau * tau + gamma * gamma + eta.squaredNorm()); }
    Complex s() const { return Complex(gamma, tau); }  // gamma + i tau
    Frequency scaled(Real k) const { return Frequency(k * tau, k * gamma, RVector(k * eta)); }
    Frequency hat() const {
        const Real r = rho();
        return r > 0.0 ? scaled(1.0 / r) : *this;
    }
};

}  // namespace hpbl
