#pragma once

#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hpbl/lopatinski.hpp"

namespace hpbl {

// First-order system A0coef d_t w + sum_j Ajcoefs[j] d_{x_j} w on the boundary.
struct TangentialSystem {
    CMatrix A0coef;
    std::vector<CMatrix> Ajcoefs;  // d - 1 tangential coefficients
    std::optional<Frequency> frozenAt;
    bool enlarged = false;
};

// Plain form: A0coef = (Gamma_1; -Gamma~_2 A_d^{-1}), Ajcoefs = (0; -Gamma~_2 A_d^{-1} A_j).
TangentialSystem tangential_system(const HyperbolicParabolicModel& m, const ReducedBC& r);

// Orthonormal rows annihilating E_+(A_d^{-1}(gamma + i tau + i sum eta_j A_j)) at the unit frequency zeta0.
CMatrix gamma0_rows(const HyperbolicParabolicModel& m, const Frequency& zeta0);

// Enlarged form frozen at zeta0: A0coef = (Gamma_0(zeta0); Gamma_1; Gamma~_2 A_d^{-1}),
// Ajcoefs = (0; 0; Gamma~_2 A_d^{-1} A_j).
TangentialSystem enlarged_system(const HyperbolicParabolicModel& m, const ReducedBC& r, const Frequency& zeta0);

// A~_j = A0coef^{-1} Ajcoefs of the enlarged system; throws NotEvolutionaryAtPoint if A0coef is singular.
std::vector<CMatrix> enlarged_frozen_generators(const HyperbolicParabolicModel& m, const ReducedBC& r,
                                                const Frequency& zeta0);

struct EvolutionaryResult {
    bool evolutionary = false;
    double condition = std::numeric_limits<double>::infinity();
};

// Invertibility of A0coef: square and sigma_min > tol * sigma_max.
EvolutionaryResult evolutionary_check(const TangentialSystem& ts, double tol = 1e-10);

struct CauchyWitness {
    std::string flag;
    Frequency zeta0;
    RVector eta;
    double value = 0;
    std::string note;
};

struct CauchyDiagnostics {
    bool evolutionary = false;
    bool weaklyHyperbolic = false;
    std::vector<std::pair<RVector, CVector>> rootsByEta;
    bool semisimple = true;
    bool constantMultiplicity = true;
    bool pureImaginary = true;
    std::vector<int> multiplicityPattern;
    double resolventConstant = std::numeric_limits<double>::quiet_NaN();
    bool resolventStable = false;
    std::vector<std::pair<RVector, Complex>> sharpScalar;
    std::vector<CauchyWitness> witnesses;
    int samples = 0;
    int failedPoints = 0;
};

// Unit vectors eta in R^{d-1}: {} for d = 1, {1, -1} for d = 2, `points` per angle otherwise.
std::vector<RVector> eta_sphere(int d, int points);

// Roots tau of det(A0coef tau + sum_j Ajcoefs_j eta_j) = 0 per eta; real iff max |Im| <= tol * scale.
// Throws NotEvolutionary when A0coef is not invertible.
CauchyDiagnostics weak_hyperbolicity_check(const TangentialSystem& ts, const std::vector<RVector>& etaGrid,
                                           double tol = 1e-8);

struct CauchyScanOptions {
    int frozenPoints = 32;  // angular points per level of the frozen-frequency grid
    int etaPoints = 32;
    bool refine = true;     // re-check on the doubled grid and search for eigenvalue coalescence
    double minEta0 = 0.0;   // frozen points with |eta0| < minEta0 are skipped
    double radius = 1e-6;   // eigenvalue clustering radius (relative)
    double imagTol = 1e-8;  // |Re lambda| tolerance (relative)
    int jobs = 1;
};

// Unit frozen frequencies: levels gamma = sin(k pi / (2K)), K = max(2, P / 8), each sampled with P angular
// points, plus the pole (0, 1, 0).
std::vector<Frequency> frozen_grid(int d, int P);

// Eigenvalues of A(eta; zeta0) = sum_j i eta_j A~_j(zeta0) over frozen points and eta directions.
CauchyDiagnostics semisimple_constmult_scan(const HyperbolicParabolicModel& m, const ReducedBC& r,
                                            const CauchyScanOptions& opt = {});

struct ResolventScan {
    double C = std::numeric_limits<double>::quiet_NaN();
    double Crefined = std::numeric_limits<double>::quiet_NaN();
    double ratio = std::numeric_limits<double>::quiet_NaN();
    bool pass = false;
    int samples = 0;
    Frequency argmax;
    int failedPoints = 0;
};

// Diagonal samples with gamma > 0: levels gamma = 10^{-k/q}, k = 0..3q (q levels per decade) and
// P angular points per level.
std::vector<Frequency> resolvent_samples(int d, int levelsPerDecade, int decades, int P);

// gamma |(gamma + i tau + sum_j i eta_j A~_j(zeta))^{-1}| at unit zeta. The base grid has 2 levels per decade
// down to 1e-3 and P angular points; the refined grid doubles both and extends to 1e-4.
// PASS iff both maxima are finite and Crefined / C <= 1.5.
ResolventScan resolvent_norm_scan(const HyperbolicParabolicModel& m, const ReducedBC& r, int P = 32, int jobs = 1);

// Same scan restricted to the lower-right block gamma + i tau + sum_j i eta_j alpha_j, alpha_j the trailing
// rank(Gamma~_2) block of A_j A_0^{-1}; combined with the check det(sum_j i eta_j alpha_j(0, 0, eta)) != 0.
struct ReducedBlockScan {
    ResolventScan resolvent;
    double minDetAtZero = 0;
    bool pass = false;
};
ReducedBlockScan reduced_block_scan(const HyperbolicParabolicModel& m, const ReducedBC& r, int P = 32, int jobs = 1);

struct SharpScalarResult {
    std::vector<std::pair<RVector, Complex>> values;  // eta -> sum_j i eta_j alpha_j(0, 0, eta)
    double minAbs = std::numeric_limits<double>::infinity();
    bool pass = true;
};

// Requires exactly one reduced Neumann row (WrongShape otherwise). PASS iff min |value| > tol.
SharpScalarResult sharp_scalar_condition(const HyperbolicParabolicModel& m, const ReducedBC& r,
                                         const std::vector<RVector>& etaGrid, double tol = 1e-8);

// (gamma + i tau)^{rank Gamma~_2 - N} det(gamma + i tau + sum_j i eta_j A~_j(zeta)) at the normalized zeta.
// Throws RankConditionFails if (Gamma_1; Gamma~_2 A_d^{-1}(gamma + i tau + i sum eta_j A_j)) is rank deficient.
Complex lopver_quantity(const HyperbolicParabolicModel& m, const ReducedBC& r, const Frequency& zeta);

// Explicit lower block-triangular inverse of [[s I, 0], [b, s + a]] with scalar a (single reduced Neumann row).
CMatrix block_resolvent_inverse(Complex s, const CVector& b, Complex a);

// Runs all method-two diagnostics with default grids.
CauchyDiagnostics cauchy_diagnostics(const HyperbolicParabolicModel& m, const ReducedBC& r,
                                     const CauchyScanOptions& opt = {});

}  // namespace hpbl
