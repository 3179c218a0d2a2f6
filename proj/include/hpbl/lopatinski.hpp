#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hpbl/model.hpp"
#include "hpbl/spectral.hpp"

namespace hpbl {

enum class BoundaryCase { CaseI, CaseII, BoundaryCase };
const char* boundary_case_name(BoundaryCase c);

struct CaseClassification {
    int D = 0;   // rank Gamma_1
    int Nn = 0;  // rank Gamma_2
    int I = 0;   // dim E_+(A_d)
    int O = 0;   // dim E_-(A_d)
    BoundaryCase kind = BoundaryCase::CaseII;
};

struct ReducedBC {
    CaseClassification cls;
    std::optional<RMatrix> gammaTilde1;  // I x N, case (i)
    std::optional<RMatrix> gammaTilde2;  // (Nn - O) x N, case (ii) and boundary case
    RMatrix M;                           // annihilator of Gamma_2 E_-(A_d), orthonormal rows
    RMatrix K;                           // annihilator of Gamma_1 X, orthonormal rows
    RMatrix X;                           // A_d^{-1} ker(Gamma_2 | E_-), orthonormal columns (case i)

    // Dirichlet rows of the reduced hyperbolic problem (Gamma_1 or K Gamma_1).
    RMatrix dirichlet_rows(const HyperbolicParabolicModel& m) const;
    // Neumann rows Gamma~_2 (possibly 0 x N).
    RMatrix neumann_rows(int N) const;
};

// Real orthonormal bases of the stable / unstable subspaces of a real matrix.
RMatrix real_stable_basis(const RMatrix& A);
RMatrix real_unstable_basis(const RMatrix& A);

CaseClassification classify_case(const HyperbolicParabolicModel& m);
ReducedBC reduce_case_ii(const HyperbolicParabolicModel& m);
ReducedBC reduce_case_i(const HyperbolicParabolicModel& m);
// Dispatches on the classification; the boundary case goes through reduce_case_ii.
ReducedBC reduce_boundary_conditions(const HyperbolicParabolicModel& m);

// -(i tau + gamma + |eta|)^{-1} Gamma~_2 A_d^{-1}(gamma + i tau + i sum eta_j A_j).
CMatrix rescaled_boundary_symbol(const HyperbolicParabolicModel& m, const ReducedBC& r, const Frequency& z);

// stack(Dirichlet rows, rescaled Neumann rows).
CMatrix lopatinski_boundary_matrix(const HyperbolicParabolicModel& m, const ReducedBC& r, const Frequency& z);

struct PlusSpace {
    CMatrix basis;       // orthonormal basis of E_+(A_d^{-1}(gamma + i tau + i sum eta_j A_j))
    bool limit = false;  // obtained as the gamma -> 0 limit
};

// E_+ of the hyperbolic symbol. On the imaginary axis the orthogonal projector is extrapolated from
// gamma in {1e-2, 1e-3, 1e-4}; throws GlancingLimitFailure when that is not possible.
PlusSpace plus_space(const HyperbolicParabolicModel& m, const Frequency& z);

struct LopatinskiScanRecord {
    Frequency zeta;
    Complex detUniform{0.0, 0.0};
    double proxy = 0;  // |det(B E_+)| / prod |rows of B|, continuous in zeta
    double wellCond = 0;
    bool glancingFlag = false;
    int kernelDim = 0;
    std::string error;  // empty when the point was evaluated
};

LopatinskiScanRecord uniform_lop_det(const HyperbolicParabolicModel& m, const ReducedBC& r, const Frequency& z);

enum class LopVerdict { UNIFORM, WEAK_ONLY, FAILS_WEAK };
const char* lop_verdict_name(LopVerdict v);

struct HemisphereGrid {
    int pointsPerDim = 64;
    std::vector<double> gammaLevels{0.0, 1e-3, 1e-2, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0};
    double threshold = 1e-3;
    int jobs = 1;
};

// Unit-sphere frequencies with normalized gamma equal to the given level.
std::vector<Frequency> hemisphere_level(int d, double gamma, int pointsPerDim);

struct LevelMinimum {
    double gamma = 0;
    double minAbsDet = 0;
    Frequency argmin;
};

struct StabilityReport {
    std::string model;
    CaseClassification cls;
    std::vector<LopatinskiScanRecord> records;
    std::vector<LevelMinimum> levels;
    double minAbsDet = 1;
    Frequency argmin;
    double minAbsDetPositiveGamma = 1;
    double maxWellCond = 0;
    std::vector<Frequency> glancing;
    LopVerdict verdict = LopVerdict::UNIFORM;
    std::optional<Frequency> weakFailureWitness;
    double weakFailureValue = 1;
    bool totallyIncoming = false;
    bool incomingImplicationApplied = false;
    double threshold = 1e-3;
    int failedPoints = 0;
};

StabilityReport scan_uniform(const HyperbolicParabolicModel& m, const ReducedBC& r, const HemisphereGrid& grid = {});

// Searches gamma = 1, (tau, eta) free, for zeros of the continuous Lopatinski proxy, starting from `starts`.
// Returns the best normalized frequency and its proxy value.
std::pair<Frequency, double> weak_failure_search(const HyperbolicParabolicModel& m, const ReducedBC& r,
                                                 const std::vector<Frequency>& starts);

struct GlancingPoint {
    double tau = 0;
    RVector eta;
    double xi = 0;
    int branch = 0;
};

// Points where an eigenvalue lambda_j(xi, eta) of sum eta_j A_j + xi A_d is stationary in xi, reported with
// tau = -lambda (so that tau + sum eta_j A_j + xi A_d is singular).
std::vector<GlancingPoint> glancing_detector(const HyperbolicParabolicModel& m, const RVector& eta);

std::string stability_csv(const StabilityReport& rep);

}  // namespace hpbl
