#pragma once

#include <functional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "hpbl/cauchy.hpp"
#include "hpbl/solvers.hpp"

namespace hpbl {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

// ---- Evans scans ----

struct EvansRow {
    Frequency zeta;
    double absD = 0;       // |det H|
    double R = 0;          // sigma_min(H)
    double weighted = 0;   // R / (gamma + rho^2)
    double ratioAbs = 0;   // |det H / definitional|, 0 when the definitional value failed
};

struct EvansScan {
    std::string model;
    std::vector<EvansRow> rows;        // base grid
    double minWeighted = 0;            // base grid
    double minWeightedRefined = 0;     // refined grid
    double refinementRatio = 0;        // max(a / b, b / a)
    std::vector<double> gammaRay, gammaRayR;  // tau = eta = 0
    double gammaSlope = 0;
    double ratioBand = 0;              // max |ratio| / min |ratio| over both grids
    int failedPoints = 0;
};

struct EvansGrid {
    double rhoMax = 0.05;
    int radii = 6;           // rho = rhoMax 2^{-k}, k < radii
    int pointsPerDim = 16;
    std::vector<double> gammaLevels{0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0};  // normalized gamma
    int jobs = 1;
};

// Base grid as given; the refined grid halves the radius ratio and doubles the angular points over the same range.
EvansScan evans_scan(const HyperbolicParabolicModel& m, const EvansGrid& grid = {});

// Columns tau,gamma,eta1..,absD,R,weighted,ratioAbs.
std::string evans_csv(const EvansScan& s);

// ---- Viscous-limit studies (d = 1) ----

struct ConvergenceRow {
    double eps = 0, dx = 0, dt = 0;
    double errInf = 0;      // |u_eps - u_0|_inf
    double errL2 = 0;       // |u_eps - (u_0 + eps u_1)|_{L^2}
    double weightedC = 0;   // max over gammas of the weighted estimate ratio
};

struct ConvergenceStudy {
    std::string model;
    std::vector<ConvergenceRow> rows;
    double slopeInf = 0, slopeL2 = 0;
};

struct StudyGrid {
    double T = 1.0, X = 6.0;
    double dxPerEps = 0.25;  // dx = dxPerEps eps, dt = dx
    std::vector<double> gammas{2.0, 4.0, 8.0, 16.0};
    int jobs = 1;
};

RVector forcing_t3ex(double t, double x);

// Viscous runs against the outer expansion on the same grid (linear pipeline for constant coefficients,
// quasilinear cascade otherwise). Only the outer terms enter u_0 + eps u_1.
ConvergenceStudy viscous_limit_study(const HyperbolicParabolicModel& m, const std::vector<double>& eps,
                                     const FieldFn& f, const StudyGrid& grid = {});

std::string convergence_csv(const ConvergenceStudy& s);

struct FornetRow {
    double eps = 0;
    double errL2 = 0;  // |v^eps - v^0|_{L^2}
};

struct FornetStudy {
    double alpha = 1, beta = 2;
    std::vector<FornetRow> rows;
    double slope = 0;
    bool strictlyDecreasing = false;
};

// h = (b(x), b(-x)) with b(x) = (1 - (x - 0.3)^2)^4 on |x - 0.3| < 1, f = 0, T = 1, X = 5.
FornetStudy fornet_study(double alpha, double beta, const std::vector<double>& eps, int jobs = 1);

std::string fornet_csv(const FornetStudy& s);

struct WeightedStudy {
    double eps = 0;
    std::vector<double> ratiosBase, ratiosRefined;  // per gamma
    double C = 0, Crefined = 0, refinement = 0;
};

// Viscous scalar run at dx = dxPerEps eps and at half that spacing.
WeightedStudy weighted_estimate_study(const HyperbolicParabolicModel& m, double eps, const FieldFn& f,
                                      const StudyGrid& grid = {});

struct CascadeStudy {
    std::vector<double> hs;
    std::vector<std::vector<double>> traces;        // [j][h] max |d_x u_j(., 0)|
    std::vector<double> traceOrders;                // fitted order per j
    std::vector<double> eps;
    std::vector<std::vector<double>> residuals;     // [M][eps]
    std::vector<double> residualSlopes;             // per M
};

// Quasilinear cascade up to order 2; traces on the grids hs, residuals on the finest grid.
CascadeStudy cascade_study(const HyperbolicParabolicModel& m, const FieldFn& f, const std::vector<double>& hs,
                           const std::vector<double>& eps, double T = 1.0, double X = 6.0);

// ---- Acceptance ----

struct CriterionResult {
    int id = 0;
    std::string title;
    bool pass = false;
    double seconds = 0;
    std::string summary;  // one line of the decisive numbers
    Json metrics = Json::object();
};

struct AcceptOptions {
    std::set<int> only;  // empty: all
    unsigned long long seed = 42;
    int jobs = 1;
};

// Accepts criterion numbers and group names (stability, cauchy, evans, resolvent, converge, expand, properties),
// comma separated. Throws InvalidArgument on unknown names.
std::set<int> parse_criteria(const std::string& list);

std::vector<CriterionResult> run_acceptance(const AcceptOptions& opt,
                                            const std::function<void(const CriterionResult&)>& onResult = {});

// "criterion  N PASS|FAIL  title  (seconds)  summary"
std::string criterion_line(const CriterionResult& r);

Json acceptance_json(const std::vector<CriterionResult>& results);

Json frequency_json(const Frequency& z);

}  // namespace hpbl
