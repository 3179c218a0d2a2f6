#pragma once

#include <functional>
#include <vector>

#include "hpbl/expansion.hpp"
#include "hpbl/symbols.hpp"

namespace hpbl {

enum class Scheme { BackwardEulerUpwind, CrankNicolsonCentered };
const char* scheme_name(Scheme s);

struct ViscousOptions {
    Scheme scheme = Scheme::CrankNicolsonCentered;
    double newtonTol = 1e-10;
    int maxNewton = 50;
    double layerResolution = 0.25;  // requires dx <= layerResolution * eps
};

struct ViscousRun {
    HyperbolicParabolicModel model;
    double epsilon = 0;
    Scheme scheme = Scheme::CrankNicolsonCentered;
    DiscreteField solution;
    int newtonIterations = 0;
};

// u_t + A(u) u_x - eps u_xx = f on the grid of f, with Gamma_1 u = 0 and Gamma_2 u_x = 0 at x = 0 through a
// ghost node, and u_{nx-1} = 2 u_{nx-2} - u_{nx-3} at x = X. `initial` (one time row) defaults to zero.
// Throws CFLBlowup (Newton failure or runaway values) and SupportReachedOutflow (mixed-sign A_d and
// |u| > 1e-8 max |u| on the last 5 cells).
ViscousRun viscous_solve_1d(const HyperbolicParabolicModel& m, double eps, const DiscreteField& f,
                            const ViscousOptions& opt = {}, const DiscreteField* initial = nullptr);

using FieldFn = std::function<RVector(double t, double x)>;
using ProfileFn = std::function<RVector(double x)>;

struct FornetRun {
    ViscousRun viscous;
    DiscreteField limit;        // v^0 on the same grid
    DiscreteField boundaryTrace;  // v^0(t, 0) from the boundary Cauchy problem
};

// Transmission problem v_t + diag(beta, alpha) v_x - eps v_xx = f, v1 = v2 and d_x(v1 + v2) = 0 at x = 0,
// v(0, x) = h(x). The limit solves the 2x2 boundary system for the trace, then characteristics.
FornetRun fornet_solve(double alpha, double beta, double eps, const FieldFn& f, const ProfileFn& h, double T, double X,
                       double dx, double dt);

// Order-zero outer solution of the totally incoming Neumann problem.
DiscreteField hyperbolic_solve_incoming(const HyperbolicParabolicModel& m, const DiscreteField& f);

// Sum of c_k e^{-kappa_k x} on [0, inf), Re kappa_k > 0.
struct ExpProfile {
    std::vector<Complex> kappa;
    std::vector<CVector> coef;

    CVector at(double x, int N) const;
    double l2_squared() const;
};

struct ResolventSolve {
    Frequency zeta;
    CMatrix H, P;
    ExpProfile FH, FP;
    CVector g;
    CVector homogeneous;  // u_H = e^{Hx} homogeneous + sum e^{-kappa x} wH
    std::vector<CVector> wH, wP;
    CVector uH0, uP0;
    double uH2 = 0, uP2 = 0;  // squared L^2[0, inf) norms
    double lhs = 0, rhs = 0, ratio = 0;

    CVector uH(double x) const;
    CVector uP(double x) const;
};

// Exact decaying solution of d_x U = diag(H, P) U + F, H u_H(0) + u_P(0) = g, with the blocks from
// block_diagonalize; lhs / rhs are the two sides of the low-frequency resolvent estimate
// (gamma + rho^2)^3 |u_H|^2 + |u_P|^2 + (gamma + rho^2)^2 |u_H(0)|^2 + |u_P(0)|^2 versus
// |F_P|^2 + (gamma + rho^2) |F_H|^2 + |g|^2.
ResolventSolve resolvent_ode_solve(const HyperbolicParabolicModel& m, const Frequency& zeta, const ExpProfile& FH,
                                   const ExpProfile& FP, const CVector& g);

// X = int_0^inf e^{H^* x} Q e^{H x} dx for stable H.
CMatrix lyapunov_integral(const CMatrix& H, const CMatrix& Q);

struct ResolventScanResult {
    double maxRatio = 0;
    double maxRatioDoubled = 0;
    double growth = 0;
    bool pass = false;
    int samples = 0;
};

// Random zeta with rho <= rhoMax (log-uniform radius down to rhoMax * 1e-3), random exponential forcing and
// boundary data; compares the maximal ratio over n and 2n samples (the first n shared). PASS iff finite and
// growth <= 1.5.
ResolventScanResult resolvent_estimate_scan(const HyperbolicParabolicModel& m, int n = 100, double rhoMax = 0.05,
                                            unsigned long long seed = 7);

// |u|_gamma / (|f|_gamma / gamma + |d_x f|_gamma / gamma^2).
double weighted_estimate_ratio(const DiscreteField& u, const DiscreteField& f, double gamma);

// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace hpbl
