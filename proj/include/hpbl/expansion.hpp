#pragma once

#include <vector>

#include "hpbl/field.hpp"
#include "hpbl/lopatinski.hpp"

namespace hpbl {

// Boundary layer u*(t, z) = sum_k z^k e^{z A_d} amplitudes[k](t), amplitudes in E_-(A_d).
struct LayerDescriptor {
    std::vector<DiscreteField> amplitudes;  // boundary fields (nx = 1)
    RMatrix decayMatrix;                    // A_d at the boundary

    const DiscreteField& traceAmplitude() const { return amplitudes.front(); }
    bool zero(double tol = 0.0) const;
    RVector evaluate(int n, double z) const;
    // d/dz of the profile at (t_n, z).
    RVector evaluate_dz(int n, double z) const;
};

// Zero layer on the boundary grid of `like`.
LayerDescriptor zero_layer(const RMatrix& Ad, const DiscreteField& like);

// max_n |u*(t_n, z)| <= e^{-gap z / 2} max_n |u*(t_n, 0)| + tol at every z in zs.
bool layer_decay_ok(const LayerDescriptor& layer, const std::vector<double>& zs, double tol = 1e-14);

struct ExpansionProfile {
    int order = 0;
    std::vector<DiscreteField> outerTerms;   // u_0, u_1, ...
    std::vector<LayerDescriptor> layerTerms; // u*_0, u*_1, ...
};

struct FilteredOuter {
    DiscreteField v;   // H u_0
    DiscreteField u0;
};

// Linear constant-coefficient outer solve in d = 1, where H = A_d^{-1} d_t:
// v_t + A_d v_x = d_t(A_d^{-1} f) with pi_+ v = pi_+ A_d^{-1} f at x = 0 and homogeneous data for the
// leftgoing characteristics at x = X, by the box scheme; then u_0 from d_t u_0 = A_d v (trapezoidal rule).
FilteredOuter solve_filtered_outer(const HyperbolicParabolicModel& m, const DiscreteField& f);

// Box residual cell_dt(u) + A_d cell_dx(u) - cell_average(f).
DiscreteField box_residual(const HyperbolicParabolicModel& m, const DiscreteField& u, const DiscreteField& f);

// u*_1 = -e^{z A_d} A_d^{-1} d_x u_0(t, 0); throws TraceNotInStableSubspace when
// max |pi_+ d_x u_0(., 0)| > 10 h^2 S + 1e-8, h = max(dt, dx), S the largest sup norm among the trace and
// the first three x-derivatives of u_0.
LayerDescriptor layer_profile_first_order(const HyperbolicParabolicModel& m, const DiscreteField& u0);

struct NextOrder {
    DiscreteField u1;       // outer term
    LayerDescriptor u2star; // z e^{zA} A^{-1} a' + e^{zA} c
};

// Order-eps terms: L u_1 = u_0,xx through the filtered solve and the decaying solution of
// A u2*_z - u2*_zz = -d_t u1* with d_x u_1(., 0) + u2*_z(., 0) = 0.
NextOrder next_order_terms(const HyperbolicParabolicModel& m, const DiscreteField& u0, const LayerDescriptor& u1star);

// u_0, u_1 and the layers u*_0 = 0, u*_1, u*_2 of the linear pure-Neumann problem.
ExpansionProfile linear_neumann_expansion(const HyperbolicParabolicModel& m, const DiscreteField& f);

struct QuasilinearOptions {
    double newtonTol = 1e-10;
    int maxNewton = 50;
};

// Totally incoming cascade in d = 1 up to order M <= 2. Each term solves its boundary ODE in t
// (d_x u_j = 0 at x = 0) and then the box scheme marching in x with that Dirichlet data.
// Throws AdNotPositive or NonlinearSolveDiverged.
ExpansionProfile quasilinear_incoming_expansion(const HyperbolicParabolicModel& m, const DiscreteField& f, int M,
                                                const QuasilinearOptions& opt = {});

// Sum_j eps^j u_j of the outer terms up to `order` (all terms when order < 0).
DiscreteField outer_sum(const ExpansionProfile& p, double eps, int order = -1);

// Cell residual E_h(u) - f_h of the viscous problem, using the same box operators and nodal Laplacian
// as the cascade: cell_dt u + A(avg u) cell_dx u - eps avg(u_xx) - avg(f).
DiscreteField viscous_cell_residual(const HyperbolicParabolicModel& m, const DiscreteField& u, const DiscreteField& f,
                                    double eps);

struct MixedReduction {
    BoundaryCase kind = BoundaryCase::CaseII;
    ReducedBC reduced;
    RMatrix dirichletRows;     // rows acting on the outer trace u_0(0)
    RMatrix dirichletDataMap;  // reduced Dirichlet data = map * g1
    RMatrix neumannRows;       // rows acting on d_x u_0(0)
    RMatrix neumannDataMap;    // reduced Neumann data = map * g2
    RMatrix layerBasis;        // E_-(A_d) (case ii) or X (case i), orthonormal columns
};

struct LayerAmplitude {
    RVector amplitude;    // d_z u*_1(0) in case (ii), u*_0(0) in case (i)
    RVector layerValue;   // u*_1(0) = A_d^{-1} amplitude in case (ii); u*_0(0) in case (i)
    double residual = 0;  // least-squares residual of the solvability condition
};

MixedReduction order_zero_mixed_reduction(const HyperbolicParabolicModel& m);

// Case (ii): a in E_- with Gamma_2 (d_x u_0(0) + a) = g2. Case (i): w in X with Gamma_1 (u_0(0) + w) = g1.
// `outerTrace` is d_x u_0(0) in case (ii) and u_0(0) in case (i). Throws SolvabilityResidualLarge when the
// residual exceeds tol (1 + |g|).
LayerAmplitude mixed_layer_amplitude(const MixedReduction& r, const HyperbolicParabolicModel& m, const RVector& g,
                                     const RVector& outerTrace, double tol = 1e-8);

}  // namespace hpbl
