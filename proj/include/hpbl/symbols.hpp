#pragma once

#include "hpbl/model.hpp"
#include "hpbl/spectral.hpp"

namespace hpbl {

// s I + i sum_j eta_j A_j at baseState, s = gamma + i tau.
CMatrix tangential_symbol(const HyperbolicParabolicModel& m, const Frequency& z);

// -A_d^{-1}(gamma + i tau + i sum_j eta_j A_j); homogeneous of degree one.
CMatrix hyperbolic_boundary_symbol(const HyperbolicParabolicModel& m, const Frequency& z);

// First-order companion symbol of the viscous problem with unit viscosity,
// [[0, I], [s + i sum eta_j A_j + |eta|^2, A_d]].
CMatrix parabolic_symbol_G(const HyperbolicParabolicModel& m, const Frequency& z);

// Default low-frequency radius 0.1 sigma_min(A_d).
double default_small_radius(const HyperbolicParabolicModel& m);

struct BlockDiagonalization {
    CMatrix H;  // N x N, spectrum tends to 0 with rho
    CMatrix P;  // N x N, tends to A_d
    CMatrix S;  // [[I, S12], [H, I]]
    double residual = 0;
};

// Splits G into the N eigenvalues of smallest modulus (block H) and the rest (block P).
BlockDiagonalization block_diagonalize(const HyperbolicParabolicModel& m, const Frequency& z);

struct ConjugatorResult {
    CMatrix T, tau1, tau2, H, P;
    int iterations = 0;
    double residual = 0;
};

// Solves for T = [[I, A^{-1}], [-A^{-1}M + tau1, I + tau2]] by fixed-point iteration, with
// M = i beta_0 + gamma' + i sum beta_j A_j + p3 + |beta'|^2 and A = A_d. `beta` uses (tau, gamma, eta)
// for (beta_0, gamma', beta_j). p3 = p3norm * p3dir / |p3dir|_F; the default direction is ones/N.
ConjugatorResult lemma_am_conjugator(const HyperbolicParabolicModel& m, const Frequency& beta, double p3norm,
                                     const CMatrix& p3dir = CMatrix());

struct EvansValue {
    Complex detH;          // closed form det H(zeta)
    Complex definitional;  // det(E^-(G), ker Gamma) with orthonormal bases, Gamma U = u_2
    Complex ratio;         // detH / definitional
};

// Low-frequency Evans function for the Neumann condition u_2 = 0 at the boundary.
EvansValue evans(const HyperbolicParabolicModel& m, const Frequency& z);

// Definitional Evans determinant only (any frequency with gamma > 0).
Complex evans_definitional(const HyperbolicParabolicModel& m, const Frequency& z);

// R(zeta) = 1 / |H(zeta)^{-1}| = sigma_min(H); 0 where H is singular.
double degeneracy_R(const HyperbolicParabolicModel& m, const Frequency& z);

}  // namespace hpbl
