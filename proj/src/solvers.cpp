#include "hpbl/solvers.hpp"

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

#include "hpbl/cauchy.hpp"

namespace hpbl {

const char* scheme_name(Scheme s) {
    return s == Scheme::BackwardEulerUpwind ? "BackwardEulerUpwind" : "CrankNicolsonCentered";
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

struct SignedParts {
    RMatrix plus, minus;
};

SignedParts signed_parts(const RMatrix& A) {
    Eigen::SelfAdjointEigenSolver<RMatrix> es(0.5 * (A + A.transpose()));
    const RVector l = es.eigenvalues();
    const RMatrix& R = es.eigenvectors();
    return {R * l.cwiseMax(0.0).asDiagonal() * R.transpose(), R * l.cwiseMin(0.0).asDiagonal() * R.transpose()};
}

// One implicit time level of the viscous problem; unknowns (ghost, u_0, ..., u_{nx-1}).
class ViscousStepper {
public:
    ViscousStepper(const HyperbolicParabolicModel& m, double eps, const DiscreteField& f, const ViscousOptions& opt)
        : m_(m), eps_(eps), f_(f), opt_(opt), N_(m.N), nx_(f.nx), dx_(f.dx), dt_(f.dt) {
        theta_ = opt.scheme == Scheme::CrankNicolsonCentered ? 0.5 : 1.0;
        linear_ = m.constant_coefficients();
        D_ = static_cast<int>(m.gamma1.rows());
        if (D_ + m.gamma2.rows() != N_) throw Error(ErrorKind::WrongShape, "need rank Gamma_1 + rank Gamma_2 = N");
    }

    int size() const { return N_ * (nx_ + 1); }
    int at(int i, int k) const { return N_ * (i + 1) + k; }  // i = -1 is the ghost

    // Spatial operator at node i, 0 <= i <= nx - 2.
    RVector phi(const RVector& U, int i) const {
        const RVector ui = seg(U, i), um = seg(U, i - 1), up = seg(U, i + 1);
        const RMatrix A = m_.A_at(m_.d, ui);
        RVector out = -eps_ * (up - 2 * ui + um) / (dx_ * dx_);
        if (theta_ == 0.5) {
            out += A * (up - um) / (2 * dx_);
        } else {
            const SignedParts s = signed_parts(A);
            out += s.plus * (ui - um) / dx_ + s.minus * (up - ui) / dx_;
        }
        return out;
    }

    RVector residual(const RVector& U, const RVector& Uold, int n) const {
        RVector R(size());
        R.head(D_) = m_.gamma1 * seg(U, 0);
        R.segment(D_, N_ - D_) = m_.gamma2 * (seg(U, 1) - seg(U, -1));
        for (int i = 0; i + 1 < nx_; ++i) {
            RVector r = (seg(U, i) - seg(Uold, i)) / dt_ + theta_ * phi(U, i) -
                        theta_ * f_.node(n + 1, i) - (1 - theta_) * f_.node(n, i);
            if (theta_ < 1) r += (1 - theta_) * phi(Uold, i);
            R.segment(at(i, 0), N_) = r;
        }
        R.segment(at(nx_ - 1, 0), N_) = seg(U, nx_ - 1) - 2 * seg(U, nx_ - 2) + seg(U, nx_ - 3);
        return R;
    }

    SpMat jacobian(const RVector& U) const {
        std::vector<Triplet> t;
        t.reserve(static_cast<std::size_t>(3 * N_ * N_) * nx_ + 4 * N_ * N_);
        auto block = [&](int row, int colNode, const RMatrix& B) {
            for (int a = 0; a < B.rows(); ++a)
                for (int b = 0; b < B.cols(); ++b)
                    if (B(a, b) != 0.0) t.emplace_back(row + a, at(colNode, b), B(a, b));
        };
        const RMatrix Id = RMatrix::Identity(N_, N_);
        block(0, 0, m_.gamma1);
        block(D_, 1, m_.gamma2);
        block(D_, -1, -m_.gamma2);
        const double e2 = eps_ / (dx_ * dx_);
        for (int i = 0; i + 1 < nx_; ++i) {
            const int row = at(i, 0);
            const RVector ui = seg(U, i);
            const RMatrix A = m_.A_at(m_.d, ui);
            RMatrix Ji = Id / dt_ + theta_ * 2 * e2 * Id, Jm = -theta_ * e2 * Id, Jp = Jm;
            if (theta_ == 0.5) {
                Jm -= theta_ * A / (2 * dx_);
                Jp += theta_ * A / (2 * dx_);
                if (!linear_) {
                    const RVector D = (seg(U, i + 1) - seg(U, i - 1)) / (2 * dx_);
                    for (int k = 0; k < N_; ++k) Ji.col(k) += theta_ * m_.dA(m_.d, ui, k) * D;
                }
            } else {
                const SignedParts s = signed_parts(A);
                Ji += (s.plus - s.minus) / dx_;
                Jm -= s.plus / dx_;
                Jp += s.minus / dx_;
            }
            block(row, i - 1, Jm);
            block(row, i, Ji);
            block(row, i + 1, Jp);
        }
        const int row = at(nx_ - 1, 0);
        block(row, nx_ - 1, Id);
        block(row, nx_ - 2, -2 * Id);
        block(row, nx_ - 3, Id);
        SpMat J(size(), size());
        J.setFromTriplets(t.begin(), t.end());
        return J;
    }

    // Advances Uold (level n) to level n + 1; returns the Newton iteration count.
    int step(const RVector& Uold, RVector& U, int n) {
        U = Uold;
        RVector R = residual(U, Uold, n);
        double rn = R.lpNorm<Eigen::Infinity>();
        int it = 0;
        while (rn > opt_.newtonTol || it == 0) {
            if (it >= (linear_ ? 2 : opt_.maxNewton))
                throw Error(ErrorKind::CFLBlowup, "Newton failed at time step " + std::to_string(n + 1));
            if (!linear_ || !factored_) {
                const SpMat J = jacobian(U);
                if (!patterned_) {
                    lu_.analyzePattern(J);
                    patterned_ = true;
                }
                lu_.factorize(J);
                if (lu_.info() != Eigen::Success) throw Error(ErrorKind::CFLBlowup, "singular step matrix");
                factored_ = true;
            }
            U -= lu_.solve(R);
            R = residual(U, Uold, n);
            const double next = R.lpNorm<Eigen::Infinity>();
            if (!std::isfinite(next)) throw Error(ErrorKind::CFLBlowup, "non-finite residual");
            rn = next;
            ++it;
        }
        return it;
    }

    RVector seg(const RVector& U, int i) const { return U.segment(at(i, 0), N_); }

private:
    const HyperbolicParabolicModel& m_;
    double eps_;
    const DiscreteField& f_;
    ViscousOptions opt_;
    int N_, nx_;
    double dx_, dt_;
    double theta_ = 0.5;
    bool linear_ = false;
    int D_ = 0;
    Eigen::SparseLU<SpMat> lu_;
    bool patterned_ = false, factored_ = false;
};

}  // namespace

ViscousRun viscous_solve_1d(const HyperbolicParabolicModel& m, double eps, const DiscreteField& f,
                            const ViscousOptions& opt, const DiscreteField* initial) {
    if (m.d != 1) throw Error(ErrorKind::InvalidArgument, "viscous solves are one-dimensional");
    if (f.N != m.N) throw Error(ErrorKind::DimensionMismatch, "forcing has the wrong number of components");
    if (!(eps > 0)) throw Error(ErrorKind::InvalidArgument, "eps must be positive");
    if (f.dx > opt.layerResolution * eps * (1 + 1e-12))
        throw Error(ErrorKind::InvalidArgument, "dx must resolve the viscous layer (dx <= eps / 4)");
    if (f.nx < 4 || f.nt < 2) throw Error(ErrorKind::WrongShape, "grid too small");
    if ((m.A_base(0) - RMatrix::Identity(m.N, m.N)).norm() > 1e-12)
        throw Error(ErrorKind::InvalidArgument, "A_0 must be I");

    ViscousStepper stepper(m, eps, f, opt);
    ViscousRun run;
    run.model = m;
    run.epsilon = eps;
    run.scheme = opt.scheme;
    run.solution = DiscreteField::like(f);
    const int N = m.N;
    RVector U = RVector::Zero(stepper.size());
    if (initial) {
        if (initial->N != N || initial->nx != f.nx) throw Error(ErrorKind::DimensionMismatch, "initial row shape");
        for (int i = 0; i < f.nx; ++i) U.segment(stepper.at(i, 0), N) = initial->node(0, i);
        U.segment(0, N) = 3 * initial->node(0, 0) - 3 * initial->node(0, 1) + initial->node(0, 2);
    }
    for (int i = 0; i < f.nx; ++i) run.solution.set_node(0, i, stepper.seg(U, i));
    double fmax = f.max_abs(), u0max = initial ? initial->max_abs() : 0.0;
    const double limit = 1e8 * (1 + u0max + fmax * f.t(f.nt - 1));
    RVector Unew;
    for (int n = 0; n + 1 < f.nt; ++n) {
        run.newtonIterations += stepper.step(U, Unew, n);
        U.swap(Unew);
        if (U.lpNorm<Eigen::Infinity>() > limit) throw Error(ErrorKind::CFLBlowup, "solution blew up");
        for (int i = 0; i < f.nx; ++i) run.solution.set_node(n + 1, i, stepper.seg(U, i));
    }
    const auto ev = Eigen::SelfAdjointEigenSolver<RMatrix>(0.5 * (m.Ad() + m.Ad().transpose())).eigenvalues();
    if (ev.minCoeff() < 0 && ev.maxCoeff() > 0) {
        const double umax = run.solution.max_abs();
        for (int n = 0; n < f.nt; ++n)
            for (int i = std::max(0, f.nx - 6); i < f.nx; ++i)
                if (run.solution.node(n, i).lpNorm<Eigen::Infinity>() > 1e-8 * umax)
                    throw Error(ErrorKind::SupportReachedOutflow, "solution reaches x = X");
    }
    return run;
}

namespace {

// Composite Simpson rule on [a, b] with 2k subintervals.
template <typename Fn>
RVector simpson(Fn fn, double a, double b, int N, int k = 32) {
    RVector s = RVector::Zero(N);
    if (b <= a) return s;
    const int n = 2 * k;
    const double h = (b - a) / n;
    for (int j = 0; j <= n; ++j) {
        const double w = (j == 0 || j == n) ? 1.0 : (j % 2 ? 4.0 : 2.0);
        s += w * fn(a + j * h);
    }
    return s * h / 3;
}

}  // namespace

FornetRun fornet_solve(double alpha, double beta, double eps, const FieldFn& f, const ProfileFn& h, double T, double X,
                       double dx, double dt) {
    if (!(alpha > 0 && beta > 0)) throw Error(ErrorKind::InvalidArgument, "alpha and beta must be positive");
    const auto m = builtin_model("fornet", {{"alpha", alpha}, {"beta", beta}});
    const int nt = static_cast<int>(std::lround(T / dt)) + 1, nx = static_cast<int>(std::lround(X / dx)) + 1;
    const DiscreteField F = DiscreteField::sample(2, nt, nx, dt, dx, f);
    const DiscreteField H0 = DiscreteField::sample(2, 1, nx, dt, dx, [&](double, double x) { return h(x); });
    const RVector h0 = h(0.0);
    if (std::abs(h0(0) - h0(1)) > 1e-12 * (1 + h0.norm()))
        throw Error(ErrorKind::InvalidArgument, "initial data must satisfy v1 = v2 at x = 0");

    FornetRun out;
    out.viscous = viscous_solve_1d(m, eps, F, {}, &H0);

    // Boundary system A0coef w' = (0; -Gamma~_2 A^{-1} f(t, 0)), integrated exactly by quadrature.
    const ReducedBC r = reduce_boundary_conditions(m);
    const TangentialSystem ts = tangential_system(m, r);
    const RMatrix A0 = ts.A0coef.real();
    const RMatrix Ainv = m.Ad().inverse();
    const RMatrix G2 = r.neumann_rows(2);
    auto wdot = [&](double t) {
        RVector rhs = RVector::Zero(2);
        rhs.tail(G2.rows()) = -G2 * Ainv * f(t, 0.0);
        return RVector(A0.partialPivLu().solve(rhs));
    };
    auto trace = [&](double t) { return RVector(h0 + simpson(wdot, 0.0, t, 2)); };
    out.boundaryTrace = DiscreteField::zeros(2, nt, 1, dt, dx);
    for (int n = 0; n < nt; ++n) out.boundaryTrace.set_node(n, 0, trace(n * dt));

    const double speed[2] = {beta, alpha};
    out.limit = DiscreteField::like(F);
    for (int n = 0; n < nt; ++n) {
        const double t = n * dt;
        for (int i = 0; i < nx; ++i) {
            const double x = i * dx;
            RVector v(2);
            for (int k = 0; k < 2; ++k) {
                const double a = speed[k];
                auto along = [&](double s) {
                    RVector one(1);
                    one(0) = f(s, x - a * (t - s))(k);
                    return one;
                };
                if (x >= a * t)
                    v(k) = h(x - a * t)(k) + simpson(along, 0.0, t, 1)(0);
                else
                    v(k) = trace(t - x / a)(k) + simpson(along, t - x / a, t, 1)(0);
            }
            out.limit.set_node(n, i, v);
        }
    }
    return out;
}

DiscreteField hyperbolic_solve_incoming(const HyperbolicParabolicModel& m, const DiscreteField& f) {
    return quasilinear_incoming_expansion(m, f, 0).outerTerms[0];
}

CVector ExpProfile::at(double x, int N) const {
    CVector s = CVector::Zero(N);
    for (std::size_t k = 0; k < kappa.size(); ++k) s += std::exp(-kappa[k] * x) * coef[k];
    return s;
}

double ExpProfile::l2_squared() const {
    Complex s = 0;
    for (std::size_t k = 0; k < kappa.size(); ++k)
        for (std::size_t l = 0; l < kappa.size(); ++l)
            s += coef[k].dot(coef[l]) / (std::conj(kappa[k]) + kappa[l]);
    return s.real();
}

CMatrix lyapunov_integral(const CMatrix& H, const CMatrix& Q) {
    // H^* X + X H = -Q
    const Eigen::Index n = H.rows();
    const CMatrix I = CMatrix::Identity(n, n);
    CMatrix K = CMatrix::Zero(n * n, n * n);
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b) {
            // column-major vec: vec(H^* X) = (I kron H^*) vec X, vec(X H) = (H^T kron I) vec X
            K.block(a * n, b * n, n, n) += I(a, b) * H.adjoint();
            K.block(a * n, b * n, n, n) += H(b, a) * I;
        }
    const CVector q = Eigen::Map<const CVector>(Q.data(), n * n);
    const CVector x = K.partialPivLu().solve(CVector(-q));
    return Eigen::Map<const CMatrix>(x.data(), n, n);
}

CVector ResolventSolve::uH(double x) const {
    CVector s = (H * Complex(x)).exp() * homogeneous;
    for (std::size_t k = 0; k < wH.size(); ++k) s += std::exp(-FH.kappa[k] * x) * wH[k];
    return s;
}

CVector ResolventSolve::uP(double x) const {
    CVector s = CVector::Zero(P.rows());
    for (std::size_t k = 0; k < wP.size(); ++k) s += std::exp(-FP.kappa[k] * x) * wP[k];
    return s;
}

ResolventSolve resolvent_ode_solve(const HyperbolicParabolicModel& m, const Frequency& zeta, const ExpProfile& FH,
                                   const ExpProfile& FP, const CVector& g) {
    const int N = m.N;
    for (const auto& k : FH.kappa)
        if (!(k.real() > 0)) throw Error(ErrorKind::InvalidArgument, "forcing must decay");
    for (const auto& k : FP.kappa)
        if (!(k.real() > 0)) throw Error(ErrorKind::InvalidArgument, "forcing must decay");
    if (g.size() != N) throw Error(ErrorKind::DimensionMismatch, "boundary datum has the wrong length");
    const BlockDiagonalization bd = block_diagonalize(m, zeta);
    ResolventSolve s;
    s.zeta = zeta;
    s.H = bd.H;
    s.P = bd.P;
    s.FH = FH;
    s.FP = FP;
    s.g = g;
    const CMatrix I = CMatrix::Identity(N, N);
    for (std::size_t k = 0; k < FP.kappa.size(); ++k) s.wP.push_back(-(s.P + FP.kappa[k] * I).partialPivLu().solve(FP.coef[k]));
    for (std::size_t k = 0; k < FH.kappa.size(); ++k) s.wH.push_back(-(s.H + FH.kappa[k] * I).partialPivLu().solve(FH.coef[k]));
    s.uP0 = s.uP(0.0);
    s.uH0 = s.H.partialPivLu().solve(CVector(g - s.uP0));
    s.homogeneous = s.uH0;
    for (const auto& w : s.wH) s.homogeneous -= w;

    ExpProfile wPprof{FP.kappa, s.wP}, wHprof{FH.kappa, s.wH};
    s.uP2 = wPprof.l2_squared();
    Complex cross = 0;
    for (std::size_t k = 0; k < s.wH.size(); ++k) {
        const CMatrix E = -(s.H - std::conj(FH.kappa[k]) * I).inverse();  // int e^{-conj(kappa) x} e^{Hx} dx
        cross += s.wH[k].dot(E * s.homogeneous);
    }
    const Complex hom = s.homogeneous.dot(lyapunov_integral(s.H, I) * s.homogeneous);
    s.uH2 = hom.real() + 2 * cross.real() + wHprof.l2_squared();

    const double w = zeta.gamma + zeta.rho() * zeta.rho();
    s.lhs = std::pow(w, 3) * s.uH2 + s.uP2 + w * w * s.uH0.squaredNorm() + s.uP0.squaredNorm();
    s.rhs = FP.l2_squared() + w * FH.l2_squared() + g.squaredNorm();
    s.ratio = s.lhs / s.rhs;
    return s;
}

ResolventScanResult resolvent_estimate_scan(const HyperbolicParabolicModel& m, int n, double rhoMax,
                                            unsigned long long seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::normal_distribution<double> G(0.0, 1.0);
    const int N = m.N, d = m.d;
    auto cvec = [&] {
        CVector v(N);
        for (int k = 0; k < N; ++k) v(k) = Complex(G(rng), G(rng));
        return v;
    };
    auto profile = [&] {
        ExpProfile p;
        for (int j = 0; j < 2; ++j) {
            p.kappa.emplace_back(0.5 + 1.5 * U(rng), 2 * U(rng) - 1);
            p.coef.push_back(cvec());
        }
        return p;
    };
    ResolventScanResult res;
    std::vector<double> ratios;
    for (int s = 0; s < 2 * n; ++s) {
        // direction on the closed upper hemisphere of (tau, gamma, eta)
        RVector dir(d + 1);
        for (int k = 0; k <= d; ++k) dir(k) = G(rng);
        dir.normalize();
        const double rho = rhoMax * std::pow(10.0, -3 * U(rng));
        RVector eta = dir.tail(d - 1) * rho;
        const Frequency z(dir(0) * rho, std::abs(dir(1)) * rho, eta);
        const ExpProfile FH = profile(), FP = profile();
        const CVector g = cvec();
        ratios.push_back(resolvent_ode_solve(m, z, FH, FP, g).ratio);
    }
    for (int s = 0; s < 2 * n; ++s) {
        if (s < n) res.maxRatio = std::max(res.maxRatio, ratios[s]);
        res.maxRatioDoubled = std::max(res.maxRatioDoubled, ratios[s]);
    }
    res.samples = 2 * n;
    res.growth = res.maxRatioDoubled / res.maxRatio;
    res.pass = std::isfinite(res.maxRatioDoubled) && res.growth <= 1.5;
    return res;
}

double weighted_estimate_ratio(const DiscreteField& u, const DiscreteField& f, double gamma) {
    const double den = weighted_l2_norm(f, gamma) / gamma + weighted_l2_norm(dx_field(f), gamma) / (gamma * gamma);
    return weighted_l2_norm(u, gamma) / den;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw Error(ErrorKind::InvalidArgument, "need at least two points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double a = std::log(x[k]), b = std::log(y[k]);
        sx += a;
        sy += b;
        sxx += a * a;
        sxy += a * b;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace hpbl
