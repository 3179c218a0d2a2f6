#include "hpbl/expansion.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace hpbl {

namespace {

void require_d1(const HyperbolicParabolicModel& m, const DiscreteField& f) {
    if (m.d != 1) throw Error(ErrorKind::InvalidArgument, "space-time expansions are implemented for d = 1");
    if (f.N != m.N) throw Error(ErrorKind::DimensionMismatch, "forcing has the wrong number of components");
    if (f.nt < 3 || f.nx < 6) throw Error(ErrorKind::WrongShape, "grid needs at least 3 x 6 nodes");
}

void require_quiet_start(const DiscreteField& f) {
    double row0 = 0;
    for (int i = 0; i < f.nx; ++i) row0 = std::max(row0, f.node(0, i).lpNorm<Eigen::Infinity>());
    if (row0 > 1e-12 * std::max(1.0, f.max_abs()))
        throw Error(ErrorKind::InvalidArgument, "forcing must vanish at the initial time");
}

void require_identity_A0(const HyperbolicParabolicModel& m) {
    const RMatrix A0 = m.A_base(0);
    if ((A0 - RMatrix::Identity(m.N, m.N)).norm() > 1e-12) throw Error(ErrorKind::InvalidArgument, "A_0 must be I");
}

RMatrix real_part(const CMatrix& M) { return M.real(); }

// Box-scheme march for w_t + lam w_x = F on cells, one characteristic component.
// Rightgoing components take w(t, 0) = edge(n); leftgoing ones take w(t, X) = edge(n).
void box_march(double lam, const DiscreteField& F, int comp, const std::vector<double>& edge, DiscreteField& w,
               int wcomp) {
    const double kt = 0.5 / w.dt, kx = 0.5 * lam / w.dx;
    const int nx = w.nx;
    for (int n = 0; n + 1 < w.nt; ++n) {
        if (lam > 0) {
            w.at(n + 1, 0, wcomp) = edge[n + 1];
            for (int i = 0; i + 1 < nx; ++i) {
                const double a = w.at(n + 1, i, wcomp), b = w.at(n, i + 1, wcomp), c = w.at(n, i, wcomp);
                const double rhs = F.at(n, i, comp) - kt * (a - b - c) + kx * (a - b + c);
                w.at(n + 1, i + 1, wcomp) = rhs / (kt + kx);
            }
        } else {
            w.at(n + 1, nx - 1, wcomp) = edge[n + 1];
            for (int i = nx - 2; i >= 0; --i) {
                const double a = w.at(n + 1, i + 1, wcomp), b = w.at(n, i + 1, wcomp), c = w.at(n, i, wcomp);
                const double rhs = F.at(n, i, comp) - kt * (a - b - c) - kx * (a + b - c);
                w.at(n + 1, i, wcomp) = rhs / (kt - kx);
            }
        }
    }
}

DiscreteField map_nodes(const DiscreteField& u, const RMatrix& T) {
    DiscreteField out = DiscreteField::like(u, static_cast<int>(T.rows()));
    for (int n = 0; n < u.nt; ++n)
        for (int i = 0; i < u.nx; ++i) out.set_node(n, i, T * u.node(n, i));
    return out;
}

// max |pi_+ q| <= 10 h^2 S + 1e-8 with S the largest sup norm of q and of the first three x-derivatives of u.
void check_trace_in_stable(const SpectralSplit& split, const DiscreteField& u, const DiscreteField& q, const char* what) {
    const RMatrix piPlus = real_part(split.piPlus);
    double plus = 0;
    for (int n = 0; n < q.nt; ++n) plus = std::max(plus, (piPlus * q.node(n, 0)).norm());
    const DiscreteField ux = dx_field(u), uxx = laplacian_field(u);
    const double S = std::max({q.max_abs(), ux.max_abs(), uxx.max_abs(), dx_field(uxx).max_abs()});
    const double h = std::max(u.dt, u.dx);
    if (plus > 10 * h * h * S + 1e-8)
        throw Error(ErrorKind::TraceNotInStableSubspace,
                    std::string(what) + " has an E_+ component " + std::to_string(plus));
}

RMatrix sym_part(const RMatrix& A) { return 0.5 * (A + A.transpose()); }

void require_positive(const RMatrix& A, int n, int i) {
    const double lo = A.rows() == 1 ? A(0, 0) : Eigen::SelfAdjointEigenSolver<RMatrix>(sym_part(A)).eigenvalues().minCoeff();
    if (!(lo > 0))
        throw Error(ErrorKind::AdNotPositive,
                    "A_d(u) not positive at cell (" + std::to_string(n) + ", " + std::to_string(i) + ")");
}

// Columns dA/du_k(u) p.
RMatrix linearization(const HyperbolicParabolicModel& m, const RVector& u, const RVector& p) {
    RMatrix B(m.N, m.N);
    for (int k = 0; k < m.N; ++k) B.col(k) = m.dA(m.d, u, k) * p;
    return B;
}

}  // namespace

bool LayerDescriptor::zero(double tol) const {
    for (const auto& a : amplitudes)
        if (a.max_abs() > tol) return false;
    return true;
}

RVector LayerDescriptor::evaluate(int n, double z) const {
    const SpectralSplit split = spectral_split(decayMatrix);
    const int N = static_cast<int>(decayMatrix.rows());
    RVector out = RVector::Zero(N);
    for (std::size_t k = 0; k < amplitudes.size(); ++k) {
        const RVector a = amplitudes[k].node(n, 0);
        if (a.isZero(0.0)) continue;
        out += std::pow(z, static_cast<double>(k)) * decaying_exponential_apply(decayMatrix, split, z, a).real();
    }
    return out;
}

RVector LayerDescriptor::evaluate_dz(int n, double z) const {
    const SpectralSplit split = spectral_split(decayMatrix);
    const int N = static_cast<int>(decayMatrix.rows());
    RVector out = RVector::Zero(N);
    for (std::size_t k = 0; k < amplitudes.size(); ++k) {
        const RVector a = amplitudes[k].node(n, 0);
        if (a.isZero(0.0)) continue;
        const RVector e = decaying_exponential_apply(decayMatrix, split, z, a).real();
        out += std::pow(z, static_cast<double>(k)) * (decayMatrix * e);
        if (k > 0) out += static_cast<double>(k) * std::pow(z, static_cast<double>(k - 1)) * e;
    }
    return out;
}

LayerDescriptor zero_layer(const RMatrix& Ad, const DiscreteField& like) {
    LayerDescriptor l;
    l.decayMatrix = Ad;
    DiscreteField b = DiscreteField::zeros(static_cast<int>(Ad.rows()), like.nt, 1, like.dt, like.dx);
    b.timeOrigin = like.timeOrigin;
    l.amplitudes.push_back(b);
    return l;
}

bool layer_decay_ok(const LayerDescriptor& layer, const std::vector<double>& zs, double tol) {
    const SpectralSplit split = spectral_split(layer.decayMatrix);
    const int nt = layer.traceAmplitude().nt;
    double at0 = 0;
    for (int n = 0; n < nt; ++n) at0 = std::max(at0, layer.evaluate(n, 0.0).norm());
    for (double z : zs) {
        double az = 0;
        for (int n = 0; n < nt; ++n) az = std::max(az, layer.evaluate(n, z).norm());
        if (az > std::exp(-0.5 * split.gapWidth * z) * at0 + tol) return false;
    }
    return true;
}

FilteredOuter solve_filtered_outer(const HyperbolicParabolicModel& m, const DiscreteField& f) {
    require_d1(m, f);
    require_identity_A0(m);
    if (!m.constant_coefficients()) throw Error(ErrorKind::InvalidArgument, "filtered solve needs constant coefficients");
    require_quiet_start(f);
    const RMatrix A = m.Ad();
    if ((A - A.transpose()).norm() > 1e-12 * std::max(1.0, A.norm()))
        throw Error(ErrorKind::NonSymmetric, "A_d must be symmetric");
    Eigen::SelfAdjointEigenSolver<RMatrix> es(A);
    const RVector lam = es.eigenvalues();
    const RMatrix R = es.eigenvectors();
    if (lam.cwiseAbs().minCoeff() <= 1e-12 * std::max(1.0, lam.cwiseAbs().maxCoeff()))
        throw Error(ErrorKind::CharacteristicBoundary, "A_d is singular");

    const DiscreteField g = map_nodes(f, A.inverse());
    const DiscreteField Fw = map_nodes(cell_dt(g), R.transpose());
    const DiscreteField gw = map_nodes(g, R.transpose());
    DiscreteField w = DiscreteField::like(f);
    for (int k = 0; k < m.N; ++k) {
        std::vector<double> edge(f.nt, 0.0);
        if (lam(k) > 0)
            for (int n = 0; n < f.nt; ++n) edge[n] = gw.at(n, 0, k);
        box_march(lam(k), Fw, k, edge, w, k);
    }
    FilteredOuter out;
    out.v = map_nodes(w, R);
    out.u0 = DiscreteField::like(f);
    for (int n = 0; n + 1 < f.nt; ++n)
        for (int i = 0; i < f.nx; ++i)
            out.u0.set_node(n + 1, i, out.u0.node(n, i) + 0.5 * f.dt * A * (out.v.node(n, i) + out.v.node(n + 1, i)));
    return out;
}

DiscreteField box_residual(const HyperbolicParabolicModel& m, const DiscreteField& u, const DiscreteField& f) {
    DiscreteField r = cell_dt(u);
    r += map_nodes(cell_dx(u), m.Ad());
    r -= cell_average(f);
    return r;
}

LayerDescriptor layer_profile_first_order(const HyperbolicParabolicModel& m, const DiscreteField& u0) {
    if (u0.N != m.N) throw Error(ErrorKind::DimensionMismatch, "u0 has the wrong number of components");
    const RMatrix A = m.Ad();
    const SpectralSplit split = spectral_split(A);
    const DiscreteField q = normal_trace_derivative(u0);
    check_trace_in_stable(split, u0, q, "d_x u_0(., 0)");
    LayerDescriptor l;
    l.decayMatrix = A;
    l.amplitudes.push_back(map_nodes(q, -real_part(split.piMinus) * A.inverse()));
    return l;
}

NextOrder next_order_terms(const HyperbolicParabolicModel& m, const DiscreteField& u0, const LayerDescriptor& u1star) {
    const RMatrix A = m.Ad(), Ainv = A.inverse();
    const SpectralSplit split = spectral_split(A);
    const RMatrix piMinus = real_part(split.piMinus);
    NextOrder out;
    out.u1 = solve_filtered_outer(m, laplacian_field(u0)).u0;
    const DiscreteField q1 = normal_trace_derivative(out.u1);
    check_trace_in_stable(split, out.u1, q1, "d_x u_1(., 0)");
    const DiscreteField b = map_nodes(dt_field(u1star.traceAmplitude()), Ainv);
    const DiscreteField c = map_nodes(q1 + b, -Ainv * piMinus);
    out.u2star.decayMatrix = A;
    out.u2star.amplitudes = {c, b};
    return out;
}

ExpansionProfile linear_neumann_expansion(const HyperbolicParabolicModel& m, const DiscreteField& f) {
    ExpansionProfile p;
    p.order = 1;
    const FilteredOuter o = solve_filtered_outer(m, f);
    LayerDescriptor l1 = layer_profile_first_order(m, o.u0);
    NextOrder next = next_order_terms(m, o.u0, l1);
    p.outerTerms = {o.u0, next.u1};
    p.layerTerms = {zero_layer(m.Ad(), f), l1, next.u2star};
    return p;
}

namespace {

// Linearized box march D_t w + A(avg u0) D_x w + dA(avg u0)(avg w) D_x u0 = R with w(t, 0) from
// the trapezoidal rule for w' = bdry(t).
DiscreteField linear_cascade_term(const HyperbolicParabolicModel& m, const DiscreteField& u0, const DiscreteField& R,
                                  const DiscreteField& bdry) {
    const int N = m.N;
    const double kt = 0.5 / u0.dt, kx = 0.5 / u0.dx;
    const RMatrix Id = RMatrix::Identity(N, N);
    const DiscreteField avg0 = cell_average(u0), dx0 = cell_dx(u0);
    DiscreteField w = DiscreteField::like(u0);
    for (int n = 0; n + 1 < u0.nt; ++n) {
        w.set_node(n + 1, 0, w.node(n, 0) + 0.5 * u0.dt * (bdry.node(n, 0) + bdry.node(n + 1, 0)));
        for (int i = 0; i + 1 < u0.nx; ++i) {
            const RVector ub = avg0.node(n, i);
            const RMatrix A = m.A_at(m.d, ub);
            const RMatrix B = linearization(m, ub, dx0.node(n, i));
            const RVector a = w.node(n + 1, i), b = w.node(n, i + 1), c = w.node(n, i);
            const RMatrix K = kt * Id + kx * A + 0.25 * B;
            const RVector rhs = R.node(n, i) - kt * (a - b - c) - kx * A * (b - a - c) - 0.25 * B * (a + b + c);
            w.set_node(n + 1, i + 1, K.partialPivLu().solve(rhs));
        }
    }
    return w;
}

DiscreteField order_zero_term(const HyperbolicParabolicModel& m, const DiscreteField& f, const QuasilinearOptions& opt) {
    const int N = m.N;
    const double kt = 0.5 / f.dt, kx = 0.5 / f.dx;
    const RMatrix Id = RMatrix::Identity(N, N);
    const DiscreteField F = cell_average(f);
    DiscreteField u = DiscreteField::like(f);
    for (int n = 0; n + 1 < f.nt; ++n) {
        u.set_node(n + 1, 0, u.node(n, 0) + 0.5 * f.dt * (f.node(n, 0) + f.node(n + 1, 0)));
        for (int i = 0; i + 1 < f.nx; ++i) {
            const RVector a = u.node(n + 1, i), b = u.node(n, i + 1), c = u.node(n, i);
            auto residual = [&](const RVector& W, RMatrix* J) {
                const RVector ub = 0.25 * (W + a + b + c);
                const RVector p = kx * (W - a + b - c);
                const RMatrix A = m.A_at(m.d, ub);
                if (J) *J = kt * Id + kx * A + 0.25 * linearization(m, ub, p);
                return RVector(kt * (W + a - b - c) + A * p - F.node(n, i));
            };
            RVector W = a + b - c;
            RMatrix J;
            RVector G = residual(W, &J);
            double gn = G.lpNorm<Eigen::Infinity>();
            int it = 0;
            while (gn > opt.newtonTol) {
                if (++it > opt.maxNewton || !std::isfinite(gn))
                    throw Error(ErrorKind::NonlinearSolveDiverged,
                                "Newton failed at cell (" + std::to_string(n) + ", " + std::to_string(i) + ")");
                const RVector step = J.partialPivLu().solve(G);
                double damp = 1.0;
                RVector Wn = W - step;
                RVector Gn = residual(Wn, nullptr);
                while (!(Gn.lpNorm<Eigen::Infinity>() < gn) && damp > 1e-3) {
                    damp *= 0.5;
                    Wn = W - damp * step;
                    Gn = residual(Wn, nullptr);
                }
                W = Wn;
                G = residual(W, &J);
                gn = G.lpNorm<Eigen::Infinity>();
            }
            u.set_node(n + 1, i + 1, W);
            require_positive(m.A_at(m.d, 0.25 * (W + a + b + c)), n, i);
        }
    }
    return u;
}

}  // namespace

ExpansionProfile quasilinear_incoming_expansion(const HyperbolicParabolicModel& m, const DiscreteField& f, int M,
                                                const QuasilinearOptions& opt) {
    require_d1(m, f);
    require_identity_A0(m);
    require_quiet_start(f);
    if (M < 0 || M > 2) throw Error(ErrorKind::InvalidArgument, "cascade order must be 0, 1 or 2");
    require_positive(m.A_at(m.d, RVector::Zero(m.N)), 0, 0);
    ExpansionProfile p;
    p.order = M;
    p.outerTerms.push_back(order_zero_term(m, f, opt));
    if (M >= 1) {
        const DiscreteField lap0 = laplacian_field(p.outerTerms[0]);
        p.outerTerms.push_back(linear_cascade_term(m, p.outerTerms[0], cell_average(lap0), lap0.column(0)));
    }
    if (M >= 2) {
        const DiscreteField& u0 = p.outerTerms[0];
        const DiscreteField& u1 = p.outerTerms[1];
        const DiscreteField lap1 = laplacian_field(u1);
        DiscreteField R = cell_average(lap1);
        const DiscreteField avg0 = cell_average(u0), avg1 = cell_average(u1);
        const DiscreteField dx0 = cell_dx(u0), dx1 = cell_dx(u1);
        for (int n = 0; n < R.nt; ++n)
            for (int i = 0; i < R.nx; ++i) {
                const RVector ub = avg0.node(n, i), w1 = avg1.node(n, i);
                const RVector r = R.node(n, i) - m.dA_dir(m.d, ub, w1) * dx1.node(n, i) -
                                  0.5 * m.d2A_dir(m.d, ub, w1, w1) * dx0.node(n, i);
                R.set_node(n, i, r);
            }
        p.outerTerms.push_back(linear_cascade_term(m, u0, R, lap1.column(0)));
    }
    for (int j = 0; j <= M; ++j) p.layerTerms.push_back(zero_layer(m.Ad(), f));
    return p;
}

DiscreteField outer_sum(const ExpansionProfile& p, double eps, int order) {
    if (p.outerTerms.empty()) throw Error(ErrorKind::InvalidArgument, "empty expansion");
    const int last = order < 0 ? static_cast<int>(p.outerTerms.size()) - 1 : order;
    if (last >= static_cast<int>(p.outerTerms.size())) throw Error(ErrorKind::InvalidArgument, "order too high");
    DiscreteField s = p.outerTerms[0];
    double e = 1;
    for (int j = 1; j <= last; ++j) {
        e *= eps;
        s += e * p.outerTerms[j];
    }
    return s;
}

DiscreteField viscous_cell_residual(const HyperbolicParabolicModel& m, const DiscreteField& u, const DiscreteField& f,
                                    double eps) {
    if (!u.same_grid(f)) throw Error(ErrorKind::DimensionMismatch, "u and f live on different grids");
    const DiscreteField avg = cell_average(u), dx = cell_dx(u);
    DiscreteField r = cell_dt(u);
    r -= eps * cell_average(laplacian_field(u));
    r -= cell_average(f);
    for (int n = 0; n < r.nt; ++n)
        for (int i = 0; i < r.nx; ++i) r.set_node(n, i, r.node(n, i) + m.A_at(m.d, avg.node(n, i)) * dx.node(n, i));
    return r;
}

MixedReduction order_zero_mixed_reduction(const HyperbolicParabolicModel& m) {
    MixedReduction r;
    r.reduced = reduce_boundary_conditions(m);
    r.kind = r.reduced.cls.kind;
    const int N = m.N;
    if (r.kind == BoundaryCase::CaseI) {
        r.dirichletRows = r.reduced.dirichlet_rows(m);
        r.dirichletDataMap = r.reduced.K;
        r.neumannRows = RMatrix(0, N);
        r.neumannDataMap = RMatrix(0, m.gamma2.rows());
        r.layerBasis = r.reduced.X;
    } else {
        r.dirichletRows = m.gamma1;
        r.dirichletDataMap = RMatrix::Identity(m.gamma1.rows(), m.gamma1.rows());
        r.neumannRows = r.reduced.neumann_rows(N);
        r.neumannDataMap = r.reduced.M;
        r.layerBasis = real_stable_basis(m.Ad());
    }
    return r;
}

LayerAmplitude mixed_layer_amplitude(const MixedReduction& r, const HyperbolicParabolicModel& m, const RVector& g,
                                     const RVector& outerTrace, double tol) {
    const bool caseI = r.kind == BoundaryCase::CaseI;
    const RMatrix& G = caseI ? m.gamma1 : m.gamma2;
    if (g.size() != G.rows() || outerTrace.size() != m.N)
        throw Error(ErrorKind::DimensionMismatch, "boundary data or trace has the wrong length");
    const RVector target = g - G * outerTrace;
    const RMatrix GB = G * r.layerBasis;
    LayerAmplitude out;
    RVector c = RVector::Zero(r.layerBasis.cols());
    if (GB.cols() > 0 && GB.rows() > 0) c = GB.completeOrthogonalDecomposition().solve(target);
    out.amplitude = r.layerBasis * c;
    out.residual = (GB * c - target).norm();
    out.layerValue = caseI ? out.amplitude : RVector(m.Ad().inverse() * out.amplitude);
    if (out.residual > tol * (1 + g.norm()))
        throw Error(ErrorKind::SolvabilityResidualLarge, "solvability residual " + std::to_string(out.residual));
    return out;
}

}  // namespace hpbl
