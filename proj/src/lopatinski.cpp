#include "hpbl/lopatinski.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

#include "hpbl/io.hpp"
#include "hpbl/optimize.hpp"
#include "hpbl/parallel.hpp"
#include "hpbl/symbols.hpp"

namespace hpbl {

namespace {

constexpr double kPi = 3.14159265358979323846;

RMatrix realify_basis(const CMatrix& B) {
    const Eigen::Index n = B.rows(), k = B.cols();
    if (k == 0) return RMatrix(n, 0);
    RMatrix W(n, 2 * k);
    W << B.real(), B.imag();
    Eigen::JacobiSVD<RMatrix> svd(W, Eigen::ComputeThinU);
    return svd.matrixU().leftCols(k);
}

int real_rank(const RMatrix& G) { return static_cast<int>(numerical_rank(G)); }

// Orthonormal rows spanning the left nullspace of a real matrix.
RMatrix real_left_null(const RMatrix& G) {
    const Eigen::Index m = G.rows();
    if (G.cols() == 0 || m == 0) return RMatrix::Identity(m, m);
    Eigen::JacobiSVD<RMatrix> svd(G, Eigen::ComputeFullU);
    const auto& sv = svd.singularValues();
    Eigen::Index r = 0;
    for (Eigen::Index k = 0; k < sv.size(); ++k)
        if (sv(k) > kRankTol * sv(0)) ++r;
    return svd.matrixU().rightCols(m - r).transpose();
}

RMatrix real_null(const RMatrix& G) { return real_left_null(RMatrix(G.transpose())).transpose(); }

void require_noncharacteristic(const RMatrix& Ad) {
    const CVector ev = eigenvalues(Ad);
    const double scale = std::max(Ad.norm(), 1.0);
    for (Eigen::Index k = 0; k < ev.size(); ++k)
        if (std::abs(ev(k).real()) <= kAxisTol * scale)
            throw Error(ErrorKind::CharacteristicBoundary, "A_d has an eigenvalue on the imaginary axis");
}

CMatrix hyperbolic_operator(const HyperbolicParabolicModel& m, const Frequency& z) {
    return m.Ad().cast<Complex>().partialPivLu().solve(tangential_symbol(m, z));
}

CMatrix orth_projector(const CMatrix& Q) { return Q * Q.adjoint(); }

// Replaces an approximate limit basis by the span of the eigenvectors of M0 lying in it, when those are
// well separated from the rest of the spectrum. Returns false (basis untouched) otherwise.
bool snap_to_eigenvectors(const CMatrix& M0, CMatrix& basis) {
    const Eigen::Index n = M0.rows(), dim = basis.cols();
    if (dim == 0 || dim == n) return true;
    const auto e = eig(M0);
    const double scale = std::max(M0.norm(), 1.0);
    std::vector<bool> in(n);
    Eigen::Index count = 0;
    for (Eigen::Index k = 0; k < n; ++k) {
        const CVector r = e.vectors.col(k).normalized();
        in[k] = (r - basis * (basis.adjoint() * r)).norm() < 1e-4;
        count += in[k];
    }
    if (count != dim) return false;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (in[i] && !in[j] && std::abs(e.values(i) - e.values(j)) < 1e-8 * scale) return false;
    CMatrix V(n, dim);
    for (Eigen::Index k = 0, c = 0; k < n; ++k)
        if (in[k]) V.col(c++) = e.vectors.col(k).normalized();
    Eigen::JacobiSVD<CMatrix> svd(V, Eigen::ComputeThinU);
    if (svd.singularValues()(dim - 1) < 1e-6) return false;
    basis = svd.matrixU();
    return true;
}

}  // namespace

const char* boundary_case_name(BoundaryCase c) {
    switch (c) {
        case BoundaryCase::CaseI: return "CaseI";
        case BoundaryCase::CaseII: return "CaseII";
        case BoundaryCase::BoundaryCase: return "BoundaryCase";
    }
    return "?";
}

const char* lop_verdict_name(LopVerdict v) {
    switch (v) {
        case LopVerdict::UNIFORM: return "UNIFORM";
        case LopVerdict::WEAK_ONLY: return "WEAK_ONLY";
        case LopVerdict::FAILS_WEAK: return "FAILS_WEAK";
    }
    return "?";
}

RMatrix real_stable_basis(const RMatrix& A) { return realify_basis(spectral_split(A).stableBasis); }
RMatrix real_unstable_basis(const RMatrix& A) { return realify_basis(spectral_split(A).unstableBasis); }

RMatrix ReducedBC::dirichlet_rows(const HyperbolicParabolicModel& m) const {
    if (gammaTilde1) return *gammaTilde1;
    return m.gamma1;
}

RMatrix ReducedBC::neumann_rows(int N) const {
    if (gammaTilde2) return *gammaTilde2;
    return RMatrix(0, N);
}

CaseClassification classify_case(const HyperbolicParabolicModel& m) {
    const RMatrix Ad = m.Ad();
    require_noncharacteristic(Ad);
    const auto split = spectral_split(Ad);
    CaseClassification c;
    c.D = real_rank(m.gamma1);
    c.Nn = real_rank(m.gamma2);
    c.O = static_cast<int>(split.stableBasis.cols());
    c.I = static_cast<int>(split.unstableBasis.cols());
    c.kind = c.D > c.I ? BoundaryCase::CaseI : (c.D < c.I ? BoundaryCase::CaseII : BoundaryCase::BoundaryCase);
    return c;
}

ReducedBC reduce_case_ii(const HyperbolicParabolicModel& m) {
    ReducedBC r;
    r.cls = classify_case(m);
    if (r.cls.kind == BoundaryCase::CaseI)
        throw Error(ErrorKind::InvalidArgument, "more Dirichlet conditions than incoming modes; use reduce_case_i");
    const RMatrix Em = real_stable_basis(m.Ad());
    const RMatrix G2E = m.gamma2 * Em;
    if (real_rank(G2E) < r.cls.O)
        throw Error(ErrorKind::TransversalityFailure, "Gamma_2 is not of full rank on E_-(A_d)");
    r.M = real_left_null(G2E);
    r.gammaTilde2 = RMatrix(r.M * m.gamma2);
    if (real_rank(*r.gammaTilde2) != r.cls.Nn - r.cls.O)
        throw Error(ErrorKind::TransversalityFailure, "reduced Neumann rows are rank deficient");
    return r;
}

ReducedBC reduce_case_i(const HyperbolicParabolicModel& m) {
    ReducedBC r;
    r.cls = classify_case(m);
    if (r.cls.kind != BoundaryCase::CaseI)
        throw Error(ErrorKind::InvalidArgument, "not in case (i); use reduce_case_ii");
    const RMatrix Ad = m.Ad();
    const RMatrix Em = real_stable_basis(Ad);
    const RMatrix G2E = m.gamma2 * Em;
    if (real_rank(G2E) < r.cls.Nn)
        throw Error(ErrorKind::TransversalityFailure, "Gamma_2 is not of full rank on E_-(A_d)");
    const RMatrix kerG2 = Em * real_null(G2E);
    const RMatrix X = Ad.partialPivLu().solve(kerG2);
    Eigen::HouseholderQR<RMatrix> qr(X);
    r.X = qr.householderQ() * RMatrix::Identity(X.rows(), X.cols());
    const RMatrix G1X = m.gamma1 * r.X;
    if (real_rank(G1X) != r.cls.O - r.cls.Nn)
        throw Error(ErrorKind::TransversalityFailure, "Gamma_1 is not of full rank on X");
    r.M = RMatrix(0, m.gamma2.rows());
    r.K = real_left_null(G1X);
    r.gammaTilde1 = RMatrix(r.K * m.gamma1);
    if (real_rank(*r.gammaTilde1) != r.cls.I)
        throw Error(ErrorKind::TransversalityFailure, "reduced Dirichlet rows do not have rank I");
    return r;
}

ReducedBC reduce_boundary_conditions(const HyperbolicParabolicModel& m) {
    return classify_case(m).kind == BoundaryCase::CaseI ? reduce_case_i(m) : reduce_case_ii(m);
}

CMatrix rescaled_boundary_symbol(const HyperbolicParabolicModel& m, const ReducedBC& r, const Frequency& z) {
    if (z.rho() == 0.0) throw Error(ErrorKind::ZeroFrequency, "the rescaled symbol is undefined at zeta = 0");
    const RMatrix G2 = r.neumann_rows(m.N);
    if (G2.rows() == 0) return CMatrix(0, m.N);
    const Complex mult = 1.0 / Complex(z.gamma + z.eta_norm(), z.tau);
    return -mult * (G2.cast<Complex>() * hyperbolic_operator(m, z));
}

CMatrix lopatinski_boundary_matrix(const HyperbolicParabolicModel& m, const ReducedBC& r, const Frequency& z) {
    const RMatrix G1 = r.dirichlet_rows(m);
    const CMatrix G2 = rescaled_boundary_symbol(m, r, z);
    CMatrix B(G1.rows() + G2.rows(), m.N);
    B << G1.cast<Complex>(), G2;
    return B;
}

PlusSpace plus_space(const HyperbolicParabolicModel& m, const Frequency& z) {
    PlusSpace out;
    try {
        out.basis = spectral_split(hyperbolic_operator(m, z)).unstableBasis;
        return out;
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::GlancingOrCharacteristic) throw;
    }
    out.limit = true;
    const std::vector<double> gs{1e-2, 1e-3, 1e-4};
    std::vector<CMatrix> P;
    Eigen::Index dim = -1;
    for (double g : gs) {
        Frequency zg(z.tau, g, z.eta);
        CMatrix Q;
        try {
            Q = spectral_split(hyperbolic_operator(m, zg)).unstableBasis;
        } catch (const Error&) {
            throw Error(ErrorKind::GlancingLimitFailure, "E_+ is not defined along gamma -> 0");
        }
        if (dim >= 0 && Q.cols() != dim)
            throw Error(ErrorKind::GlancingLimitFailure, "dimension of E_+ changes along gamma -> 0");
        dim = Q.cols();
        P.push_back(orth_projector(Q));
    }
    CMatrix P0 = extrapolate_to_zero(gs, P);
    P0 = 0.5 * (P0 + P0.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(P0);
    // eigenvalues ascending: the top `dim` eigenvectors span the limit space
    out.basis = es.eigenvectors().rightCols(dim);
    snap_to_eigenvectors(hyperbolic_operator(m, Frequency(z.tau, 0.0, z.eta)), out.basis);
    return out;
}

LopatinskiScanRecord uniform_lop_det(const HyperbolicParabolicModel& m, const ReducedBC& r, const Frequency& z) {
    LopatinskiScanRecord rec;
    rec.zeta = z;
    const CMatrix B = lopatinski_boundary_matrix(m, r, z);
    const PlusSpace plus = plus_space(m, z);
    rec.glancingFlag = plus.limit;
    const CMatrix K = nullspace(B);
    rec.kernelDim = static_cast<int>(K.cols());
    if (K.cols() + plus.basis.cols() == m.N)
        rec.detUniform = subspace_det(K, plus.basis);
    else
        rec.detUniform = 0.0;
    if (B.rows() == plus.basis.cols()) {
        double rows = 1;
        for (Eigen::Index i = 0; i < B.rows(); ++i) rows *= B.row(i).norm();
        const CMatrix BE = B * plus.basis;
        rec.proxy = rows > 0 ? std::abs(BE.determinant()) / rows : 0.0;
    }
    try {
        const auto pinv = pseudo_inverse(B);
        rec.wellCond = std::max(pinv.normGamma, pinv.normPinv);
    } catch (const Error&) {
        rec.wellCond = std::numeric_limits<double>::infinity();
    }
    return rec;
}

std::vector<Frequency> hemisphere_level(int d, double gamma, int pointsPerDim) {
    std::vector<Frequency> out;
    const double rad = std::sqrt(std::max(0.0, 1.0 - gamma * gamma));
    if (rad == 0.0) {
        out.emplace_back(0.0, 1.0, RVector::Zero(d - 1));
        return out;
    }
    if (d == 1) {
        out.emplace_back(rad, gamma, RVector());
        out.emplace_back(-rad, gamma, RVector());
        return out;
    }
    // hyperspherical angles: the last one on [0, 2 pi), the others on [0, pi]
    const int nang = d - 1;
    std::vector<int> idx(nang, 0);
    const int P = std::max(2, pointsPerDim);
    while (true) {
        RVector x(d);
        double s = rad;
        for (int a = 0; a < nang; ++a) {
            const bool last = a == nang - 1;
            const double th = last ? 2 * kPi * idx[a] / P : kPi * idx[a] / (P - 1);
            if (last) {
                x(a) = s * std::cos(th);
                x(a + 1) = s * std::sin(th);
            } else {
                x(a) = s * std::cos(th);
                s *= std::sin(th);
            }
        }
        out.emplace_back(x(0), gamma, RVector(x.tail(d - 1)));
        int a = nang - 1;
        while (a >= 0 && ++idx[a] == P) idx[a--] = 0;
        if (a < 0) break;
    }
    return out;
}

namespace {

constexpr double kMaxChart = 1e3;  // |(tau, eta)| / gamma bound, i.e. normalized gamma >= ~1e-3

}  // namespace

std::pair<Frequency, double> weak_failure_search(const HyperbolicParabolicModel& m, const ReducedBC& r,
                                                 const std::vector<Frequency>& starts) {
    const int d = m.d;
    auto to_freq = [&](const RVector& p) {
        Frequency z(p(0), 1.0, RVector(p.tail(d - 1)));
        return z.hat();
    };
    Objective f = [&](const RVector& p) {
        const double pn = p.norm();
        double pen = pn > kMaxChart ? pn - kMaxChart : 0.0;
        try {
            return uniform_lop_det(m, r, to_freq(p)).proxy + pen;
        } catch (const Error&) {
            return 1.0 + pen;
        }
    };
    Frequency best(0.0, 1.0, RVector::Zero(d - 1));
    double bestVal = std::numeric_limits<double>::infinity();
    for (const Frequency& s : starts) {
        if (s.gamma <= 0) continue;
        RVector x0(d);
        x0(0) = s.tau / s.gamma;
        x0.tail(d - 1) = s.eta / s.gamma;
        auto [x, v] = nelder_mead(f, x0, 0.1 * (1 + x0.norm()), 4000);
        // polish from the best point with a smaller simplex
        auto [x2, v2] = nelder_mead(f, x, 1e-3 * (1 + x.norm()), 4000);
        if (v2 < v) {
            x = x2;
            v = v2;
        }
        if (v < bestVal && x.norm() <= kMaxChart) {
            bestVal = v;
            best = to_freq(x);
        }
    }
    return {best, bestVal};
}

StabilityReport scan_uniform(const HyperbolicParabolicModel& m, const ReducedBC& r, const HemisphereGrid& grid) {
    StabilityReport rep;
    rep.model = m.name;
    rep.cls = r.cls;
    rep.threshold = grid.threshold;
    rep.totallyIncoming = m.totally_incoming();
    std::vector<Frequency> pts;
    std::vector<size_t> levelStart;
    for (double g : grid.gammaLevels) {
        levelStart.push_back(pts.size());
        for (auto& z : hemisphere_level(m.d, g, grid.pointsPerDim)) pts.push_back(z);
    }
    levelStart.push_back(pts.size());
    rep.records.resize(pts.size());
    parallel_for(pts.size(), grid.jobs, [&](size_t i) {
        try {
            rep.records[i] = uniform_lop_det(m, r, pts[i]);
        } catch (const Error& e) {
            rep.records[i].zeta = pts[i];
            rep.records[i].error = e.what();
        }
    });

    rep.minAbsDet = rep.minAbsDetPositiveGamma = std::numeric_limits<double>::infinity();
    std::vector<std::pair<double, size_t>> candidates;
    for (size_t l = 0; l + 1 < levelStart.size(); ++l) {
        LevelMinimum lm;
        lm.gamma = grid.gammaLevels[l];
        lm.minAbsDet = std::numeric_limits<double>::infinity();
        for (size_t i = levelStart[l]; i < levelStart[l + 1]; ++i) {
            const auto& rec = rep.records[i];
            if (!rec.error.empty()) {
                ++rep.failedPoints;
                continue;
            }
            const double a = std::abs(rec.detUniform);
            if (a < lm.minAbsDet) {
                lm.minAbsDet = a;
                lm.argmin = rec.zeta;
            }
            rep.maxWellCond = std::max(rep.maxWellCond, rec.wellCond);
            if (rec.zeta.gamma >= 1e-3) candidates.emplace_back(rec.proxy, i);
        }
        rep.levels.push_back(lm);
        if (lm.minAbsDet < rep.minAbsDet) {
            rep.minAbsDet = lm.minAbsDet;
            rep.argmin = lm.argmin;
        }
        if (lm.gamma > 0) rep.minAbsDetPositiveGamma = std::min(rep.minAbsDetPositiveGamma, lm.minAbsDet);
    }

    if (m.d >= 2) {
        std::vector<RVector> dirs;
        if (m.d == 2) {
            dirs.push_back(RVector::Constant(1, 1.0));
            dirs.push_back(RVector::Constant(1, -1.0));
        } else {
            for (auto& z : hemisphere_level(m.d - 1, 0.0, std::max(4, grid.pointsPerDim / 8))) {
                RVector e(m.d - 1);
                e(0) = z.tau;
                e.tail(m.d - 2) = z.eta;
                dirs.push_back(e);
            }
        }
        for (const auto& e : dirs)
            for (const auto& gp : glancing_detector(m, e)) rep.glancing.push_back(Frequency(gp.tau, 0.0, gp.eta).hat());
    }

    // weak failure: a zero of the continuous proxy at normalized gamma >= 1e-3
    std::sort(candidates.begin(), candidates.end());
    std::vector<Frequency> starts;
    for (size_t k = 0; k < candidates.size() && starts.size() < 6; ++k) starts.push_back(rep.records[candidates[k].second].zeta);
    if (!candidates.empty() && candidates.front().first < 1e-10) {
        rep.weakFailureWitness = rep.records[candidates.front().second].zeta;
        rep.weakFailureValue = candidates.front().first;
    }
    if (!starts.empty()) {
        auto [z, v] = weak_failure_search(m, r, starts);
        if (v < rep.weakFailureValue && z.gamma >= 1e-3) {
            rep.weakFailureValue = v;
            if (v < 1e-10) rep.weakFailureWitness = z;
        }
    }

    if (rep.weakFailureWitness) {
        rep.verdict = LopVerdict::FAILS_WEAK;
    } else if (rep.totallyIncoming) {
        // totally incoming: weak stability implies uniform stability
        rep.verdict = LopVerdict::UNIFORM;
        rep.incomingImplicationApplied = rep.minAbsDet < grid.threshold;
    } else {
        rep.verdict = rep.minAbsDet >= grid.threshold ? LopVerdict::UNIFORM : LopVerdict::WEAK_ONLY;
    }
    return rep;
}

std::vector<GlancingPoint> glancing_detector(const HyperbolicParabolicModel& m, const RVector& eta) {
    std::vector<GlancingPoint> out;
    if (m.d < 2 || eta.size() != m.d - 1 || eta.norm() == 0.0) return out;
    const RMatrix Ad = m.Ad();
    RMatrix B0 = RMatrix::Zero(m.N, m.N);
    for (int j = 1; j < m.d; ++j) B0 += eta(j - 1) * m.A_base(j);
    auto branches = [&](double xi) {
        const CVector ev = eigenvalues(RMatrix(B0 + xi * Ad));
        RVector lam(ev.size());
        for (Eigen::Index k = 0; k < ev.size(); ++k) lam(k) = ev(k).real();
        std::sort(lam.data(), lam.data() + lam.size());
        return lam;
    };
    const double h = 1e-4, thr = 1e-6;
    auto slope = [&](double xi, int j) { return (branches(xi + h)(j) - branches(xi - h)(j)) / (2 * h); };
    Eigen::JacobiSVD<RMatrix> svd(Ad);
    const double L = 10.0 * (B0.norm() / svd.singularValues().minCoeff() + 1.0);
    const int S = 4000;
    const double slopeScale = 1e-2 * (1.0 + Ad.norm());
    for (int j = 0; j < m.N; ++j) {
        double xPrev = -L, sPrev = slope(xPrev, j);
        for (int k = 1; k <= S; ++k) {
            const double x = -L + 2 * L * k / S;
            const double s = slope(x, j);
            if ((sPrev < 0) != (s < 0) || s == 0.0) {
                double a = xPrev, b = x, sa = sPrev;
                for (int it = 0; it < 80; ++it) {
                    const double c = 0.5 * (a + b), sc = slope(c, j);
                    if ((sa < 0) == (sc < 0)) {
                        a = c;
                        sa = sc;
                    } else {
                        b = c;
                    }
                }
                const double xs = 0.5 * (a + b);
                const double lam = branches(xs)(j);
                const double fwd = (branches(xs + h)(j) - lam) / h, bwd = (lam - branches(xs - h)(j)) / h;
                bool seen = false;
                for (const auto& q : out) seen = seen || (q.branch == j && std::abs(q.xi - xs) < 1e-6 * (1 + L));
                if (!seen && std::abs(slope(xs, j)) < thr && std::abs(fwd) < slopeScale && std::abs(bwd) < slopeScale) {
                    GlancingPoint g;
                    g.tau = -lam;
                    g.eta = eta;
                    g.xi = xs;
                    g.branch = j;
                    out.push_back(g);
                }
            }
            xPrev = x;
            sPrev = s;
        }
    }
    return out;
}

std::string stability_csv(const StabilityReport& rep) {
    std::ostringstream os;
    const int neta = rep.records.empty() ? 0 : static_cast<int>(rep.records.front().zeta.eta.size());
    os << "tau,gamma";
    for (int j = 1; j <= neta; ++j) os << ",eta" << j;
    os << ",abs_det,well_cond,glancing\n";
    for (const auto& r : rep.records) {
        os << fmt17(r.zeta.tau) << ',' << fmt17(r.zeta.gamma);
        for (int j = 0; j < neta; ++j) os << ',' << fmt17(r.zeta.eta(j));
        if (r.error.empty())
            os << ',' << fmt17(std::abs(r.detUniform)) << ',' << fmt17(r.wellCond) << ',' << (r.glancingFlag ? 1 : 0);
        else
            os << ",nan,nan," << (r.glancingFlag ? 1 : 0);
        os << '\n';
    }
    return os.str();
}

}  // namespace hpbl
