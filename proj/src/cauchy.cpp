#include "hpbl/cauchy.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "hpbl/optimize.hpp"
#include "hpbl/parallel.hpp"
#include "hpbl/symbols.hpp"

namespace hpbl {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kMaxWitnessesPerFlag = 8;

CMatrix ad_inverse(const HyperbolicParabolicModel& m) {
    const RMatrix Ad = m.Ad();
    Eigen::FullPivLU<RMatrix> lu(Ad);
    if (!lu.isInvertible()) throw Error(ErrorKind::SingularAd, "A_d is singular at the base state");
    return lu.inverse().cast<Complex>();
}

CMatrix vstack(const std::vector<CMatrix>& blocks, Eigen::Index cols) {
    Eigen::Index rows = 0;
    for (const auto& b : blocks) rows += b.rows();
    CMatrix out(rows, cols);
    Eigen::Index r = 0;
    for (const auto& b : blocks) {
        out.middleRows(r, b.rows()) = b;
        r += b.rows();
    }
    return out;
}

CMatrix eta_combination(const std::vector<CMatrix>& mats, const RVector& eta, Complex factor, Eigen::Index n) {
    CMatrix out = CMatrix::Zero(n, n);
    for (size_t j = 0; j < mats.size(); ++j) out += factor * eta(static_cast<Eigen::Index>(j)) * mats[j];
    return out;
}

// A_j A_0^{-1} of the enlarged system at zeta0.
std::vector<CMatrix> right_generators(const HyperbolicParabolicModel& m, const ReducedBC& r, const Frequency& zeta0) {
    const TangentialSystem ts = enlarged_system(m, r, zeta0);
    if (!evolutionary_check(ts).evolutionary)
        throw Error(ErrorKind::NotEvolutionaryAtPoint, "A_0 of the enlarged boundary system is singular");
    const auto lu = ts.A0coef.adjoint().partialPivLu();
    std::vector<CMatrix> out;
    for (const auto& Aj : ts.Ajcoefs) out.push_back(lu.solve(Aj.adjoint()).adjoint());
    return out;
}

std::vector<int> pattern_of(const std::vector<EigenCluster<Complex>>& cl) {
    std::vector<int> p;
    for (const auto& c : cl) p.push_back(c.algebraic);
    std::sort(p.begin(), p.end(), std::greater<int>());
    return p;
}

int coincident_pairs(const std::vector<int>& pattern) {
    int k = 0;
    for (int a : pattern) k += a * (a - 1) / 2;
    return k;
}

// Relative pairwise eigenvalue distances in ascending order.
std::vector<double> pair_gaps(const CVector& ev, double scale) {
    std::vector<double> g;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        for (Eigen::Index j = i + 1; j < ev.size(); ++j) g.push_back(std::abs(ev(i) - ev(j)) / scale);
    std::sort(g.begin(), g.end());
    return g;
}

struct EtaSample {
    RVector eta;
    std::vector<int> pattern;
    bool semisimple = true;
    double maxRe = 0;  // relative
    std::vector<double> gaps;
};

struct FrozenSample {
    Frequency zeta0;
    std::string error;
    ErrorKind errorKind = ErrorKind::NumericalFailure;
    std::vector<EtaSample> etas;
};

EtaSample analyse_generator(const CMatrix& A, const RVector& eta, double radius) {
    EtaSample s;
    s.eta = eta;
    const double scale = std::max(1.0, A.norm());
    const auto cl = eigen_clusters(A, radius);
    s.pattern = pattern_of(cl);
    for (const auto& c : cl) {
        if (c.geometric != c.algebraic) s.semisimple = false;
    }
    const CVector ev = eigenvalues(A);
    for (Eigen::Index k = 0; k < ev.size(); ++k) s.maxRe = std::max(s.maxRe, std::abs(ev(k).real()) / scale);
    s.gaps = pair_gaps(ev, scale);
    return s;
}

FrozenSample sample_frozen(const HyperbolicParabolicModel& m, const ReducedBC& r, const Frequency& z0,
                           const std::vector<RVector>& etas, double radius) {
    FrozenSample fs;
    fs.zeta0 = z0;
    try {
        const auto gens = enlarged_frozen_generators(m, r, z0);
        for (const auto& eta : etas) fs.etas.push_back(analyse_generator(eta_combination(gens, eta, I_unit, m.N), eta, radius));
    } catch (const Error& e) {
        fs.error = e.what();
        fs.errorKind = e.kind();
    }
    return fs;
}

void add_witness(CauchyDiagnostics& dg, std::map<std::string, int>& counts, const std::string& flag,
                 const Frequency& z0, const RVector& eta, double value, const std::string& note) {
    for (const auto& w : dg.witnesses)
        if (w.flag == flag && w.zeta0.tau == z0.tau && w.zeta0.gamma == z0.gamma && w.zeta0.eta == z0.eta && w.eta == eta)
            return;
    if (counts[flag]++ >= kMaxWitnessesPerFlag) return;
    dg.witnesses.push_back({flag, z0, eta, value, note});
}

std::string pattern_text(const std::vector<int>& p) {
    std::string s = "(";
    for (size_t i = 0; i < p.size(); ++i) s += (i ? "," : "") + std::to_string(p[i]);
    return s + ")";
}

// Folds one frozen sample into the diagnostics; the first good sample fixes the reference pattern.
void merge_sample(CauchyDiagnostics& dg, std::map<std::string, int>& counts, const FrozenSample& fs,
                  const CauchyScanOptions& opt, const std::string& note) {
    if (!fs.error.empty()) {
        ++dg.failedPoints;
        if (fs.errorKind == ErrorKind::NotEvolutionaryAtPoint) dg.evolutionary = false;
        add_witness(dg, counts, "evaluation", fs.zeta0, RVector(), 0, fs.error);
        return;
    }
    for (const auto& s : fs.etas) {
        ++dg.samples;
        if (dg.multiplicityPattern.empty()) dg.multiplicityPattern = s.pattern;
        if (!s.semisimple) {
            dg.semisimple = false;
            add_witness(dg, counts, "semisimple", fs.zeta0, s.eta, 0, note + "defective eigenvalue, pattern " + pattern_text(s.pattern));
        }
        if (s.pattern != dg.multiplicityPattern) {
            dg.constantMultiplicity = false;
            add_witness(dg, counts, "constantMultiplicity", fs.zeta0, s.eta, 0,
                        note + "pattern " + pattern_text(s.pattern) + " vs " + pattern_text(dg.multiplicityPattern));
        }
        if (s.maxRe > opt.imagTol) {
            dg.pureImaginary = false;
            add_witness(dg, counts, "pureImaginary", fs.zeta0, s.eta, s.maxRe, note + "max |Re lambda| / scale");
        }
    }
}

Frequency chart_to_frequency(const RVector& x, int d) {
    // x = (tau, g, eta...), gamma = |g|, normalized
    Frequency z(x(0), std::abs(x(1)), RVector(x.tail(d - 1)));
    return z.hat();
}

RVector frequency_to_chart(const Frequency& z) {
    const int d = static_cast<int>(z.eta.size()) + 1;
    RVector x(d + 1);
    x(0) = z.tau;
    x(1) = z.gamma;
    x.tail(d - 1) = z.eta;
    return x;
}

std::vector<FrozenSample> sample_grid(const HyperbolicParabolicModel& m, const ReducedBC& r,
                                      const std::vector<Frequency>& pts, const std::vector<RVector>& etas,
                                      const CauchyScanOptions& opt) {
    std::vector<FrozenSample> out(pts.size());
    parallel_for(pts.size(), opt.jobs, [&](size_t i) { out[i] = sample_frozen(m, r, pts[i], etas, opt.radius); });
    return out;
}

std::vector<Frequency> filter_eta0(const std::vector<Frequency>& pts, double minEta0) {
    std::vector<Frequency> out;
    for (const auto& z : pts)
        if (minEta0 <= 0 || z.eta_norm() >= minEta0) out.push_back(z);
    return out;
}

ResolventScan scan_resolvent(const std::vector<Frequency>& base, const std::vector<Frequency>& fine, int jobs,
                             const std::function<double(const Frequency&)>& value) {
    ResolventScan out;
    auto run = [&](const std::vector<Frequency>& pts, Frequency* arg, int* failed) {
        std::vector<double> v(pts.size(), std::numeric_limits<double>::quiet_NaN());
        parallel_for(pts.size(), jobs, [&](size_t i) {
            try {
                v[i] = value(pts[i]);
            } catch (const Error&) {
            }
        });
        double C = 0;
        for (size_t i = 0; i < pts.size(); ++i) {
            if (std::isnan(v[i])) {
                ++*failed;
                continue;
            }
            if (v[i] > C || std::isinf(v[i])) {
                C = v[i];
                if (arg) *arg = pts[i];
            }
        }
        return C;
    };
    out.C = run(base, nullptr, &out.failedPoints);
    out.Crefined = run(fine, &out.argmax, &out.failedPoints);
    out.samples = static_cast<int>(base.size() + fine.size());
    out.ratio = out.C > 0 ? out.Crefined / out.C : std::numeric_limits<double>::infinity();
    out.pass = std::isfinite(out.C) && std::isfinite(out.Crefined) && out.ratio <= 1.5;
    return out;
}

}  // namespace

TangentialSystem tangential_system(const HyperbolicParabolicModel& m, const ReducedBC& r) {
    const CMatrix AdInv = ad_inverse(m);
    const CMatrix G1 = r.dirichlet_rows(m).cast<Complex>();
    const CMatrix G2 = r.neumann_rows(m.N).cast<Complex>();
    TangentialSystem ts;
    ts.A0coef = vstack({G1, CMatrix(-G2 * AdInv)}, m.N);
    for (int j = 1; j < m.d; ++j) {
        const CMatrix lower = -G2 * AdInv * m.A_base(j).cast<Complex>();
        ts.Ajcoefs.push_back(vstack({CMatrix::Zero(G1.rows(), m.N), lower}, m.N));
    }
    return ts;
}

CMatrix gamma0_rows(const HyperbolicParabolicModel& m, const Frequency& zeta0) {
    if (zeta0.rho() == 0.0) throw Error(ErrorKind::ZeroFrequency, "the frozen frequency must be nonzero");
    const PlusSpace plus = plus_space(m, zeta0);
    return left_nullspace_rows(plus.basis);
}

TangentialSystem enlarged_system(const HyperbolicParabolicModel& m, const ReducedBC& r, const Frequency& zeta0) {
    const CMatrix AdInv = ad_inverse(m);
    const CMatrix G0 = gamma0_rows(m, zeta0);
    const CMatrix G1 = r.dirichlet_rows(m).cast<Complex>();
    const CMatrix G2 = r.neumann_rows(m.N).cast<Complex>();
    TangentialSystem ts;
    ts.enlarged = true;
    ts.frozenAt = zeta0;
    ts.A0coef = vstack({G0, G1, CMatrix(G2 * AdInv)}, m.N);
    for (int j = 1; j < m.d; ++j) {
        const CMatrix lower = G2 * AdInv * m.A_base(j).cast<Complex>();
        ts.Ajcoefs.push_back(vstack({CMatrix::Zero(G0.rows() + G1.rows(), m.N), lower}, m.N));
    }
    return ts;
}

std::vector<CMatrix> enlarged_frozen_generators(const HyperbolicParabolicModel& m, const ReducedBC& r,
                                                const Frequency& zeta0) {
    const TangentialSystem ts = enlarged_system(m, r, zeta0);
    if (!evolutionary_check(ts).evolutionary)
        throw Error(ErrorKind::NotEvolutionaryAtPoint, "A_0 of the enlarged boundary system is singular");
    const auto lu = ts.A0coef.partialPivLu();
    std::vector<CMatrix> out;
    for (const auto& Aj : ts.Ajcoefs) out.push_back(lu.solve(Aj));
    return out;
}

EvolutionaryResult evolutionary_check(const TangentialSystem& ts, double tol) {
    EvolutionaryResult out;
    const CMatrix& A = ts.A0coef;
    if (A.rows() != A.cols() || A.rows() == 0) return out;
    Eigen::JacobiSVD<CMatrix> svd(A);
    const auto& sv = svd.singularValues();
    const double smax = sv(0), smin = sv(sv.size() - 1);
    out.condition = smin > 0 ? smax / smin : std::numeric_limits<double>::infinity();
    out.evolutionary = smax > 0 && smin > tol * smax;
    return out;
}

std::vector<RVector> eta_sphere(int d, int points) {
    std::vector<RVector> out;
    if (d <= 1) return out;
    if (d == 2) {
        out.push_back(RVector::Constant(1, 1.0));
        out.push_back(RVector::Constant(1, -1.0));
        return out;
    }
    for (const auto& z : hemisphere_level(d - 1, 0.0, points)) {
        RVector e(d - 1);
        e(0) = z.tau;
        e.tail(d - 2) = z.eta;
        out.push_back(e);
    }
    return out;
}

CauchyDiagnostics weak_hyperbolicity_check(const TangentialSystem& ts, const std::vector<RVector>& etaGrid, double tol) {
    const auto ev = evolutionary_check(ts);
    if (!ev.evolutionary) throw Error(ErrorKind::NotEvolutionary, "the coefficient of d_t is not invertible");
    CauchyDiagnostics dg;
    dg.evolutionary = true;
    dg.weaklyHyperbolic = true;
    if (ts.Ajcoefs.empty()) return dg;
    std::map<std::string, int> counts;
    const auto lu = ts.A0coef.partialPivLu();
    const Eigen::Index n = ts.A0coef.rows();
    for (const auto& eta : etaGrid) {
        const CMatrix L = lu.solve(eta_combination(ts.Ajcoefs, eta, 1.0, n));
        const CVector roots = eigenvalues(CMatrix(-L));
        const double scale = std::max(1.0, L.norm());
        double maxIm = 0;
        for (Eigen::Index k = 0; k < roots.size(); ++k) maxIm = std::max(maxIm, std::abs(roots(k).imag()));
        dg.rootsByEta.emplace_back(eta, roots);
        ++dg.samples;
        if (maxIm > tol * scale) {
            dg.weaklyHyperbolic = false;
            add_witness(dg, counts, "weaklyHyperbolic", ts.frozenAt.value_or(Frequency()), eta, maxIm,
                        "non-real root in tau");
        }
    }
    return dg;
}

std::vector<Frequency> frozen_grid(int d, int P) {
    std::vector<Frequency> out;
    const int K = std::max(2, P / 8);
    for (int k = 0; k < K; ++k) {
        const double g = std::sin(k * kPi / (2 * K));
        for (const auto& z : hemisphere_level(d, g, P)) out.push_back(z);
    }
    out.push_back(Frequency(0.0, 1.0, RVector::Zero(d - 1)));
    return out;
}

CauchyDiagnostics semisimple_constmult_scan(const HyperbolicParabolicModel& m, const ReducedBC& r,
                                            const CauchyScanOptions& opt) {
    CauchyDiagnostics dg;
    dg.evolutionary = true;
    std::map<std::string, int> counts;
    std::vector<RVector> etas = eta_sphere(m.d, opt.etaPoints);
    if (etas.empty()) etas.push_back(RVector());  // d = 1: the generator is empty, A = 0
    const auto grid = filter_eta0(frozen_grid(m.d, opt.frozenPoints), opt.minEta0);
    const auto samples = sample_grid(m, r, grid, etas, opt);
    for (const auto& fs : samples) merge_sample(dg, counts, fs, opt, "");
    if (!opt.refine) return dg;

    std::vector<RVector> etas2 = eta_sphere(m.d, 2 * opt.etaPoints);
    if (etas2.empty()) etas2.push_back(RVector());
    const auto grid2 = filter_eta0(frozen_grid(m.d, 2 * opt.frozenPoints), opt.minEta0);
    for (const auto& fs : sample_grid(m, r, grid2, etas2, opt)) merge_sample(dg, counts, fs, opt, "refined grid: ");

    // Coalescence search: minimize the first non-structural eigenvalue gap from the closest grid samples.
    if (m.d < 2 || dg.multiplicityPattern.empty()) return dg;
    const size_t k0 = static_cast<size_t>(coincident_pairs(dg.multiplicityPattern));
    struct Start {
        double gap;
        Frequency z;
        RVector eta;
    };
    std::vector<Start> starts;
    for (const auto& fs : samples)
        for (const auto& s : fs.etas)
            if (k0 < s.gaps.size()) starts.push_back({s.gaps[k0], fs.zeta0, s.eta});
    std::stable_sort(starts.begin(), starts.end(), [](const Start& a, const Start& b) { return a.gap < b.gap; });
    if (starts.size() > 4) starts.resize(4);
    std::vector<FrozenSample> refined(starts.size());
    parallel_for(starts.size(), opt.jobs, [&](size_t i) {
        const RVector eta = starts[i].eta;
        Objective f = [&](const RVector& x) {
            const Frequency z = chart_to_frequency(x, m.d);
            if (opt.minEta0 > 0 && z.eta_norm() < opt.minEta0) return 1e3;
            try {
                const auto gens = enlarged_frozen_generators(m, r, z);
                const CMatrix A = eta_combination(gens, eta, I_unit, m.N);
                const auto g = pair_gaps(eigenvalues(A), std::max(1.0, A.norm()));
                return k0 < g.size() ? g[k0] : 1e3;
            } catch (const Error&) {
                return 1e3;
            }
        };
        auto [x, v] = nelder_mead(f, frequency_to_chart(starts[i].z), 0.05, 1500, 1e-16);
        auto [x2, v2] = nelder_mead(f, x, 1e-4, 1500, 1e-18);
        if (v2 < v) x = x2;
        refined[i] = sample_frozen(m, r, chart_to_frequency(x, m.d), {eta}, opt.radius);
    });
    for (const auto& fs : refined) merge_sample(dg, counts, fs, opt, "coalescence search: ");
    return dg;
}

std::vector<Frequency> resolvent_samples(int d, int levelsPerDecade, int decades, int P) {
    std::vector<Frequency> out;
    for (int k = 0; k <= levelsPerDecade * decades; ++k) {
        const double g = std::pow(10.0, -double(k) / levelsPerDecade);
        for (const auto& z : hemisphere_level(d, g, P)) out.push_back(z);
    }
    return out;
}

ResolventScan resolvent_norm_scan(const HyperbolicParabolicModel& m, const ReducedBC& r, int P, int jobs) {
    auto value = [&](const Frequency& z) {
        CMatrix R = z.s() * CMatrix::Identity(m.N, m.N);
        if (m.d > 1) R += eta_combination(enlarged_frozen_generators(m, r, z), z.eta, I_unit, m.N);
        Eigen::JacobiSVD<CMatrix> svd(R);
        const double smin = svd.singularValues()(m.N - 1);
        return smin > 0 ? z.gamma / smin : std::numeric_limits<double>::infinity();
    };
    return scan_resolvent(resolvent_samples(m.d, 2, 3, P), resolvent_samples(m.d, 4, 4, 2 * P), jobs, value);
}

ReducedBlockScan reduced_block_scan(const HyperbolicParabolicModel& m, const ReducedBC& r, int P, int jobs) {
    const Eigen::Index k = r.neumann_rows(m.N).rows();
    ReducedBlockScan out;
    auto block = [&](const Frequency& z) {
        CMatrix a = CMatrix::Zero(k, k);
        if (m.d > 1) {
            const auto gens = right_generators(m, r, z);
            a = eta_combination(gens, z.eta, I_unit, m.N).bottomRightCorner(k, k);
        }
        return a;
    };
    auto value = [&](const Frequency& z) {
        CMatrix R = block(z);
        R.diagonal().array() += z.s();
        if (k == 0) return 0.0;
        Eigen::JacobiSVD<CMatrix> svd(R);
        const double smin = svd.singularValues()(k - 1);
        return smin > 0 ? z.gamma / smin : std::numeric_limits<double>::infinity();
    };
    out.resolvent = scan_resolvent(resolvent_samples(m.d, 2, 3, P), resolvent_samples(m.d, 4, 4, 2 * P), jobs, value);
    out.minDetAtZero = std::numeric_limits<double>::infinity();
    for (const auto& eta : eta_sphere(m.d, P)) {
        try {
            out.minDetAtZero = std::min(out.minDetAtZero, std::abs(block(Frequency(0.0, 0.0, eta)).determinant()));
        } catch (const Error&) {
            out.minDetAtZero = 0;
        }
    }
    out.pass = out.resolvent.pass && (k == 0 || out.minDetAtZero > 1e-8);
    return out;
}

SharpScalarResult sharp_scalar_condition(const HyperbolicParabolicModel& m, const ReducedBC& r,
                                         const std::vector<RVector>& etaGrid, double tol) {
    if (r.neumann_rows(m.N).rows() != 1)
        throw Error(ErrorKind::WrongShape, "the scalar condition needs exactly one reduced Neumann row");
    SharpScalarResult out;
    if (m.d < 2) return out;
    const Eigen::Index n = m.N - 1;
    for (const auto& eta : etaGrid) {
        const auto gens = right_generators(m, r, Frequency(0.0, 0.0, eta));
        Complex v = 0;
        for (size_t j = 0; j < gens.size(); ++j) v += I_unit * eta(static_cast<Eigen::Index>(j)) * gens[j](n, n);
        out.values.emplace_back(eta, v);
        out.minAbs = std::min(out.minAbs, std::abs(v));
    }
    out.pass = out.minAbs > tol;
    return out;
}

Complex lopver_quantity(const HyperbolicParabolicModel& m, const ReducedBC& r, const Frequency& zeta) {
    if (zeta.rho() == 0.0) throw Error(ErrorKind::ZeroFrequency, "zeta must be nonzero");
    const Frequency z = zeta.hat();
    const CMatrix AdInv = ad_inverse(m);
    const CMatrix G1 = r.dirichlet_rows(m).cast<Complex>();
    const CMatrix G2 = r.neumann_rows(m.N).cast<Complex>();
    const CMatrix M = vstack({G1, CMatrix(G2 * AdInv * tangential_symbol(m, z))}, m.N);
    if (M.rows() > 0 && numerical_rank(M) < M.rows())
        throw Error(ErrorKind::RankConditionFails, "(Gamma_1; Gamma~_2 A_d^{-1}(gamma + i tau + i sum eta_j A_j)) is rank deficient");
    const TangentialSystem ts = enlarged_system(m, r, z);
    if (!evolutionary_check(ts).evolutionary)
        throw Error(ErrorKind::NotEvolutionaryAtPoint, "A_0 of the enlarged boundary system is singular");
    // det(s + sum i eta_j A~_j) = s^{N - rank} det(Gamma_0; M) / det(A_0): the power of s cancels exactly.
    const CMatrix G0 = ts.A0coef.topRows(ts.A0coef.rows() - M.rows());
    const CMatrix top = vstack({G0, M}, m.N);
    return top.partialPivLu().determinant() / ts.A0coef.partialPivLu().determinant();
}

CMatrix block_resolvent_inverse(Complex s, const CVector& b, Complex a) {
    const Eigen::Index n = b.size() + 1;
    CMatrix out = CMatrix::Zero(n, n);
    out.topLeftCorner(n - 1, n - 1).diagonal().setConstant(1.0 / s);
    out.bottomLeftCorner(1, n - 1) = (-b / (s * (s + a))).transpose();
    out(n - 1, n - 1) = 1.0 / (s + a);
    return out;
}

CauchyDiagnostics cauchy_diagnostics(const HyperbolicParabolicModel& m, const ReducedBC& r,
                                     const CauchyScanOptions& opt) {
    CauchyDiagnostics dg = semisimple_constmult_scan(m, r, opt);
    const auto etas = eta_sphere(m.d, opt.etaPoints);
    if (m.totally_incoming()) {
        const TangentialSystem ts = tangential_system(m, r);
        dg.evolutionary = evolutionary_check(ts).evolutionary;
        if (dg.evolutionary) {
            const CauchyDiagnostics wh = weak_hyperbolicity_check(ts, etas);
            dg.weaklyHyperbolic = wh.weaklyHyperbolic;
            dg.rootsByEta = wh.rootsByEta;
            dg.witnesses.insert(dg.witnesses.end(), wh.witnesses.begin(), wh.witnesses.end());
        } else {
            dg.weaklyHyperbolic = false;
        }
    } else {
        // frozen form: real roots in tau at every frozen point is the pure-imaginary property of A(eta; zeta0)
        dg.weaklyHyperbolic = dg.evolutionary && dg.pureImaginary;
        try {
            const TangentialSystem ts = enlarged_system(m, r, Frequency(0.0, 1.0, RVector::Zero(m.d - 1)));
            if (evolutionary_check(ts).evolutionary) dg.rootsByEta = weak_hyperbolicity_check(ts, etas).rootsByEta;
        } catch (const Error&) {
        }
    }
    const ResolventScan rs = resolvent_norm_scan(m, r, opt.frozenPoints, opt.jobs);
    dg.resolventConstant = rs.Crefined;
    dg.resolventStable = rs.pass;
    if (r.neumann_rows(m.N).rows() == 1) {
        try {
            dg.sharpScalar = sharp_scalar_condition(m, r, etas).values;
        } catch (const Error&) {
        }
    }
    return dg;
}

}  // namespace hpbl
