#include "hpbl/harness.hpp"

#include <chrono>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "hpbl/expr.hpp"
#include "hpbl/io.hpp"
#include "hpbl/parallel.hpp"

namespace hpbl {

Json frequency_json(const Frequency& z) {
    Json j;
    j["tau"] = z.tau;
    j["gamma"] = z.gamma;
    Json e = Json::array();
    for (Eigen::Index k = 0; k < z.eta.size(); ++k) e.push_back(z.eta(k));
    j["eta"] = e;
    return j;
}

// ---- Evans ----

namespace {

std::vector<Frequency> evans_points(int d, double rhoMax, int radii, double radiusRatio, int P,
                                    const std::vector<double>& levels) {
    std::vector<Frequency> pts;
    for (int k = 0; k < radii; ++k) {
        const double rho = rhoMax * std::pow(radiusRatio, -k);
        for (double g : levels)
            for (const auto& dir : hemisphere_level(d, g, P)) pts.push_back(dir.scaled(rho));
    }
    return pts;
}

std::vector<EvansRow> evaluate_evans(const HyperbolicParabolicModel& m, const std::vector<Frequency>& pts, int jobs,
                                     int& failed) {
    std::vector<EvansRow> rows(pts.size());
    std::vector<char> ok(pts.size(), 1);
    parallel_for(pts.size(), jobs, [&](std::size_t i) {
        EvansRow& r = rows[i];
        r.zeta = pts[i];
        try {
            const auto bd = block_diagonalize(m, pts[i]);
            r.absD = std::abs(bd.H.determinant());
            r.R = degeneracy_R(m, pts[i]);
            const double rho = pts[i].rho();
            r.weighted = r.R / (pts[i].gamma + rho * rho);
            try {
                r.ratioAbs = std::abs(r.absD == 0 ? Complex(0) : evans(m, pts[i]).ratio);
            } catch (const Error&) {
                r.ratioAbs = 0;
            }
        } catch (const Error&) {
            ok[i] = 0;
        }
    });
    std::vector<EvansRow> out;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (ok[i])
            out.push_back(rows[i]);
        else
            ++failed;
    }
    return out;
}

}  // namespace

EvansScan evans_scan(const HyperbolicParabolicModel& m, const EvansGrid& grid) {
    EvansScan s;
    s.model = m.name;
    s.rows = evaluate_evans(m, evans_points(m.d, grid.rhoMax, grid.radii, 2.0, grid.pointsPerDim, grid.gammaLevels),
                            grid.jobs, s.failedPoints);
    std::vector<double> levels;
    for (std::size_t k = 0; k < grid.gammaLevels.size(); ++k) {
        levels.push_back(grid.gammaLevels[k]);
        if (k + 1 < grid.gammaLevels.size()) levels.push_back(0.5 * (grid.gammaLevels[k] + grid.gammaLevels[k + 1]));
    }
    const auto refined = evaluate_evans(
        m, evans_points(m.d, grid.rhoMax, 2 * grid.radii - 1, std::sqrt(2.0), 2 * grid.pointsPerDim, levels), grid.jobs,
        s.failedPoints);
    auto minw = [](const std::vector<EvansRow>& rows) {
        double v = std::numeric_limits<double>::infinity();
        for (const auto& r : rows) v = std::min(v, r.weighted);
        return v;
    };
    s.minWeighted = minw(s.rows);
    s.minWeightedRefined = minw(refined);
    s.refinementRatio = std::max(s.minWeighted / s.minWeightedRefined, s.minWeightedRefined / s.minWeighted);
    double lo = std::numeric_limits<double>::infinity(), hi = 0;
    for (const std::vector<EvansRow>* rows : std::initializer_list<const std::vector<EvansRow>*>{&s.rows, &refined})
        for (const auto& r : *rows)
            if (r.ratioAbs > 0) {
                lo = std::min(lo, r.ratioAbs);
                hi = std::max(hi, r.ratioAbs);
            }
    s.ratioBand = hi > 0 ? hi / lo : std::numeric_limits<double>::infinity();
    for (double g : {1e-2, 3e-3, 1e-3, 3e-4, 1e-4}) {
        s.gammaRay.push_back(g);
        s.gammaRayR.push_back(degeneracy_R(m, Frequency(0.0, g, RVector::Zero(m.d - 1))));
    }
    s.gammaSlope = loglog_slope(s.gammaRay, s.gammaRayR);
    return s;
}

std::string evans_csv(const EvansScan& s) {
    std::ostringstream o;
    o << "tau,gamma";
    const int ne = s.rows.empty() ? 0 : static_cast<int>(s.rows.front().zeta.eta.size());
    for (int k = 0; k < ne; ++k) o << ",eta" << k + 1;
    o << ",absD,R,weighted,ratioAbs\n";
    for (const auto& r : s.rows) {
        o << fmt17(r.zeta.tau) << ',' << fmt17(r.zeta.gamma);
        for (int k = 0; k < ne; ++k) o << ',' << fmt17(r.zeta.eta(k));
        o << ',' << fmt17(r.absD) << ',' << fmt17(r.R) << ',' << fmt17(r.weighted) << ',' << fmt17(r.ratioAbs) << '\n';
    }
    return o.str();
}

// ---- viscous-limit studies ----

RVector forcing_t3ex(double t, double x) {
    RVector v(1);
    v(0) = t > 0 ? t * t * t * std::exp(-x) : 0.0;
    return v;
}

namespace {

DiscreteField sample_grid(int N, double h, double T, double X, const FieldFn& f) {
    return DiscreteField::sample(N, static_cast<int>(std::lround(T / h)) + 1, static_cast<int>(std::lround(X / h)) + 1, h,
                                 h, f);
}

ExpansionProfile outer_expansion(const HyperbolicParabolicModel& m, const DiscreteField& f) {
    return m.constant_coefficients() ? linear_neumann_expansion(m, f) : quasilinear_incoming_expansion(m, f, 1);
}

}  // namespace

ConvergenceStudy viscous_limit_study(const HyperbolicParabolicModel& m, const std::vector<double>& eps,
                                     const FieldFn& f, const StudyGrid& grid) {
    ConvergenceStudy s;
    s.model = m.name;
    s.rows.resize(eps.size());
    parallel_for(eps.size(), grid.jobs, [&](std::size_t k) {
        const double h = grid.dxPerEps * eps[k];
        const DiscreteField F = sample_grid(m.N, h, grid.T, grid.X, f);
        const DiscreteField u = viscous_solve_1d(m, eps[k], F).solution;
        const ExpansionProfile p = outer_expansion(m, F);
        ConvergenceRow& r = s.rows[k];
        r.eps = eps[k];
        r.dx = r.dt = h;
        r.errInf = max_norm(u - p.outerTerms[0]);
        r.errL2 = l2_norm(u - outer_sum(p, eps[k], 1));
        for (double g : grid.gammas) r.weightedC = std::max(r.weightedC, weighted_estimate_ratio(u, F, g));
    });
    std::vector<double> e, a, b;
    for (const auto& r : s.rows) {
        e.push_back(r.eps);
        a.push_back(r.errInf);
        b.push_back(r.errL2);
    }
    if (e.size() >= 2) {
        s.slopeInf = loglog_slope(e, a);
        s.slopeL2 = loglog_slope(e, b);
    }
    return s;
}

std::string convergence_csv(const ConvergenceStudy& s) {
    std::string o = "eps,dx,dt,errInf,errL2,weightedC\n";
    for (const auto& r : s.rows)
        o += fmt::format("{},{},{},{},{},{}\n", fmt17(r.eps), fmt17(r.dx), fmt17(r.dt), fmt17(r.errInf), fmt17(r.errL2),
                         fmt17(r.weightedC));
    return o;
}

FornetStudy fornet_study(double alpha, double beta, const std::vector<double>& eps, int jobs) {
    FornetStudy s;
    s.alpha = alpha;
    s.beta = beta;
    s.rows.resize(eps.size());
    auto bump = [](double x) {
        const double y = x - 0.3;
        return std::abs(y) < 1 ? std::pow(1 - y * y, 4) : 0.0;
    };
    auto h = [&](double x) {
        RVector v(2);
        v << bump(x), bump(-x);
        return v;
    };
    auto f = [](double, double) { return RVector(RVector::Zero(2)); };
    parallel_for(eps.size(), jobs, [&](std::size_t k) {
        const double dx = eps[k] / 4;
        const FornetRun r = fornet_solve(alpha, beta, eps[k], f, h, 1.0, 5.0, dx, dx);
        s.rows[k] = {eps[k], l2_norm(r.viscous.solution - r.limit)};
    });
    std::vector<double> e, v;
    s.strictlyDecreasing = true;
    for (std::size_t k = 0; k < s.rows.size(); ++k) {
        e.push_back(s.rows[k].eps);
        v.push_back(s.rows[k].errL2);
        // ordered by decreasing eps
        if (k > 0 && (s.rows[k].eps < s.rows[k - 1].eps) != (s.rows[k].errL2 < s.rows[k - 1].errL2))
            s.strictlyDecreasing = false;
    }
    if (e.size() >= 2) s.slope = loglog_slope(e, v);
    return s;
}

std::string fornet_csv(const FornetStudy& s) {
    std::string o = "eps,errL2\n";
    for (const auto& r : s.rows) o += fmt17(r.eps) + "," + fmt17(r.errL2) + "\n";
    return o;
}

WeightedStudy weighted_estimate_study(const HyperbolicParabolicModel& m, double eps, const FieldFn& f,
                                      const StudyGrid& grid) {
    WeightedStudy s;
    s.eps = eps;
    for (int level = 0; level < 2; ++level) {
        const double h = grid.dxPerEps * eps / (level + 1);
        const DiscreteField F = sample_grid(m.N, h, grid.T, grid.X, f);
        const DiscreteField u = viscous_solve_1d(m, eps, F).solution;
        auto& out = level ? s.ratiosRefined : s.ratiosBase;
        for (double g : grid.gammas) out.push_back(weighted_estimate_ratio(u, F, g));
    }
    for (double r : s.ratiosBase) s.C = std::max(s.C, r);
    for (double r : s.ratiosRefined) s.Crefined = std::max(s.Crefined, r);
    s.refinement = std::max(s.C / s.Crefined, s.Crefined / s.C);
    return s;
}

CascadeStudy cascade_study(const HyperbolicParabolicModel& m, const FieldFn& f, const std::vector<double>& hs,
                           const std::vector<double>& eps, double T, double X) {
    CascadeStudy s;
    s.hs = hs;
    s.eps = eps;
    s.traces.assign(2, {});
    ExpansionProfile finest;
    DiscreteField finestF;
    for (std::size_t k = 0; k < hs.size(); ++k) {
        const DiscreteField F = sample_grid(m.N, hs[k], T, X, f);
        ExpansionProfile p = quasilinear_incoming_expansion(m, F, 2);
        for (int j = 0; j < 2; ++j) s.traces[j].push_back(max_norm(normal_trace_derivative(p.outerTerms[j])));
        if (k + 1 == hs.size()) {
            finest = std::move(p);
            finestF = F;
        }
    }
    for (int j = 0; j < 2; ++j) s.traceOrders.push_back(hs.size() >= 2 ? loglog_slope(hs, s.traces[j]) : 0.0);
    s.residuals.assign(3, {});
    for (int M = 0; M <= 2; ++M) {
        for (double e : eps) s.residuals[M].push_back(max_norm(viscous_cell_residual(m, outer_sum(finest, e, M), finestF, e)));
        s.residualSlopes.push_back(eps.size() >= 2 ? loglog_slope(eps, s.residuals[M]) : 0.0);
    }
    return s;
}

// ---- acceptance ----

namespace {

const std::map<std::string, std::vector<int>>& criterion_groups() {
    static const std::map<std::string, std::vector<int>> g = {
        {"stability", {1, 2, 3}}, {"cauchy", {4, 5, 6, 7}},   {"evans", {8}},       {"resolvent", {9}},
        {"converge", {10, 11, 12}}, {"expand", {13}},         {"properties", {14}}, {"all", {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14}},
    };
    return g;
}

Json vec_json(const std::vector<double>& v) {
    Json a = Json::array();
    for (double x : v) a.push_back(x);
    return a;
}

CriterionResult c1_neueg(const AcceptOptions& opt) {
    CriterionResult c;
    c.id = 1;
    c.title = "neueg weak-only Lopatinski";
    const auto m = builtin_model("neueg", {{"alpha", 0.3}});
    const auto r = reduce_boundary_conditions(m);
    HemisphereGrid g;
    g.jobs = opt.jobs;
    const auto rep = scan_uniform(m, r, g);
    std::vector<double> dets;
    for (double gamma : {1e-2, 1e-3, 1e-4}) dets.push_back(std::abs(uniform_lop_det(m, r, Frequency::d2(1, gamma, -1)).detUniform));
    const bool monotone = dets[0] > dets[1] && dets[1] > dets[2];
    c.pass = rep.verdict == LopVerdict::WEAK_ONLY && dets[2] < 0.1 && monotone;
    c.metrics["verdict"] = lop_verdict_name(rep.verdict);
    c.metrics["gammas"] = vec_json({1e-2, 1e-3, 1e-4});
    c.metrics["absDet"] = vec_json(dets);
    c.metrics["argmin"] = frequency_json(rep.argmin);
    c.summary = fmt::format("verdict {}, |det| {:.3e} {:.3e} {:.3e}", lop_verdict_name(rep.verdict), dets[0], dets[1], dets[2]);
    return c;
}

CriterionResult c2_badinceg(const AcceptOptions& opt) {
    CriterionResult c;
    c.id = 2;
    c.title = "badinceg analytic root";
    const auto m = builtin_model("badinceg", {{"a", 1.0}, {"b", -1.0}});
    const auto r = reduce_boundary_conditions(m);
    const double det = std::abs(uniform_lop_det(m, r, Frequency::d2(0.5, std::sqrt(3.0) / 2, -1)).detUniform);
    HemisphereGrid g;
    g.jobs = opt.jobs;
    const auto rep = scan_uniform(m, r, g);
    c.pass = det < 1e-8 && rep.verdict == LopVerdict::FAILS_WEAK;
    c.metrics["absDetAtRoot"] = det;
    c.metrics["verdict"] = lop_verdict_name(rep.verdict);
    if (rep.weakFailureWitness) c.metrics["witness"] = frequency_json(*rep.weakFailureWitness);
    c.summary = fmt::format("|det| at root {:.3e}, verdict {}", det, lop_verdict_name(rep.verdict));
    return c;
}

CriterionResult c3_inceg(const AcceptOptions& opt) {
    CriterionResult c;
    c.id = 3;
    c.title = "inceg uniform Lopatinski";
    const auto m = builtin_model("inceg");
    const auto r = reduce_boundary_conditions(m);
    HemisphereGrid g;
    g.jobs = opt.jobs;
    const auto rep = scan_uniform(m, r, g);
    // weak condition at one point (the pole) together with total incomingness gives the uniform condition
    const double pole = std::abs(uniform_lop_det(m, r, Frequency::d2(0, 1, 0)).detUniform);
    const bool consistent = rep.totallyIncoming && pole > 0 && !rep.weakFailureWitness && rep.minAbsDet >= 1e-3;
    c.pass = rep.verdict == LopVerdict::UNIFORM && rep.minAbsDet >= 1e-3 && consistent;
    c.metrics["verdict"] = lop_verdict_name(rep.verdict);
    c.metrics["minAbsDet"] = rep.minAbsDet;
    c.metrics["absDetAtPole"] = pole;
    c.metrics["lopsatConsistent"] = consistent;
    c.summary = fmt::format("verdict {}, min |det| {:.4f}, consistency {}", lop_verdict_name(rep.verdict), rep.minAbsDet,
                            consistent);
    return c;
}

CriterionResult c4_eg2(const AcceptOptions& opt) {
    CriterionResult c;
    c.id = 4;
    c.title = "2eg boundary Cauchy problem";
    const auto m = builtin_model("eg2", {{"alpha", 1.0}, {"beta", 2.0}});
    const auto r = reduce_boundary_conditions(m);
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> u(-1, 1), ug(0.05, 1);
    double eigErr = 0;
    for (int k = 0; k < 20; ++k) {
        const Frequency z = Frequency::d2(u(rng), ug(rng), u(rng)).hat();
        const CVector ev = eigenvalues(enlarged_frozen_generators(m, r, z)[0]);
        std::vector<Complex> v(ev.data(), ev.data() + ev.size());
        std::sort(v.begin(), v.end(), [](Complex a, Complex b) { return std::abs(a) < std::abs(b); });
        const Complex target[3] = {0.0, 0.0, 1.0};
        for (int i = 0; i < 3; ++i) eigErr = std::max(eigErr, std::abs(v[i] - target[i]));
    }
    CauchyScanOptions so;
    so.jobs = opt.jobs;
    const auto dg = semisimple_constmult_scan(m, r, so);
    const auto rs = resolvent_norm_scan(m, r, 32, opt.jobs);
    const double s = 1 / std::sqrt(2.0);
    const double lv = std::abs(lopver_quantity(m, r, Frequency::d2(-s, 1e-6, s)));
    c.pass = eigErr < 1e-10 && dg.semisimple && dg.constantMultiplicity && rs.pass && lv < 1e-6;
    c.metrics["maxEigenvalueError"] = eigErr;
    c.metrics["semisimple"] = dg.semisimple;
    c.metrics["constantMultiplicity"] = dg.constantMultiplicity;
    c.metrics["resolventC"] = rs.C;
    c.metrics["resolventCrefined"] = rs.Crefined;
    c.metrics["resolventRatio"] = rs.ratio;
    c.metrics["lopver"] = lv;
    c.summary = fmt::format("eig err {:.2e}, semisimple {}, const mult {}, C ratio {:.3f}, lopver {:.3e}", eigErr,
                            dg.semisimple, dg.constantMultiplicity, rs.ratio, lv);
    return c;
}

CriterionResult c5_neueg2(const AcceptOptions& opt) {
    CriterionResult c;
    c.id = 5;
    c.title = "neueg2 method two vs Lopatinski";
    const auto m = builtin_model("neueg2");
    const auto r = reduce_boundary_conditions(m);
    CauchyScanOptions so;
    so.minEta0 = 1e-2;
    so.jobs = opt.jobs;
    const auto dg = semisimple_constmult_scan(m, r, so);
    const auto rs = resolvent_norm_scan(m, r, 32, opt.jobs);
    HemisphereGrid g;
    g.jobs = opt.jobs;
    const auto rep = scan_uniform(m, r, g);
    const bool method2 = dg.evolutionary && dg.semisimple && dg.constantMultiplicity && dg.pureImaginary && rs.pass;
    c.pass = method2 && rep.verdict == LopVerdict::WEAK_ONLY;
    c.metrics["evolutionary"] = dg.evolutionary;
    c.metrics["semisimple"] = dg.semisimple;
    c.metrics["constantMultiplicity"] = dg.constantMultiplicity;
    c.metrics["pureImaginary"] = dg.pureImaginary;
    c.metrics["resolventPass"] = rs.pass;
    c.metrics["resolventRatio"] = rs.ratio;
    c.metrics["lopatinskiVerdict"] = lop_verdict_name(rep.verdict);
    c.summary = fmt::format("evolutionary {}, semisimple {}, const mult {}, pure imaginary {}, resolvent {}, verdict {}",
                            dg.evolutionary, dg.semisimple, dg.constantMultiplicity, dg.pureImaginary, rs.pass,
                            lop_verdict_name(rep.verdict));
    return c;
}

CriterionResult c6_noest(const AcceptOptions& opt) {
    CriterionResult c;
    c.id = 6;
    c.title = "noest semisimplicity vs sharp condition";
    const auto m = builtin_model("noest", {{"theta", 0.5}, {"alpha", 0.0}});
    const auto r = reduce_boundary_conditions(m);
    CauchyScanOptions so;
    so.jobs = opt.jobs;
    const auto dg = semisimple_constmult_scan(m, r, so);
    int witnesses = 0;
    for (const auto& w : dg.witnesses) witnesses += w.flag == "semisimple";
    const auto sh = sharp_scalar_condition(m, r, eta_sphere(m.d, 16));
    c.pass = !dg.semisimple && witnesses >= 1 && sh.pass;
    c.metrics["semisimple"] = dg.semisimple;
    c.metrics["semisimpleWitnesses"] = witnesses;
    c.metrics["sharpScalarPass"] = sh.pass;
    c.metrics["sharpScalarMinAbs"] = sh.minAbs;
    c.summary = fmt::format("semisimple {} ({} witnesses), sharp condition {} (min {:.4f})", dg.semisimple, witnesses,
                            sh.pass, sh.minAbs);
    return c;
}

CriterionResult c7_rao(const AcceptOptions& opt) {
    CriterionResult c;
    c.id = 7;
    c.title = "gas model boundary system";
    const auto m = builtin_model("rao");
    const auto& p = m.params;
    const double R = p.at("R"), cv = p.at("cv");
    const double rho = m.baseState(0), v = m.baseState(2), T = m.baseState(3);
    const double c2 = R * T * (1 + R / cv);
    const bool supersonic = std::sqrt(c2) < v;
    const auto r = reduce_boundary_conditions(m);
    const auto ts = tangential_system(m, r);
    const auto ev = evolutionary_check(ts);
    const double detA0coef = std::abs(ts.A0coef.determinant());
    const double normalized = detA0coef * std::abs(m.Ad().determinant());
    const double prho = R * T, pT = R * rho, pres = R * rho * T;
    const double quotedA = v * (v * v - prho), quotedB = v * v - c2 + pres * pT / (rho * rho);
    CauchyScanOptions so;
    so.refine = false;
    so.jobs = opt.jobs;
    const auto a = semisimple_constmult_scan(m, r, so);
    const auto still = builtin_model("rao", {{"u", 0.0}});
    const auto b = semisimple_constmult_scan(still, reduce_boundary_conditions(still), so);
    c.pass = supersonic && ev.evolutionary && a.semisimple && !b.semisimple;
    c.metrics["soundSpeed"] = std::sqrt(c2);
    c.metrics["supersonic"] = supersonic;
    c.metrics["evolutionary"] = ev.evolutionary;
    c.metrics["absDetA0coef"] = detA0coef;
    c.metrics["absDetA0coefTimesDetAd"] = normalized;
    c.metrics["quoted_v_v2_minus_prho"] = quotedA;
    c.metrics["quoted_v2_minus_c2_plus_p_pT_over_rho2"] = quotedB;
    c.metrics["semisimpleAtU1"] = a.semisimple;
    c.metrics["semisimpleAtU0"] = b.semisimple;
    c.summary = fmt::format("c = {:.4f} < v = {}, |det| {:.4f} x |det A_d| = {:.4f} (v(v^2 - p_rho) = {:.4f}, other form {:.4f}), "
                            "semisimple u=1 {}, u=0 {}",
                            std::sqrt(c2), v, detA0coef, normalized, quotedA, quotedB, a.semisimple, b.semisimple);
    return c;
}

CriterionResult c8_evans(const AcceptOptions& opt) {
    CriterionResult c;
    c.id = 8;
    c.title = "Evans degeneracy";
    c.pass = true;
    std::vector<std::string> parts;
    for (const std::string name : {"inceg", "scalar1d"}) {
        EvansGrid g;
        g.jobs = opt.jobs;
        const auto s = evans_scan(builtin_model(name), g);
        const bool ok = s.minWeighted > 0 && s.minWeightedRefined > 0 && s.refinementRatio <= 1.5 &&
                        std::abs(s.gammaSlope - 1.0) <= 0.1 && s.ratioBand <= 1e3;
        c.pass = c.pass && ok;
        Json j;
        j["minWeighted"] = s.minWeighted;
        j["minWeightedRefined"] = s.minWeightedRefined;
        j["refinementRatio"] = s.refinementRatio;
        j["gammaSlope"] = s.gammaSlope;
        j["ratioBand"] = s.ratioBand;
        j["points"] = s.rows.size();
        j["failedPoints"] = s.failedPoints;
        j["pass"] = ok;
        c.metrics[name] = j;
        parts.push_back(fmt::format("{}: min R/(g+r^2) {:.4f}/{:.4f}, slope {:.4f}, band {:.3g}", name, s.minWeighted,
                                    s.minWeightedRefined, s.gammaSlope, s.ratioBand));
    }
    c.summary = parts[0] + "; " + parts[1];
    return c;
}

CriterionResult c9_resolvent(const AcceptOptions& opt) {
    CriterionResult c;
    c.id = 9;
    c.title = "low-frequency resolvent estimate";
    c.pass = true;
    std::vector<std::string> parts;
    for (const std::string name : {"scalar1d", "inceg"}) {
        const auto s = resolvent_estimate_scan(builtin_model(name), 100, 0.05, opt.seed);
        c.pass = c.pass && s.pass;
        Json j;
        j["maxRatio"] = s.maxRatio;
        j["maxRatioDoubled"] = s.maxRatioDoubled;
        j["growth"] = s.growth;
        j["pass"] = s.pass;
        c.metrics[name] = j;
        parts.push_back(fmt::format("{}: max ratio {:.4f} -> {:.4f} (growth {:.3f})", name, s.maxRatio, s.maxRatioDoubled,
                                    s.growth));
    }
    c.summary = parts[0] + "; " + parts[1];
    return c;
}

CriterionResult c10_limit(const AcceptOptions& opt) {
    CriterionResult c;
    c.id = 10;
    c.title = "small-viscosity limit";
    StudyGrid g;
    g.jobs = opt.jobs;
    const auto s = viscous_limit_study(builtin_model("scalar1d"), {0.1, 0.05, 0.025, 0.0125}, forcing_t3ex, g);
    c.pass = std::abs(s.slopeInf - 1.0) <= 0.2 && std::abs(s.slopeL2 - 2.0) <= 0.3;
    Json rows = Json::array();
    for (const auto& r : s.rows) rows.push_back({{"eps", r.eps}, {"errInf", r.errInf}, {"errL2", r.errL2}});
    c.metrics["rows"] = rows;
    c.metrics["slopeInf"] = s.slopeInf;
    c.metrics["slopeL2"] = s.slopeL2;
    c.summary = fmt::format("slope |u-u0|_inf {:.4f}, slope |u-(u0+eps u1)|_L2 {:.4f}", s.slopeInf, s.slopeL2);
    return c;
}

CriterionResult c11_fornet(const AcceptOptions& opt) {
    CriterionResult c;
    c.id = 11;
    c.title = "discontinuous-coefficient limit";
    const auto s = fornet_study(1.0, 2.0, {0.1, 0.05, 0.025, 0.0125}, opt.jobs);
    c.pass = s.strictlyDecreasing && s.slope > 0.4;
    Json rows = Json::array();
    for (const auto& r : s.rows) rows.push_back({{"eps", r.eps}, {"errL2", r.errL2}});
    c.metrics["rows"] = rows;
    c.metrics["slope"] = s.slope;
    c.metrics["strictlyDecreasing"] = s.strictlyDecreasing;
    c.summary = fmt::format("errors {:.4e} {:.4e} {:.4e} {:.4e}, slope {:.4f}", s.rows[0].errL2, s.rows[1].errL2,
                            s.rows[2].errL2, s.rows[3].errL2, s.slope);
    return c;
}

CriterionResult c12_weighted(const AcceptOptions&) {
    CriterionResult c;
    c.id = 12;
    c.title = "weighted estimate";
    const auto s = weighted_estimate_study(builtin_model("scalar1d"), 0.05, forcing_t3ex);
    bool finite = true;
    for (double r : s.ratiosBase) finite = finite && std::isfinite(r);
    for (double r : s.ratiosRefined) finite = finite && std::isfinite(r);
    c.pass = finite && s.refinement <= 1.5;
    c.metrics["gammas"] = vec_json({2, 4, 8, 16});
    c.metrics["ratios"] = vec_json(s.ratiosBase);
    c.metrics["ratiosRefined"] = vec_json(s.ratiosRefined);
    c.metrics["C"] = s.C;
    c.metrics["Crefined"] = s.Crefined;
    c.summary = fmt::format("C {:.4f}, refined {:.4f}, ratio {:.4f}", s.C, s.Crefined, s.refinement);
    return c;
}

CriterionResult c13_cascade(const AcceptOptions&) {
    CriterionResult c;
    c.id = 13;
    c.title = "quasilinear cascade";
    const auto s = cascade_study(builtin_model("scalar1d", {{"q", 0.1}}), forcing_t3ex, {0.04, 0.02, 0.01},
                                 {0.1, 0.05, 0.025, 0.0125});
    const bool traces = s.traceOrders[0] >= 1.8 && s.traceOrders[1] >= 1.8;
    const bool slopes = std::abs(s.residualSlopes[1] - 1.0) <= 0.3 && std::abs(s.residualSlopes[2] - 2.0) <= 0.3;
    c.pass = traces && slopes;
    c.metrics["traceOrders"] = vec_json(s.traceOrders);
    c.metrics["residualSlopes"] = vec_json(s.residualSlopes);
    c.metrics["tracesPass"] = traces;
    c.metrics["residualSlopesPass"] = slopes;
    c.summary = fmt::format("trace orders {:.3f} {:.3f}; residual slopes M=0,1,2: {:.3f} {:.3f} {:.3f} (target M)",
                            s.traceOrders[0], s.traceOrders[1], s.residualSlopes[0], s.residualSlopes[1],
                            s.residualSlopes[2]);
    return c;
}

ExprPtr random_expr(std::mt19937_64& rng, int depth, int nvars) {
    std::uniform_int_distribution<int> pick(0, 11);
    std::uniform_real_distribution<double> val(-5, 5);
    const int k = depth <= 0 ? pick(rng) % 2 : pick(rng);
    auto sub = [&] { return random_expr(rng, depth - 1, nvars); };
    switch (k) {
        case 0: return make_constant(val(rng));
        case 1: return make_variable(static_cast<int>(rng() % nvars));
        case 2: return make_binary(ExprKind::Add, sub(), sub());
        case 3: return make_binary(ExprKind::Sub, sub(), sub());
        case 4: return make_binary(ExprKind::Mul, sub(), sub());
        case 5: return make_binary(ExprKind::Div, sub(), sub());
        case 6: return make_binary(ExprKind::Pow, sub(), make_constant(double(rng() % 4)));
        case 7: return make_unary(ExprKind::Neg, sub());
        case 8: return make_unary(ExprKind::Sin, sub());
        case 9: return make_unary(ExprKind::Cos, sub());
        case 10: return make_unary(ExprKind::Exp, make_unary(ExprKind::Sin, sub()));
        default: return make_unary(ExprKind::Sqrt, make_binary(ExprKind::Mul, sub(), sub()));
    }
}

CMatrix random_complex(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> g;
    CMatrix M(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) M(i, j) = Complex(g(rng), g(rng));
    return M;
}

CriterionResult c14_properties(const AcceptOptions& opt) {
    CriterionResult c;
    c.id = 14;
    c.title = "property suites";
    std::mt19937_64 rng(opt.seed);
    // projector identities
    int projFail = 0, projTrials = 0;
    double projErr = 0;
    while (projTrials < 100) {
        const int n = 2 + projTrials % 6;
        const CMatrix M = random_complex(rng, n);
        SpectralSplit s;
        try {
            s = spectral_split(M);
        } catch (const Error&) {
            continue;
        }
        ++projTrials;
        const CMatrix& P = s.piMinus;
        const double scale = std::max(1.0, P.norm()) * std::max(1.0, M.norm());
        const double e = std::max({(P * P - P).norm(), (P * s.piPlus).norm(), (P * M - M * P).norm(),
                                   (P * s.stableBasis - s.stableBasis).norm(), (s.piPlus * s.unstableBasis - s.unstableBasis).norm()}) /
                         scale;
        projErr = std::max(projErr, e);
        if (e > 1e-10) ++projFail;
    }
    // unitary invariance of |subspace_det|
    int invFail = 0;
    double invErr = 0;
    for (int t = 0; t < 100;) {
        const int n = 2 + t % 6;
        const CMatrix M = random_complex(rng, n);
        const CMatrix U = Eigen::HouseholderQR<CMatrix>(random_complex(rng, n)).householderQ();
        try {
            const auto a = spectral_split(M);
            const auto b = spectral_split(CMatrix(U * M * U.adjoint()));
            const double da = std::abs(subspace_det(a.stableBasis, a.unstableBasis));
            const double db = std::abs(subspace_det(b.stableBasis, b.unstableBasis));
            const double e = std::abs(da - db) / std::max(da, 1e-300);
            invErr = std::max(invErr, e);
            if (e > 1e-8) ++invFail;
            ++t;
        } catch (const Error&) {
        }
    }
    // parser round trip
    int parseFail = 0;
    std::uniform_real_distribution<double> state(-2, 2);
    for (int t = 0; t < 1000; ++t) {
        const ExprPtr e = random_expr(rng, 1 + t % 6, 3);
        const std::string s = to_string(e);
        bool ok = false;
        try {
            const ExprPtr back = parse_expr(s, 3);
            ok = structurally_equal(e, back) && to_string(back) == s;
            double u[3] = {state(rng), state(rng), state(rng)};
            double x = 0, y = 0;
            int ex = -1, ey = -1;
            try {
                x = evaluate_reference(e, u, 3);
            } catch (const Error& er) {
                ex = static_cast<int>(er.kind());
            }
            try {
                y = evaluate_reference(back, u, 3);
            } catch (const Error& er) {
                ey = static_cast<int>(er.kind());
            }
            ok = ok && ex == ey && (ex >= 0 || x == y || (std::isnan(x) && std::isnan(y)));
        } catch (const Error&) {
            ok = false;
        }
        parseFail += !ok;
    }
    // byte-identical reruns, including a change of thread count
    bool identical = true;
    {
        const auto m = builtin_model("inceg");
        const auto r = reduce_boundary_conditions(m);
        HemisphereGrid g;
        g.pointsPerDim = 24;
        g.jobs = 1;
        const std::string a = stability_csv(scan_uniform(m, r, g));
        g.jobs = std::max(2, opt.jobs);
        const std::string b = stability_csv(scan_uniform(m, r, g));
        identical = identical && a == b;
        EvansGrid eg;
        eg.radii = 3;
        eg.pointsPerDim = 8;
        const std::string e1 = evans_csv(evans_scan(m, eg));
        eg.jobs = 2;
        identical = identical && e1 == evans_csv(evans_scan(m, eg));
        auto scan = [&] {
            const auto s = resolvent_estimate_scan(builtin_model("scalar1d"), 20, 0.05, opt.seed);
            return fmt17(s.maxRatio) + fmt17(s.maxRatioDoubled);
        };
        identical = identical && scan() == scan();
        StudyGrid sg;
        sg.T = 0.5;
        sg.X = 3.0;
        auto conv = [&](int jobs) {
            sg.jobs = jobs;
            return convergence_csv(viscous_limit_study(builtin_model("scalar1d"), {0.2, 0.1}, forcing_t3ex, sg));
        };
        identical = identical && conv(1) == conv(2);
    }
    c.pass = projFail == 0 && invFail == 0 && parseFail == 0 && identical;
    c.metrics["projectorTrials"] = projTrials;
    c.metrics["projectorFailures"] = projFail;
    c.metrics["projectorMaxError"] = projErr;
    c.metrics["unitaryInvarianceFailures"] = invFail;
    c.metrics["unitaryInvarianceMaxError"] = invErr;
    c.metrics["parserRoundTripFailures"] = parseFail;
    c.metrics["byteIdenticalReruns"] = identical;
    c.summary = fmt::format("projectors {} fail (max {:.1e}), unitary invariance {} fail (max {:.1e}), parser {} / 1000 fail, "
                            "reruns identical {}",
                            projFail, projErr, invFail, invErr, parseFail, identical);
    return c;
}

using Runner = CriterionResult (*)(const AcceptOptions&);

struct CriterionInfo {
    Runner run;
    double timeLimit;  // seconds; 0 for none
};

const std::map<int, CriterionInfo>& criteria() {
    static const std::map<int, CriterionInfo> c = {
        {1, {c1_neueg, 30}},       {2, {c2_badinceg, 0}},     {3, {c3_inceg, 0}},       {4, {c4_eg2, 0}},
        {5, {c5_neueg2, 0}},       {6, {c6_noest, 0}},        {7, {c7_rao, 60}},        {8, {c8_evans, 0}},
        {9, {c9_resolvent, 60}},   {10, {c10_limit, 300}},    {11, {c11_fornet, 0}},    {12, {c12_weighted, 0}},
        {13, {c13_cascade, 0}},    {14, {c14_properties, 0}},
    };
    return c;
}

}  // namespace

std::set<int> parse_criteria(const std::string& list) {
    std::set<int> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const auto& g = criterion_groups();
        if (auto it = g.find(item); it != g.end()) {
            out.insert(it->second.begin(), it->second.end());
            continue;
        }
        std::size_t used = 0;
        int id = 0;
        try {
            id = std::stoi(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size() || !criteria().count(id))
            throw Error(ErrorKind::InvalidArgument, "unknown criterion '" + item + "'");
        out.insert(id);
    }
    return out;
}

std::vector<CriterionResult> run_acceptance(const AcceptOptions& opt,
                                            const std::function<void(const CriterionResult&)>& onResult) {
    std::vector<CriterionResult> out;
    for (const auto& [id, info] : criteria()) {
        if (!opt.only.empty() && !opt.only.count(id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        CriterionResult r;
        try {
            r = info.run(opt);
        } catch (const std::exception& e) {
            r.id = id;
            r.pass = false;
            r.summary = std::string("error: ") + e.what();
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        r.metrics["seconds"] = r.seconds;
        if (info.timeLimit > 0) {
            r.metrics["timeLimit"] = info.timeLimit;
            if (r.seconds >= info.timeLimit) {
                r.pass = false;
                r.summary += fmt::format("; runtime over {} s", info.timeLimit);
            }
        }
        if (onResult) onResult(r);
        out.push_back(std::move(r));
    }
    return out;
}

std::string criterion_line(const CriterionResult& r) {
    return fmt::format("criterion {:2d} {}  {}  ({:.1f} s)  {}", r.id, r.pass ? "PASS" : "FAIL", r.title, r.seconds,
                       r.summary);
}

Json acceptance_json(const std::vector<CriterionResult>& results) {
    Json j;
    j["schemaVersion"] = kSchemaVersion;
    j["kind"] = "acceptance";
    int passed = 0;
    Json arr = Json::array();
    for (const auto& r : results) {
        passed += r.pass;
        Json e;
        e["id"] = r.id;
        e["title"] = r.title;
        e["pass"] = r.pass;
        e["seconds"] = r.seconds;
        e["summary"] = r.summary;
        e["metrics"] = r.metrics;
        arr.push_back(e);
    }
    j["passed"] = passed;
    j["total"] = results.size();
    j["criteria"] = arr;
    return j;
}

}  // namespace hpbl
