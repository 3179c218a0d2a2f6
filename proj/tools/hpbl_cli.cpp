#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "hpbl/harness.hpp"
#include "hpbl/io.hpp"

using namespace hpbl;

namespace {

// Exit codes
constexpr int kOk = 0, kAcceptFail = 1, kInput = 2, kNumeric = 3;

struct Common {
    std::string model = "builtin:scalar1d";
    std::string out = ".";
    int jobs = 1;
    unsigned long long seed = 42;
};

// "--name value" pairs left over by the parser become model parameter overrides.
std::map<std::string, double> overrides_from(const std::vector<std::string>& extras) {
    std::map<std::string, double> o;
    for (std::size_t k = 0; k < extras.size(); ++k) {
        const std::string& a = extras[k];
        if (a.rfind("--", 0) != 0 || a.size() < 3) throw Error(ErrorKind::InvalidArgument, "unexpected argument '" + a + "'");
        std::string key = a.substr(2), val;
        if (auto eq = key.find('='); eq != std::string::npos) {
            val = key.substr(eq + 1);
            key = key.substr(0, eq);
        } else {
            if (k + 1 >= extras.size()) throw Error(ErrorKind::InvalidArgument, "missing value for --" + key);
            val = extras[++k];
        }
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(val, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != val.size() || val.empty()) throw Error(ErrorKind::InvalidArgument, "--" + key + " needs a number");
        o[key] = v;
    }
    return o;
}

std::string out_path(const Common& c, const std::string& file) {
    std::filesystem::create_directories(c.out);
    return (std::filesystem::path(c.out) / file).string();
}

void write_json(const Common& c, const std::string& file, const Json& j) { write_text_file(out_path(c, file), j.dump(2) + "\n"); }

Json cls_json(const CaseClassification& cls) {
    return {{"D", cls.D}, {"Nn", cls.Nn}, {"I", cls.I}, {"O", cls.O}, {"case", boundary_case_name(cls.kind)}};
}

Json cauchy_json(const CauchyDiagnostics& dg) {
    Json j;
    j["evolutionary"] = dg.evolutionary;
    j["weaklyHyperbolic"] = dg.weaklyHyperbolic;
    j["semisimple"] = dg.semisimple;
    j["constantMultiplicity"] = dg.constantMultiplicity;
    j["pureImaginary"] = dg.pureImaginary;
    Json mp = Json::array();
    for (int k : dg.multiplicityPattern) mp.push_back(k);
    j["multiplicityPattern"] = mp;
    j["resolventConstant"] = std::isfinite(dg.resolventConstant) ? Json(dg.resolventConstant) : Json(nullptr);
    j["resolventStable"] = dg.resolventStable;
    j["samples"] = dg.samples;
    j["failedPoints"] = dg.failedPoints;
    Json w = Json::array();
    for (const auto& x : dg.witnesses)
        w.push_back({{"flag", x.flag}, {"zeta0", frequency_json(x.zeta0)}, {"value", x.value}, {"note", x.note}});
    j["witnesses"] = w;
    return j;
}

int cmd_stability(const Common& c, const HyperbolicParabolicModel& m, int grid, const std::vector<double>& levels,
                  double tol) {
    const ReducedBC r = reduce_boundary_conditions(m);
    HemisphereGrid g;
    g.pointsPerDim = grid;
    if (!levels.empty()) g.gammaLevels = levels;
    g.threshold = tol;
    g.jobs = c.jobs;
    const StabilityReport rep = scan_uniform(m, r, g);
    Json j;
    j["schemaVersion"] = kSchemaVersion;
    j["kind"] = "stability";
    j["model"] = m.name;
    j["classification"] = cls_json(rep.cls);
    j["verdict"] = lop_verdict_name(rep.verdict);
    j["minAbsDet"] = rep.minAbsDet;
    j["argmin"] = frequency_json(rep.argmin);
    j["minAbsDetPositiveGamma"] = rep.minAbsDetPositiveGamma;
    j["totallyIncoming"] = rep.totallyIncoming;
    j["incomingImplicationApplied"] = rep.incomingImplicationApplied;
    j["failedPoints"] = rep.failedPoints;
    if (rep.weakFailureWitness) {
        j["weakFailureWitness"] = frequency_json(*rep.weakFailureWitness);
        j["weakFailureValue"] = rep.weakFailureValue;
    }
    Json levelsJ = Json::array();
    for (const auto& l : rep.levels)
        levelsJ.push_back({{"gamma", l.gamma}, {"minAbsDet", l.minAbsDet}, {"argmin", frequency_json(l.argmin)}});
    j["levels"] = levelsJ;
    Json gl = Json::array();
    for (const auto& z : rep.glancing) gl.push_back(frequency_json(z));
    j["glancing"] = gl;

    // method two
    Json two;
    try {
        CauchyScanOptions so;
        so.jobs = c.jobs;
        two = cauchy_json(cauchy_diagnostics(m, r, so));
        const int rows = static_cast<int>(r.neumann_rows(m.N).rows());
        if (rows == 1) {
            const auto sh = sharp_scalar_condition(m, r, eta_sphere(m.d, 16));
            two["sharpScalarPass"] = sh.pass;
            two["sharpScalarMinAbs"] = std::isfinite(sh.minAbs) ? Json(sh.minAbs) : Json(nullptr);
        } else if (rows > 1) {
            const auto blk = reduced_block_scan(m, r, 32, c.jobs);
            two["reducedBlockPass"] = blk.pass;
            two["reducedBlockRatio"] = blk.resolvent.ratio;
        }
    } catch (const Error& e) {
        two["error"] = e.what();
    }
    j["methodTwo"] = two;
    write_json(c, "report.json", j);
    write_text_file(out_path(c, "scan.csv"), stability_csv(rep));
    std::printf("%s: verdict %s, min |det| %s\n", m.name.c_str(), lop_verdict_name(rep.verdict), fmt17(rep.minAbsDet).c_str());
    if (rep.weakFailureWitness) {
        const auto& w = *rep.weakFailureWitness;
        std::printf("weak failure at (gamma, tau, eta) = (%s, %s, %s)\n", fmt17(w.gamma).c_str(), fmt17(w.tau).c_str(),
                    w.eta.size() ? fmt17(w.eta(0)).c_str() : "-");
    }
    if (two.contains("semisimple")) std::printf("method two: semisimple %s\n", two["semisimple"].get<bool>() ? "true" : "false");
    return kOk;
}

int cmd_evans(const Common& c, const HyperbolicParabolicModel& m, int grid, double rhoMax, int radii) {
    EvansGrid g;
    g.pointsPerDim = grid;
    g.rhoMax = rhoMax;
    g.radii = radii;
    g.jobs = c.jobs;
    const EvansScan s = evans_scan(m, g);
    write_text_file(out_path(c, "evans.csv"), evans_csv(s));
    Json j;
    j["schemaVersion"] = kSchemaVersion;
    j["kind"] = "evans";
    j["model"] = m.name;
    j["minWeighted"] = s.minWeighted;
    j["minWeightedRefined"] = s.minWeightedRefined;
    j["refinementRatio"] = s.refinementRatio;
    j["gammaRay"] = s.gammaRay;
    j["gammaRayR"] = s.gammaRayR;
    j["gammaSlope"] = s.gammaSlope;
    j["ratioBand"] = s.ratioBand;
    j["points"] = s.rows.size();
    j["failedPoints"] = s.failedPoints;
    write_json(c, "evans.json", j);
    std::printf("%s: min R/(gamma+rho^2) = %s (refined %s), gamma-ray slope %s\n", m.name.c_str(),
                fmt17(s.minWeighted).c_str(), fmt17(s.minWeightedRefined).c_str(), fmt17(s.gammaSlope).c_str());
    return kOk;
}

int cmd_expand(const Common& c, const HyperbolicParabolicModel& m, int order, const std::vector<double>& eps, double h,
               double T, double X) {
    if (order < 0 || order > 2) throw Error(ErrorKind::InvalidArgument, "order must be 0, 1 or 2");
    const DiscreteField f = DiscreteField::sample(m.N, static_cast<int>(std::lround(T / h)) + 1,
                                                  static_cast<int>(std::lround(X / h)) + 1, h, h, [&](double t, double x) {
                                                      return RVector(RVector::Constant(m.N, forcing_t3ex(t, x)(0)));
                                                  });
    ExpansionProfile p;
    if (m.constant_coefficients() && !(m.totally_incoming() && order == 2)) {
        if (order == 2) throw Error(ErrorKind::InvalidArgument, "order 2 needs a totally incoming model");
        p = linear_neumann_expansion(m, f);
        p.outerTerms.resize(order + 1);
        p.order = order;
    } else {
        p = quasilinear_incoming_expansion(m, f, order);
    }
    Json j;
    j["schemaVersion"] = kSchemaVersion;
    j["kind"] = "expansion";
    j["model"] = m.name;
    j["order"] = order;
    j["forcing"] = "t^3 exp(-x) in every component";
    j["grid"] = {{"dt", h}, {"dx", h}, {"T", T}, {"X", X}};
    for (std::size_t k = 0; k < p.outerTerms.size(); ++k)
        write_text_file(out_path(c, fmt::format("u{}.json", k)), field_json(p.outerTerms[k]));
    // layers: decay rate of e^{z A_d} on E_-(A_d)
    const RVector ev = Eigen::SelfAdjointEigenSolver<RMatrix>(0.5 * (m.Ad() + m.Ad().transpose())).eigenvalues();
    double rate = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < ev.size(); ++k)
        if (ev(k) < 0) rate = std::min(rate, -ev(k));
    Json layers = Json::array();
    for (std::size_t k = 0; k < p.layerTerms.size(); ++k) {
        const auto& l = p.layerTerms[k];
        Json lj;
        lj["term"] = k;
        lj["zero"] = l.zero();
        lj["polynomialDegree"] = l.amplitudes.empty() ? 0 : static_cast<int>(l.amplitudes.size()) - 1;
        double amp = 0;
        for (const auto& a : l.amplitudes) amp = std::max(amp, a.max_abs());
        lj["maxAmplitude"] = amp;
        lj["decayRate"] = std::isfinite(rate) ? Json(rate) : Json(nullptr);
        if (!l.amplitudes.empty()) {
            Json amps = Json::array();
            for (const auto& a : l.amplitudes) amps.push_back(Json::parse(field_json(a)));
            lj["amplitudes"] = amps;
        }
        layers.push_back(lj);
    }
    j["layers"] = layers;
    // residual table of the viscous operator on sum eps^j u_j
    std::string csv = "eps,M,residual\n";
    Json slopes = Json::array();
    const bool residuals = m.totally_incoming();
    for (int M = 0; residuals && M <= order; ++M) {
        std::vector<double> r;
        for (double e : eps) {
            r.push_back(max_norm(viscous_cell_residual(m, outer_sum(p, e, M), f, e)));
            csv += fmt17(e) + "," + std::to_string(M) + "," + fmt17(r.back()) + "\n";
        }
        slopes.push_back(eps.size() >= 2 ? loglog_slope(eps, r) : 0.0);
    }
    j["residualSlopes"] = slopes;
    write_text_file(out_path(c, "residuals.csv"), csv);
    write_json(c, "expansion.json", j);
    std::printf("%s: %zu outer terms, %zu layer terms\n", m.name.c_str(), p.outerTerms.size(), p.layerTerms.size());
    for (std::size_t M = 0; M < slopes.size(); ++M)
        std::printf("residual slope M=%zu: %s\n", M, fmt17(slopes[M].get<double>()).c_str());
    return kOk;
}

int cmd_converge(const Common& c, const HyperbolicParabolicModel& m, const std::vector<double>& eps, double T, double X) {
    Json j;
    j["schemaVersion"] = kSchemaVersion;
    j["kind"] = "convergence";
    j["model"] = m.name;
    if (m.name == "fornet") {
        const FornetStudy s = fornet_study(m.params.at("alpha"), m.params.at("beta"), eps, c.jobs);
        write_text_file(out_path(c, "converge.csv"), fornet_csv(s));
        j["slope"] = s.slope;
        j["strictlyDecreasing"] = s.strictlyDecreasing;
        Json rows = Json::array();
        for (const auto& r : s.rows) rows.push_back({{"eps", r.eps}, {"errL2", r.errL2}});
        j["rows"] = rows;
        std::printf("eps, |v_eps - v_0|_L2\n");
        for (const auto& r : s.rows) std::printf("%s, %s\n", fmt17(r.eps).c_str(), fmt17(r.errL2).c_str());
        std::printf("slope %s, strictly decreasing %s\n", fmt17(s.slope).c_str(), s.strictlyDecreasing ? "true" : "false");
    } else {
        StudyGrid g;
        g.T = T;
        g.X = X;
        g.jobs = c.jobs;
        const ConvergenceStudy s = viscous_limit_study(m, eps, [&](double t, double x) {
            return RVector(RVector::Constant(m.N, forcing_t3ex(t, x)(0)));
        }, g);
        write_text_file(out_path(c, "converge.csv"), convergence_csv(s));
        j["slopeInf"] = s.slopeInf;
        j["slopeL2"] = s.slopeL2;
        Json rows = Json::array();
        for (const auto& r : s.rows)
            rows.push_back({{"eps", r.eps}, {"dx", r.dx}, {"errInf", r.errInf}, {"errL2", r.errL2}, {"weightedC", r.weightedC}});
        j["rows"] = rows;
        std::printf("eps, |u_eps - u_0|_inf, |u_eps - (u_0 + eps u_1)|_L2\n");
        for (const auto& r : s.rows)
            std::printf("%s, %s, %s\n", fmt17(r.eps).c_str(), fmt17(r.errInf).c_str(), fmt17(r.errL2).c_str());
        std::printf("slopes %s %s\n", fmt17(s.slopeInf).c_str(), fmt17(s.slopeL2).c_str());
    }
    write_json(c, "converge.json", j);
    return kOk;
}

int cmd_accept(const Common& c, const std::string& only) {
    AcceptOptions opt;
    opt.only = parse_criteria(only);
    opt.seed = c.seed;
    opt.jobs = c.jobs;
    const auto results = run_acceptance(opt, [](const CriterionResult& r) {
        std::printf("%s\n", criterion_line(r).c_str());
        std::fflush(stdout);
    });
    write_json(c, "acceptance.json", acceptance_json(results));
    int failed = 0;
    for (const auto& r : results) failed += !r.pass;
    std::printf("%d of %zu criteria passed\n", static_cast<int>(results.size()) - failed, results.size());
    return failed ? kAcceptFail : kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hyperbolic-parabolic boundary layer analysis"};
    app.require_subcommand(1);
    Common common;
    auto add_common = [&](CLI::App* s, bool withModel) {
        if (withModel) s->add_option("--model", common.model, "builtin:<name> or model JSON path");
        s->add_option("--out", common.out, "output directory");
        s->add_option("--jobs", common.jobs, "worker threads")->check(CLI::PositiveNumber);
        s->add_option("--seed", common.seed, "random seed");
        s->allow_extras(withModel);
    };

    int grid = 64;
    std::vector<double> gammaLevels;
    double tol = 1e-3;
    auto* stab = app.add_subcommand("stability", "uniform Lopatinski scan and boundary Cauchy diagnostics");
    add_common(stab, true);
    stab->add_option("--grid", grid, "angular points per dimension");
    stab->add_option("--gamma-levels", gammaLevels, "normalized gamma levels")->delimiter(',');
    stab->add_option("--tol", tol, "uniform threshold on |det|");

    int egrid = 16, radii = 6;
    double rhoMax = 0.05;
    auto* ev = app.add_subcommand("evans", "low-frequency Evans scan");
    add_common(ev, true);
    ev->add_option("--grid", egrid, "angular points per dimension");
    ev->add_option("--rho-max", rhoMax, "largest radius");
    ev->add_option("--radii", radii, "radii rho_max 2^-k");

    int order = 1;
    std::vector<double> eps{0.1, 0.05, 0.025, 0.0125};
    double h = 0.02, T = 1.0, X = 6.0;
    auto* ex = app.add_subcommand("expand", "outer expansion and boundary layers");
    add_common(ex, true);
    ex->add_option("--order", order, "expansion order (0-2)");
    ex->add_option("--eps", eps, "eps values for the residual table")->delimiter(',');
    ex->add_option("--dx", h, "grid spacing");
    ex->add_option("--T", T, "final time");
    ex->add_option("--X", X, "domain length");

    auto* cv = app.add_subcommand("converge", "small-viscosity convergence study");
    add_common(cv, true);
    cv->add_option("--eps", eps, "eps values")->delimiter(',');
    cv->add_option("--T", T, "final time");
    cv->add_option("--X", X, "domain length");

    std::string only;
    auto* ac = app.add_subcommand("accept", "acceptance suite");
    add_common(ac, false);
    ac->add_option("--only", only, "criterion numbers or groups (stability, cauchy, evans, resolvent, converge, expand, properties)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kInput;
    }

    try {
        if (ac->parsed()) return cmd_accept(common, only);
        CLI::App* sub = app.get_subcommands().front();
        const auto m = resolve_model(common.model, overrides_from(sub->remaining()));
        if (stab->parsed()) return cmd_stability(common, m, grid, gammaLevels, tol);
        if (ev->parsed()) return cmd_evans(common, m, egrid, rhoMax, radii);
        if (ex->parsed()) return cmd_expand(common, m, order, eps, h, T, X);
        return cmd_converge(common, m, eps, T, X);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return is_input_error(e.kind()) ? kInput : kNumeric;
    } catch (const std::filesystem::filesystem_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kInput;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kNumeric;
    }
}
