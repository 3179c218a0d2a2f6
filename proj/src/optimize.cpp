#include "hpbl/optimize.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace hpbl {

std::pair<RVector, double> nelder_mead(const Objective& f, const RVector& x0, double step, int maxEval, double ftol) {
    const Eigen::Index n = x0.size();
    std::vector<RVector> pts(n + 1, x0);
    std::vector<double> val(n + 1);
    for (Eigen::Index i = 0; i < n; ++i) pts[i + 1](i) += step;
    int evals = 0;
    for (Eigen::Index i = 0; i <= n; ++i, ++evals) val[i] = f(pts[i]);
    std::vector<int> order(n + 1);
    while (evals < maxEval) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) { return val[a] < val[b]; });
        std::vector<RVector> p2;
        std::vector<double> v2;
        for (int o : order) {
            p2.push_back(pts[o]);
            v2.push_back(val[o]);
        }
        pts = p2;
        val = v2;
        if (val[0] == 0.0 || std::abs(val[n] - val[0]) <= ftol) break;
        RVector c = RVector::Zero(n);
        for (Eigen::Index i = 0; i < n; ++i) c += pts[i];
        c /= double(n);
        const RVector xr = c + (c - pts[n]);
        const double fr = f(xr);
        ++evals;
        if (fr < val[0]) {
            const RVector xe = c + 2.0 * (c - pts[n]);
            const double fe = f(xe);
            ++evals;
            if (fe < fr) {
                pts[n] = xe;
                val[n] = fe;
            } else {
                pts[n] = xr;
                val[n] = fr;
            }
        } else if (fr < val[n - 1]) {
            pts[n] = xr;
            val[n] = fr;
        } else {
            const bool outside = fr < val[n];
            const RVector xc = outside ? RVector(c + 0.5 * (xr - c)) : RVector(c + 0.5 * (pts[n] - c));
            const double fc = f(xc);
            ++evals;
            if (fc < std::min(fr, val[n])) {
                pts[n] = xc;
                val[n] = fc;
            } else {
                for (Eigen::Index i = 1; i <= n; ++i) {
                    pts[i] = pts[0] + 0.5 * (pts[i] - pts[0]);
                    val[i] = f(pts[i]);
                    ++evals;
                }
            }
        }
    }
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i <= n; ++i)
        if (val[i] < val[best]) best = i;
    return {pts[best], val[best]};
}

}  // namespace hpbl
