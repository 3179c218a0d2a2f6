#include "hpbl/field.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "hpbl/io.hpp"

namespace hpbl {

namespace {

void require_same(const DiscreteField& a, const DiscreteField& b) {
    if (!a.same_grid(b)) throw Error(ErrorKind::DimensionMismatch, "fields live on different grids");
}

void require_nodes(const DiscreteField& u, int minT, int minX) {
    if (u.nt < minT || u.nx < minX)
        throw Error(ErrorKind::WrongShape, "field grid too small for the difference stencil");
}

// Trapezoidal weight of node j among n nodes.
double trap(int j, int n) { return (n > 1 && (j == 0 || j == n - 1)) ? 0.5 : 1.0; }

}  // namespace

DiscreteField DiscreteField::zeros(int N, int nt, int nx, double dt, double dx) {
    if (N < 1 || nt < 1 || nx < 1) throw Error(ErrorKind::InvalidArgument, "field dimensions must be positive");
    DiscreteField f;
    f.N = N;
    f.nt = nt;
    f.nx = nx;
    f.dt = dt;
    f.dx = dx;
    f.values.assign(static_cast<std::size_t>(N) * nt * nx, 0.0);
    return f;
}

DiscreteField DiscreteField::like(const DiscreteField& g, int N) {
    DiscreteField f = zeros(N < 0 ? g.N : N, g.nt, g.nx, g.dt, g.dx);
    f.timeOrigin = g.timeOrigin;
    f.xOrigin = g.xOrigin;
    return f;
}

DiscreteField DiscreteField::sample(int N, int nt, int nx, double dt, double dx,
                                    const std::function<RVector(double, double)>& fn) {
    DiscreteField f = zeros(N, nt, nx, dt, dx);
    for (int n = 0; n < nt; ++n)
        for (int i = 0; i < nx; ++i) f.set_node(n, i, fn(f.t(n), f.x(i)));
    return f;
}

RVector DiscreteField::node(int n, int i) const {
    return Eigen::Map<const RVector>(values.data() + index(n, i), N);
}

void DiscreteField::set_node(int n, int i, const RVector& v) {
    if (v.size() != N) throw Error(ErrorKind::DimensionMismatch, "node value has the wrong length");
    Eigen::Map<RVector>(values.data() + index(n, i), N) = v;
}

bool DiscreteField::same_grid(const DiscreteField& o) const {
    return N == o.N && nt == o.nt && nx == o.nx && dt == o.dt && dx == o.dx && timeOrigin == o.timeOrigin &&
           xOrigin == o.xOrigin;
}

double DiscreteField::max_abs() const {
    double m = 0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

bool DiscreteField::finite() const {
    for (double v : values)
        if (!std::isfinite(v)) return false;
    return true;
}

DiscreteField DiscreteField::column(int i) const {
    DiscreteField b = zeros(N, nt, 1, dt, dx);
    b.timeOrigin = timeOrigin;
    b.xOrigin = x(i);
    for (int n = 0; n < nt; ++n) b.set_node(n, 0, node(n, i));
    return b;
}

DiscreteField& DiscreteField::operator+=(const DiscreteField& o) {
    require_same(*this, o);
    for (std::size_t k = 0; k < values.size(); ++k) values[k] += o.values[k];
    return *this;
}

DiscreteField& DiscreteField::operator-=(const DiscreteField& o) {
    require_same(*this, o);
    for (std::size_t k = 0; k < values.size(); ++k) values[k] -= o.values[k];
    return *this;
}

DiscreteField& DiscreteField::operator*=(double s) {
    for (double& v : values) v *= s;
    return *this;
}

DiscreteField operator+(DiscreteField a, const DiscreteField& b) { return a += b; }
DiscreteField operator-(DiscreteField a, const DiscreteField& b) { return a -= b; }
DiscreteField operator*(double s, DiscreteField a) { return a *= s; }

double max_norm(const DiscreteField& f) { return f.max_abs(); }

double weighted_l2_norm(const DiscreteField& f, double gamma) {
    double s = 0;
    for (int n = 0; n < f.nt; ++n) {
        const double w = trap(n, f.nt) * std::exp(-2 * gamma * f.t(n));
        for (int i = 0; i < f.nx; ++i) s += w * trap(i, f.nx) * f.node(n, i).squaredNorm();
    }
    const double cellT = f.nt > 1 ? f.dt : 1.0, cellX = f.nx > 1 ? f.dx : 1.0;
    return std::sqrt(s * cellT * cellX);
}

double l2_norm(const DiscreteField& f) { return weighted_l2_norm(f, 0.0); }

DiscreteField normal_trace_derivative(const DiscreteField& u) {
    require_nodes(u, 1, 3);
    DiscreteField b = u.column(0);
    for (int n = 0; n < u.nt; ++n)
        b.set_node(n, 0, (-3 * u.node(n, 0) + 4 * u.node(n, 1) - u.node(n, 2)) / (2 * u.dx));
    return b;
}

DiscreteField dx_field(const DiscreteField& u) {
    require_nodes(u, 1, 3);
    DiscreteField d = DiscreteField::like(u);
    const int m = u.nx - 1;
    for (int n = 0; n < u.nt; ++n) {
        d.set_node(n, 0, (-3 * u.node(n, 0) + 4 * u.node(n, 1) - u.node(n, 2)) / (2 * u.dx));
        for (int i = 1; i < m; ++i) d.set_node(n, i, (u.node(n, i + 1) - u.node(n, i - 1)) / (2 * u.dx));
        d.set_node(n, m, (3 * u.node(n, m) - 4 * u.node(n, m - 1) + u.node(n, m - 2)) / (2 * u.dx));
    }
    return d;
}

DiscreteField dt_field(const DiscreteField& u) {
    if (u.nt < 3) throw Error(ErrorKind::WrongShape, "field grid too small for the difference stencil");
    DiscreteField d = DiscreteField::like(u);
    const int m = u.nt - 1;
    for (int i = 0; i < u.nx; ++i) {
        d.set_node(0, i, (-3 * u.node(0, i) + 4 * u.node(1, i) - u.node(2, i)) / (2 * u.dt));
        for (int n = 1; n < m; ++n) d.set_node(n, i, (u.node(n + 1, i) - u.node(n - 1, i)) / (2 * u.dt));
        d.set_node(m, i, (3 * u.node(m, i) - 4 * u.node(m - 1, i) + u.node(m - 2, i)) / (2 * u.dt));
    }
    return d;
}

DiscreteField laplacian_field(const DiscreteField& u) {
    require_nodes(u, 1, 6);
    DiscreteField d = DiscreteField::like(u);
    const double h2 = 12 * u.dx * u.dx;
    const int m = u.nx - 1;
    static const double edge0[6] = {45, -154, 214, -156, 61, -10};
    static const double edge1[6] = {10, -15, -4, 14, -6, 1};
    for (int n = 0; n < u.nt; ++n) {
        auto at = [&](int i) { return u.node(n, i); };
        RVector e0 = RVector::Zero(u.N), e1 = e0, f0 = e0, f1 = e0;
        for (int k = 0; k < 6; ++k) {
            e0 += edge0[k] * at(k);
            e1 += edge1[k] * at(k);
            f0 += edge0[k] * at(m - k);
            f1 += edge1[k] * at(m - k);
        }
        d.set_node(n, 0, e0 / h2);
        d.set_node(n, 1, e1 / h2);
        d.set_node(n, m, f0 / h2);
        d.set_node(n, m - 1, f1 / h2);
        for (int i = 2; i < m - 1; ++i)
            d.set_node(n, i, (-at(i - 2) + 16 * at(i - 1) - 30 * at(i) + 16 * at(i + 1) - at(i + 2)) / h2);
    }
    return d;
}

namespace {

template <typename Fn>
DiscreteField cell_op(const DiscreteField& u, Fn fn) {
    require_nodes(u, 2, 2);
    DiscreteField c = DiscreteField::zeros(u.N, u.nt - 1, u.nx - 1, u.dt, u.dx);
    c.timeOrigin = u.timeOrigin + 0.5 * u.dt;
    c.xOrigin = u.xOrigin + 0.5 * u.dx;
    for (int n = 0; n + 1 < u.nt; ++n)
        for (int i = 0; i + 1 < u.nx; ++i)
            c.set_node(n, i, fn(u.node(n, i), u.node(n, i + 1), u.node(n + 1, i), u.node(n + 1, i + 1)));
    return c;
}

}  // namespace

DiscreteField cell_average(const DiscreteField& u) {
    return cell_op(u, [](const RVector& a, const RVector& b, const RVector& c, const RVector& d) -> RVector {
        return 0.25 * (a + b + c + d);
    });
}

DiscreteField cell_dt(const DiscreteField& u) {
    const double k = 0.5 / u.dt;
    return cell_op(u, [k](const RVector& a, const RVector& b, const RVector& c, const RVector& d) -> RVector {
        return k * (c + d - a - b);
    });
}

DiscreteField cell_dx(const DiscreteField& u) {
    const double k = 0.5 / u.dx;
    return cell_op(u, [k](const RVector& a, const RVector& b, const RVector& c, const RVector& d) -> RVector {
        return k * (b - a + d - c);
    });
}

std::string field_json(const DiscreteField& f) {
    nlohmann::ordered_json j;
    j["dims"] = {f.nt, f.nx, f.N};
    j["spacing"] = {{"dt", f.dt}, {"dx", f.dx}};
    j["timeOrigin"] = f.timeOrigin;
    j["xOrigin"] = f.xOrigin;
    j["values"] = f.values;
    return j.dump();
}

std::string field_csv_slice(const DiscreteField& f, int n) {
    if (n < 0) n = f.nt - 1;
    if (n >= f.nt) throw Error(ErrorKind::InvalidArgument, "time index out of range");
    std::ostringstream out;
    out << "t,x";
    for (int k = 0; k < f.N; ++k) out << ",u" << (k + 1);
    out << "\n";
    for (int i = 0; i < f.nx; ++i) {
        out << fmt17(f.t(n)) << "," << fmt17(f.x(i));
        for (int k = 0; k < f.N; ++k) out << "," << fmt17(f.at(n, i, k));
        out << "\n";
    }
    return out.str();
}

}  // namespace hpbl
