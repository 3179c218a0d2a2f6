#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hpbl/types.hpp"

namespace hpbl {

// Real N-vectors on the uniform grid t_n = timeOrigin + n dt, x_i = xOrigin + i dx (n < nt, i < nx).
// Boundary fields use nx = 1.
struct DiscreteField {
    int N = 1;
    int nt = 0;
    int nx = 0;
    double dt = 0;
    double dx = 0;
    double timeOrigin = 0;
    double xOrigin = 0;
    std::vector<double> values;  // ((n * nx) + i) * N + k

    static DiscreteField zeros(int N, int nt, int nx, double dt, double dx);
    static DiscreteField like(const DiscreteField& g, int N = -1);
    static DiscreteField sample(int N, int nt, int nx, double dt, double dx,
                                const std::function<RVector(double t, double x)>& fn);

    double t(int n) const { return timeOrigin + n * dt; }
    double x(int i) const { return xOrigin + i * dx; }
    std::size_t index(int n, int i, int k = 0) const {
        return (static_cast<std::size_t>(n) * nx + i) * N + k;
    }
    double& at(int n, int i, int k = 0) { return values[index(n, i, k)]; }
    double at(int n, int i, int k = 0) const { return values[index(n, i, k)]; }
    RVector node(int n, int i) const;
    void set_node(int n, int i, const RVector& v);

    bool same_grid(const DiscreteField& o) const;
    double max_abs() const;
    bool finite() const;
    // Time trace at x_i as a boundary field.
    DiscreteField column(int i) const;

    DiscreteField& operator+=(const DiscreteField& o);
    DiscreteField& operator-=(const DiscreteField& o);
    DiscreteField& operator*=(double s);
};

DiscreteField operator+(DiscreteField a, const DiscreteField& b);
DiscreteField operator-(DiscreteField a, const DiscreteField& b);
DiscreteField operator*(double s, DiscreteField a);

// Sup norm over all nodes and components.
double max_norm(const DiscreteField& f);
// (int int |f|^2 dx dt)^{1/2} by the trapezoidal rule.
double l2_norm(const DiscreteField& f);
// |e^{-gamma t} f|_{L^2} by the trapezoidal rule.
double weighted_l2_norm(const DiscreteField& f, double gamma);

// Second-order one-sided x-derivative at x = 0 per time node (boundary field).
DiscreteField normal_trace_derivative(const DiscreteField& u);
// d/dx by second-order differences (one-sided at both ends).
DiscreteField dx_field(const DiscreteField& u);
// d^2/dx^2 by fourth-order differences (six-point one-sided near both ends).
DiscreteField laplacian_field(const DiscreteField& u);
// d/dt of a field by second-order differences (one-sided at both ends).
DiscreteField dt_field(const DiscreteField& u);

// Box averages and differences at the cell centers (t_{n+1/2}, x_{i+1/2}); result has (nt-1) x (nx-1) nodes.
DiscreteField cell_average(const DiscreteField& u);
DiscreteField cell_dt(const DiscreteField& u);
DiscreteField cell_dx(const DiscreteField& u);

std::string field_json(const DiscreteField& f);
// CSV rows t,x,u1..uN for the time node n (all x) or, with n < 0, for the final time.
std::string field_csv_slice(const DiscreteField& f, int n = -1);

}  // namespace hpbl
