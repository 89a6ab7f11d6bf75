#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace minsurf {

using Vec3 = Eigen::Vector3d;

inline constexpr double kPi = 3.14159265358979323846;

struct Tolerances {
    double ode = 1e-8;
    double frame = 1e-6;
    double geo = 1e-5;
    double quad = 1e-12;
    double solver = 1e-8;
    double match = 1e-8;
    double eig = 1e-8;
    double pair = 1e-8;
    double sym = 1e-6;
    double weld = 1e-6;
};

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Row-major 2-D array indexed (i, k): i along the open direction, k along the periodic one.
template <class T>
struct Field2 {
    int n0 = 0;
    int n1 = 0;
    std::vector<T> v;

    Field2() = default;
    Field2(int a, int b, T fill = T{}) : n0(a), n1(b), v(static_cast<std::size_t>(a) * b, fill) {}

    T& operator()(int i, int k) { return v[static_cast<std::size_t>(i) * n1 + k]; }
    const T& operator()(int i, int k) const { return v[static_cast<std::size_t>(i) * n1 + k]; }
};

using Grid2 = Field2<double>;
using VGrid2 = Field2<Vec3>;

std::vector<double> linspace(double a, double b, int n);

// Uniform periodic samples [0, period) with n points.
std::vector<double> periodic_grid(double period, int n);

// Fourth-order finite differences on uniform grids. Non-periodic variants use one-sided
// five-point stencils on the two boundary nodes at each end.
template <class T>
std::vector<T> d1_open(const std::vector<T>& f, double h);
template <class T>
std::vector<T> d2_open(const std::vector<T>& f, double h);
template <class T>
std::vector<T> d1_periodic(const std::vector<T>& f, double h);
template <class T>
std::vector<T> d2_periodic(const std::vector<T>& f, double h);

// Derivatives of a 2-D field along direction 0 (open) or 1 (periodic or open).
template <class T>
Field2<T> diff0(const Field2<T>& f, double h, int order);
template <class T>
Field2<T> diff1(const Field2<T>& f, double h, int order, bool periodic);

// Spectral derivative of periodic samples f(k*P/n), k = 0..n-1.
std::vector<double> spectral_derivative(const std::vector<double>& f, double period);

// Quintic Hermite interpolation through values, first and second derivatives on a
// uniform grid.
class QuinticHermite {
public:
    QuinticHermite() = default;
    QuinticHermite(double x0, double h, std::vector<double> f, std::vector<double> fp,
                   std::vector<double> fpp);

    double operator()(double x) const;
    double deriv(double x) const;
    double x_min() const { return x0_; }
    double x_max() const { return x0_ + h_ * static_cast<double>(f_.size() - 1); }
    bool empty() const { return f_.empty(); }

private:
    double x0_ = 0.0;
    double h_ = 1.0;
    std::vector<double> f_, fp_, fpp_;
};

// Lagrange interpolation on a uniform grid using a centered stencil of `npts` nodes.
double lagrange_uniform(const std::vector<double>& f, double x0, double h, double x, int npts = 6);
double lagrange_uniform_deriv(const std::vector<double>& f, double x0, double h, double x,
                              int npts = 6);

// Quintic smoothstep: 0 for x <= a, 1 for x >= b, C^2 in between.
double smoothstep(double x, double a, double b);
double smoothstep_deriv(double x, double a, double b);

// Cosine-series projection of periodic samples f(y_k), y_k = k*P/n, onto cos(j*2*pi*y/P),
// j = 0..J. Coefficients follow f = sum_j c_j cos(...).
std::vector<double> cosine_coefficients(const std::vector<double>& f, int J);
std::vector<double> cosine_synthesis(const std::vector<double>& c, int n);

// Bisection/secant hybrid on a bracketing interval.
double find_root(const std::function<double(double)>& g, double a, double b, double xtol = 1e-15,
                 int max_iter = 200);

// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

double max_abs(const std::vector<double>& f);
double max_abs(const Grid2& f);

}  // namespace minsurf
