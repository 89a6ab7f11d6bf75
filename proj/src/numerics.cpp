#include "minsurf/numerics.hpp"

#include <boost/math/tools/roots.hpp>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cstdint>

namespace minsurf {

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> x(static_cast<std::size_t>(n));
    if (n == 1) {
        x[0] = a;
        return x;
    }
    for (int i = 0; i < n; ++i) x[i] = a + (b - a) * static_cast<double>(i) / (n - 1);
    return x;
}

std::vector<double> periodic_grid(double period, int n) {
    std::vector<double> x(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) x[i] = period * static_cast<double>(i) / n;
    return x;
}

template <class T>
std::vector<T> d1_open(const std::vector<T>& f, double h) {
    const int n = static_cast<int>(f.size());
    if (n < 5) throw NumericalError("d1_open: need at least 5 nodes");
    std::vector<T> d(f.size());
    const double c = 1.0 / (12.0 * h);
    d[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) * c;
    d[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) * c;
    for (int i = 2; i < n - 2; ++i) d[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) * c;
    d[n - 1] = (25.0 * f[n - 1] - 48.0 * f[n - 2] + 36.0 * f[n - 3] - 16.0 * f[n - 4] + 3.0 * f[n - 5]) * c;
    d[n - 2] = (3.0 * f[n - 1] + 10.0 * f[n - 2] - 18.0 * f[n - 3] + 6.0 * f[n - 4] - f[n - 5]) * c;
    return d;
}

template <class T>
std::vector<T> d2_open(const std::vector<T>& f, double h) {
    const int n = static_cast<int>(f.size());
    if (n < 6) throw NumericalError("d2_open: need at least 6 nodes");
    std::vector<T> d(f.size());
    const double c = 1.0 / (12.0 * h * h);
    d[0] = (45.0 * f[0] - 154.0 * f[1] + 214.0 * f[2] - 156.0 * f[3] + 61.0 * f[4] - 10.0 * f[5]) * c;
    d[1] = (10.0 * f[0] - 15.0 * f[1] - 4.0 * f[2] + 14.0 * f[3] - 6.0 * f[4] + f[5]) * c;
    for (int i = 2; i < n - 2; ++i)
        d[i] = (-f[i - 2] + 16.0 * f[i - 1] - 30.0 * f[i] + 16.0 * f[i + 1] - f[i + 2]) * c;
    d[n - 1] = (45.0 * f[n - 1] - 154.0 * f[n - 2] + 214.0 * f[n - 3] - 156.0 * f[n - 4] + 61.0 * f[n - 5] -
                10.0 * f[n - 6]) *
               c;
    d[n - 2] = (10.0 * f[n - 1] - 15.0 * f[n - 2] - 4.0 * f[n - 3] + 14.0 * f[n - 4] - 6.0 * f[n - 5] +
                f[n - 6]) *
               c;
    return d;
}

template <class T>
std::vector<T> d1_periodic(const std::vector<T>& f, double h) {
    const int n = static_cast<int>(f.size());
    if (n < 5) throw NumericalError("d1_periodic: need at least 5 nodes");
    std::vector<T> d(f.size());
    const double c = 1.0 / (12.0 * h);
    auto at = [&](int i) -> const T& { return f[(i % n + n) % n]; };
    for (int i = 0; i < n; ++i) d[i] = (at(i - 2) - 8.0 * at(i - 1) + 8.0 * at(i + 1) - at(i + 2)) * c;
    return d;
}

template <class T>
std::vector<T> d2_periodic(const std::vector<T>& f, double h) {
    const int n = static_cast<int>(f.size());
    if (n < 5) throw NumericalError("d2_periodic: need at least 5 nodes");
    std::vector<T> d(f.size());
    const double c = 1.0 / (12.0 * h * h);
    auto at = [&](int i) -> const T& { return f[(i % n + n) % n]; };
    for (int i = 0; i < n; ++i)
        d[i] = (-at(i - 2) + 16.0 * at(i - 1) - 30.0 * at(i) + 16.0 * at(i + 1) - at(i + 2)) * c;
    return d;
}

template <class T>
Field2<T> diff0(const Field2<T>& f, double h, int order) {
    Field2<T> out(f.n0, f.n1);
    std::vector<T> col(static_cast<std::size_t>(f.n0));
    for (int k = 0; k < f.n1; ++k) {
        for (int i = 0; i < f.n0; ++i) col[i] = f(i, k);
        const std::vector<T> d = order == 1 ? d1_open(col, h) : d2_open(col, h);
        for (int i = 0; i < f.n0; ++i) out(i, k) = d[i];
    }
    return out;
}

template <class T>
Field2<T> diff1(const Field2<T>& f, double h, int order, bool periodic) {
    Field2<T> out(f.n0, f.n1);
    std::vector<T> row(static_cast<std::size_t>(f.n1));
    for (int i = 0; i < f.n0; ++i) {
        for (int k = 0; k < f.n1; ++k) row[k] = f(i, k);
        std::vector<T> d;
        if (periodic)
            d = order == 1 ? d1_periodic(row, h) : d2_periodic(row, h);
        else
            d = order == 1 ? d1_open(row, h) : d2_open(row, h);
        for (int k = 0; k < f.n1; ++k) out(i, k) = d[k];
    }
    return out;
}

template std::vector<double> d1_open(const std::vector<double>&, double);
template std::vector<double> d2_open(const std::vector<double>&, double);
template std::vector<double> d1_periodic(const std::vector<double>&, double);
template std::vector<double> d2_periodic(const std::vector<double>&, double);
template std::vector<Vec3> d1_open(const std::vector<Vec3>&, double);
template std::vector<Vec3> d2_open(const std::vector<Vec3>&, double);
template std::vector<Vec3> d1_periodic(const std::vector<Vec3>&, double);
template std::vector<Vec3> d2_periodic(const std::vector<Vec3>&, double);
template Field2<double> diff0(const Field2<double>&, double, int);
template Field2<double> diff1(const Field2<double>&, double, int, bool);
template Field2<Vec3> diff0(const Field2<Vec3>&, double, int);
template Field2<Vec3> diff1(const Field2<Vec3>&, double, int, bool);

QuinticHermite::QuinticHermite(double x0, double h, std::vector<double> f, std::vector<double> fp,
                               std::vector<double> fpp)
    : x0_(x0), h_(h), f_(std::move(f)), fp_(std::move(fp)), fpp_(std::move(fpp)) {
    if (f_.size() < 2 || fp_.size() != f_.size() || fpp_.size() != f_.size())
        throw NumericalError("QuinticHermite: inconsistent sample arrays");
}

namespace {

struct HermiteBasis {
    double v[6];
    double d[6];
};

HermiteBasis hermite_basis(double s) {
    const double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
    HermiteBasis b{};
    b.v[0] = 1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5;
    b.v[1] = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
    b.v[2] = 0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5;
    b.v[3] = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;
    b.v[4] = -4.0 * s3 + 7.0 * s4 - 3.0 * s5;
    b.v[5] = 0.5 * s3 - s4 + 0.5 * s5;
    b.d[0] = -30.0 * s2 + 60.0 * s3 - 30.0 * s4;
    b.d[1] = 1.0 - 18.0 * s2 + 32.0 * s3 - 15.0 * s4;
    b.d[2] = s - 4.5 * s2 + 6.0 * s3 - 2.5 * s4;
    b.d[3] = 30.0 * s2 - 60.0 * s3 + 30.0 * s4;
    b.d[4] = -12.0 * s2 + 28.0 * s3 - 15.0 * s4;
    b.d[5] = 1.5 * s2 - 4.0 * s3 + 2.5 * s4;
    return b;
}

}  // namespace

double QuinticHermite::operator()(double x) const {
    const int n = static_cast<int>(f_.size());
    int i = static_cast<int>(std::floor((x - x0_) / h_));
    i = std::clamp(i, 0, n - 2);
    const double s = (x - x0_) / h_ - i;
    const HermiteBasis b = hermite_basis(s);
    return b.v[0] * f_[i] + b.v[1] * h_ * fp_[i] + b.v[2] * h_ * h_ * fpp_[i] + b.v[3] * f_[i + 1] +
           b.v[4] * h_ * fp_[i + 1] + b.v[5] * h_ * h_ * fpp_[i + 1];
}

double QuinticHermite::deriv(double x) const {
    const int n = static_cast<int>(f_.size());
    int i = static_cast<int>(std::floor((x - x0_) / h_));
    i = std::clamp(i, 0, n - 2);
    const double s = (x - x0_) / h_ - i;
    const HermiteBasis b = hermite_basis(s);
    return (b.d[0] * f_[i] + b.d[1] * h_ * fp_[i] + b.d[2] * h_ * h_ * fpp_[i] + b.d[3] * f_[i + 1] +
            b.d[4] * h_ * fp_[i + 1] + b.d[5] * h_ * h_ * fpp_[i + 1]) /
           h_;
}

namespace {

int lagrange_start(int n, double x0, double h, double x, int npts) {
    int i = static_cast<int>(std::floor((x - x0) / h)) - npts / 2 + 1;
    return std::clamp(i, 0, n - npts);
}

}  // namespace

double lagrange_uniform(const std::vector<double>& f, double x0, double h, double x, int npts) {
    const int n = static_cast<int>(f.size());
    if (n < npts) throw NumericalError("lagrange_uniform: too few nodes");
    const int i0 = lagrange_start(n, x0, h, x, npts);
    const double u = (x - x0) / h - i0;
    double sum = 0.0;
    for (int a = 0; a < npts; ++a) {
        double w = 1.0;
        for (int b = 0; b < npts; ++b)
            if (b != a) w *= (u - b) / static_cast<double>(a - b);
        sum += w * f[i0 + a];
    }
    return sum;
}

double lagrange_uniform_deriv(const std::vector<double>& f, double x0, double h, double x, int npts) {
    const int n = static_cast<int>(f.size());
    if (n < npts) throw NumericalError("lagrange_uniform_deriv: too few nodes");
    const int i0 = lagrange_start(n, x0, h, x, npts);
    const double u = (x - x0) / h - i0;
    double sum = 0.0;
    for (int a = 0; a < npts; ++a) {
        double denom = 1.0;
        for (int b = 0; b < npts; ++b)
            if (b != a) denom *= static_cast<double>(a - b);
        double dw = 0.0;
        for (int m = 0; m < npts; ++m) {
            if (m == a) continue;
            double p = 1.0;
            for (int b = 0; b < npts; ++b)
                if (b != a && b != m) p *= (u - b);
            dw += p;
        }
        sum += dw / denom * f[i0 + a];
    }
    return sum / h;
}

double smoothstep(double x, double a, double b) {
    if (x <= a) return 0.0;
    if (x >= b) return 1.0;
    const double s = (x - a) / (b - a);
    return s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

double smoothstep_deriv(double x, double a, double b) {
    if (x <= a || x >= b) return 0.0;
    const double s = (x - a) / (b - a);
    return 30.0 * s * s * (1.0 - s) * (1.0 - s) / (b - a);
}

std::vector<double> cosine_coefficients(const std::vector<double>& f, int J) {
    const int n = static_cast<int>(f.size());
    std::vector<double> c(static_cast<std::size_t>(J + 1), 0.0);
    for (int j = 0; j <= J; ++j) {
        double s = 0.0;
        for (int k = 0; k < n; ++k) {
            const auto jk = static_cast<std::int64_t>(j) * k % n;
            s += f[k] * std::cos(2.0 * kPi * static_cast<double>(jk) / n);
        }
        const bool edge = (j == 0) || (2 * j == n);
        c[j] = s * (edge ? 1.0 : 2.0) / n;
    }
    return c;
}

std::vector<double> spectral_derivative(const std::vector<double>& f, double period) {
    const int n = static_cast<int>(f.size());
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> F;
    fft.fwd(F, f);
    const double w = 2.0 * kPi / period;
    for (int k = 0; k < n; ++k) {
        int m = k <= n / 2 ? k : k - n;
        if (2 * k == n) m = 0;  // no derivative for the unpaired Nyquist mode
        F[k] *= std::complex<double>(0.0, w * m);
    }
    std::vector<double> out;
    fft.inv(out, F);
    return out;
}

std::vector<double> cosine_synthesis(const std::vector<double>& c, int n) {
    std::vector<double> f(static_cast<std::size_t>(n), 0.0);
    for (int k = 0; k < n; ++k) {
        double s = 0.0;
        for (std::size_t j = 0; j < c.size(); ++j) {
            const auto jk = static_cast<std::int64_t>(j) * k % n;
            s += c[j] * std::cos(2.0 * kPi * static_cast<double>(jk) / n);
        }
        f[k] = s;
    }
    return f;
}

double find_root(const std::function<double(double)>& g, double a, double b, double xtol, int max_iter) {
    double fa = g(a), fb = g(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (fa * fb > 0.0) throw NumericalError("find_root: interval does not bracket a root");
    std::uintmax_t it = static_cast<std::uintmax_t>(max_iter);
    auto tol = [xtol](double l, double r) { return std::abs(r - l) <= xtol * std::max(1.0, std::abs(l)); };
    const auto r = boost::math::tools::toms748_solve(g, a, b, fa, fb, tol, it);
    return 0.5 * (r.first + r.second);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw NumericalError("loglog_slope: need matching samples");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double dn = static_cast<double>(n);
    return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

double max_abs(const std::vector<double>& f) {
    double m = 0.0;
    for (double x : f) m = std::max(m, std::abs(x));
    return m;
}

double max_abs(const Grid2& f) { return max_abs(f.v); }

}  // namespace minsurf
