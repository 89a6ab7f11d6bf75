#include "minsurf/riemann_core.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>

namespace odeint = boost::numeric::odeint;

namespace minsurf {

namespace {

using State1 = std::array<double, 1>;
using State2 = std::array<double, 2>;
using State3 = std::array<double, 3>;

constexpr double kAtol = 1e-14;
constexpr double kRtol = 1e-12;

template <class State, class Sys>
std::vector<State> integrate_to(Sys sys, State x0, double t0, const std::vector<double>& times,
                                double rtol = kRtol) {
    // `times` must be monotone away from t0; returns the state at each requested time.
    std::vector<State> out;
    out.reserve(times.size());
    if (times.empty()) return out;
    std::vector<double> ts;
    ts.reserve(times.size() + 1);
    ts.push_back(t0);
    for (double t : times) ts.push_back(t);
    const double dir = (times.back() >= t0) ? 1.0 : -1.0;
    auto stepper = odeint::make_controlled(kAtol, rtol, odeint::runge_kutta_fehlberg78<State>());
    bool first = true;
    try {
        odeint::integrate_times(
            stepper, sys, x0, ts.begin(), ts.end(), dir * 1e-3,
            [&](const State& x, double) {
                if (first) {
                    first = false;
                    return;
                }
                out.push_back(x);
            },
            odeint::max_step_checker(20000));
    } catch (const std::exception& ex) {
        throw NumericalError(std::string("adaptive integration failed: ") + ex.what());
    }
    return out;
}

// Recursion is kept shallow: the reported error estimate of the adaptive rule inflates with
// depth, so callers split the interval themselves where the integrand is peaked.
template <class F>
double gk_integrate(F f, double a, double b, double tol) {
    double err = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 6, tol, &err);
    if (!(err <= std::max(1e3 * tol * std::max(1.0, std::abs(v)), 1e-15)))
        throw NumericalError("quadrature failed to converge");
    return v;
}

}  // namespace

double initial_radius(double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("initial_radius: epsilon must be positive");
    return std::sqrt(2.0 / (1.0 + std::sqrt(1.0 + 4.0 * epsilon * epsilon)));
}

double zeta_max(double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("zeta_max: epsilon must be positive");
    return std::sqrt((1.0 + std::sqrt(1.0 + 4.0 * epsilon * epsilon)) / (2.0 * epsilon * epsilon));
}

double period_t(double epsilon, double quad_tol) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("period_t: epsilon must be positive");
    // 1 + z^2 - eps^2 z^4 = eps^2 (Z^2 - z^2)(z^2 + beta). The inverse square root at z = Z is
    // removed by z = Z sin(phi), leaving a smooth integrand on [0, pi/2].
    const double Z = zeta_max(epsilon);
    const double beta = initial_radius(epsilon) * initial_radius(epsilon);
    auto f = [&](double phi) {
        const double s = std::sin(phi);
        return 1.0 / std::sqrt(Z * Z * s * s + beta);
    };
    // The integrand has a peak of width sqrt(beta)/Z at phi = 0; split geometrically across it.
    double v = 0.0, lo = 0.0, hi = std::sqrt(beta) / Z;
    while (lo < kPi / 2.0) {
        hi = std::min(hi, kPi / 2.0);
        v += gk_integrate(f, lo, hi, quad_tol);
        lo = hi;
        hi *= 8.0;
    }
    return v / epsilon;
}

double blowup_tail(double epsilon, double R) {
    const double zs = 1.0 / (epsilon * R);
    auto f = [&](double z) { return 1.0 / std::sqrt(1.0 + z * z - epsilon * epsilon * z * z * z * z); };
    return gk_integrate(f, 0.0, zs, 1e-14);
}

double shift_tail(double epsilon, double R) {
    const double zs = 1.0 / (epsilon * R);
    auto f = [&](double z) {
        const double p = 1.0 + z * z - epsilon * epsilon * z * z * z * z;
        const double sp = std::sqrt(p);
        return (epsilon * epsilon * z * z - 1.0) / (epsilon * sp * (1.0 + sp));
    };
    return gk_integrate(f, 0.0, zs, 1e-14);
}

RiemannProfile solve_profile(double epsilon, double margin, double dt, const Tolerances& tol) {
    if (!(epsilon > 0.0 && epsilon <= 0.5)) throw std::invalid_argument("solve_profile: epsilon must lie in (0, 0.5]");
    if (!(margin > 0.0)) throw std::invalid_argument("solve_profile: margin must be positive");
    RiemannProfile p;
    p.epsilon = epsilon;
    p.R0 = initial_radius(epsilon);
    p.t_blowup = period_t(epsilon);
    const double t_stop = p.t_blowup - margin;
    if (t_stop <= 4.0 * dt) throw std::invalid_argument("solve_profile: margin leaves no integration range");
    const int n = static_cast<int>(std::floor(t_stop / dt));
    std::vector<double> times(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) times[i] = (i + 1) * dt;

    const double e2 = epsilon * epsilon;
    auto sys = [e2, epsilon](const State3& x, State3& dx, double) {
        dx[0] = x[1];
        dx[1] = x[0] + 2.0 * e2 * x[0] * x[0] * x[0];
        dx[2] = epsilon * x[0] * x[0];
    };
    const auto states = integrate_to<State3>(sys, State3{p.R0, 0.0, 0.0}, 0.0, times);
    if (static_cast<int>(states.size()) != n) throw NumericalError("solve_profile: step-size collapse before t_eps - margin");

    const int m = 2 * n + 1;
    p.t_grid.resize(m);
    p.R.resize(m);
    p.Rp.resize(m);
    p.c.resize(m);
    p.t_grid[n] = 0.0;
    p.R[n] = p.R0;
    p.Rp[n] = 0.0;
    p.c[n] = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto& s = states[i];
        p.t_grid[n + 1 + i] = times[i];
        p.R[n + 1 + i] = s[0];
        p.Rp[n + 1 + i] = s[1];
        p.c[n + 1 + i] = s[2];
        p.t_grid[n - 1 - i] = -times[i];
        p.R[n - 1 - i] = s[0];
        p.Rp[n - 1 - i] = -s[1];
        p.c[n - 1 - i] = -s[2];
    }
    for (int i = 0; i < m; ++i) {
        const double R = p.R[i], Rp = p.Rp[i];
        // Residuals are taken relative to the size of the terms being balanced.
        const double scale = 1.0 + R * R + e2 * R * R * R * R;
        p.max_residual_R = std::max(p.max_residual_R, std::abs(Rp * Rp + 1.0 - R * R - e2 * R * R * R * R) / scale);
    }
    // c' = eps R^2 is checked through the interpolant derivative against the ODE.
    ProfileEval ev(p);
    for (int i = 0; i + 1 < m; ++i) {
        const double tm = 0.5 * (p.t_grid[i] + p.t_grid[i + 1]);
        const double cp = (ev.c(p.t_grid[i + 1]) - ev.c(p.t_grid[i])) / dt;
        const double Rm = ev.R(tm);
        const double ref = epsilon * Rm * Rm;
        // Midpoint quotient is second-order; compare with the averaged integrand instead.
        const double Ra = p.R[i], Rb = p.R[i + 1];
        const double simpson = epsilon * (Ra * Ra + 4.0 * Rm * Rm + Rb * Rb) / 6.0;
        (void)ref;
        p.max_residual_c = std::max(p.max_residual_c, std::abs(cp - simpson) / (1.0 + simpson));
    }
    if (p.max_residual_R > tol.ode) throw NumericalError("solve_profile: first-integral residual above ode_tol");
    if (p.max_residual_c > tol.ode) throw NumericalError("solve_profile: c' residual above ode_tol");

    const double Rs = p.R.back();
    p.t_detected = p.t_grid.back() + blowup_tail(epsilon, Rs);
    p.ell = (p.c.back() - Rs) + shift_tail(epsilon, Rs);
    return p;
}

ProfileEval::ProfileEval(const RiemannProfile& p) : eps_(p.epsilon) {
    const std::size_t n = p.t_grid.size();
    std::vector<double> Rpp(n), cp(n), cpp(n);
    const double e = p.epsilon;
    for (std::size_t i = 0; i < n; ++i) {
        const double R = p.R[i];
        Rpp[i] = R + 2.0 * e * e * R * R * R;
        cp[i] = e * R * R;
        cpp[i] = 2.0 * e * R * p.Rp[i];
    }
    const double h = p.t_grid[1] - p.t_grid[0];
    R_ = QuinticHermite(p.t_grid.front(), h, p.R, p.Rp, Rpp);
    c_ = QuinticHermite(p.t_grid.front(), h, p.c, cp, cpp);
}

double ABSolution::a_at(double y) const {
    double r = std::fmod(y, y_period);
    if (r < 0) r += y_period;
    return a_interp_(r);
}

double ABSolution::b_at(double t) const {
    const double s = std::abs(t);
    if (s > b_interp_.x_max() + 1e-12) throw std::out_of_range("ABSolution::b_at: t outside computed range");
    return b_interp_(s);
}

double ABSolution::bp_at(double t) const {
    const double s = std::abs(t);
    if (s > b_interp_.x_max() + 1e-12) throw std::out_of_range("ABSolution::bp_at: t outside computed range");
    return (t >= 0 ? 1.0 : -1.0) * b_interp_.deriv(s);
}

ABSolution solve_ab(double epsilon, int n_y, double t_extent, double dt, const Tolerances& tol) {
    if (!(epsilon > 0.0 && epsilon <= 0.5)) throw std::invalid_argument("solve_ab: epsilon must lie in (0, 0.5]");
    ABSolution s;
    s.epsilon = epsilon;
    const double e2 = epsilon * epsilon;
    s.a0 = std::sqrt((std::sqrt(1.0 + 4.0 * e2) - 1.0) / 2.0);
    const double a02 = s.a0 * s.a0;

    // Least period from the phase v: a = a0 cos v, (v')^2 = 1 + a0^2 (1 + cos^2 v). The
    // integrand is smooth and periodic, so the trapezoid rule converges geometrically.
    {
        const int m = 512;
        double sum = 0.0;
        for (int k = 0; k < m; ++k) {
            const double v = 2.0 * kPi * k / m;
            const double cv = std::cos(v);
            sum += 1.0 / std::sqrt(1.0 + a02 * (1.0 + cv * cv));
        }
        s.y_period = sum * 2.0 * kPi / m;
    }
    s.tau = s.y_period / (2.0 * kPi);

    auto asys = [](const State2& x, State2& dx, double) {
        dx[0] = x[1];
        dx[1] = -x[0] - 2.0 * x[0] * x[0] * x[0];
    };
    // Turning point detection: a' changes sign from negative to positive at half period.
    {
        auto stepper = odeint::make_dense_output(kAtol, kRtol, odeint::runge_kutta_dopri5<State2>());
        stepper.initialize(State2{s.a0, 0.0}, 0.0, 1e-3);
        double found = -1.0;
        for (int it = 0; it < 100000 && found < 0; ++it) {
            const auto range = stepper.do_step(asys);
            State2 xa{}, xb{};
            stepper.calc_state(range.first, xa);
            stepper.calc_state(range.second, xb);
            if (range.first > 0.25 * s.y_period && xa[1] < 0.0 && xb[1] >= 0.0) {
                double lo = range.first, hi = range.second;
                for (int k = 0; k < 200 && hi - lo > 1e-15; ++k) {
                    const double mid = 0.5 * (lo + hi);
                    State2 xm{};
                    stepper.calc_state(mid, xm);
                    (xm[1] < 0.0 ? lo : hi) = mid;
                }
                found = 0.5 * (lo + hi);
            }
            if (range.second > 2.0 * s.y_period) break;
        }
        if (found < 0) throw NumericalError("solve_ab: period detection failed");
        s.y_period_ode = 2.0 * found;
        if (std::abs(s.y_period_ode - s.y_period) > 1e-7 * s.y_period)
            throw NumericalError("solve_ab: ODE period disagrees with the phase quadrature");
    }

    s.y_grid = linspace(0.0, s.y_period, n_y + 1);
    std::vector<double> ytimes(s.y_grid.begin() + 1, s.y_grid.end());
    const auto as = integrate_to<State2>(asys, State2{s.a0, 0.0}, 0.0, ytimes);
    s.a.assign(1, s.a0);
    s.ap.assign(1, 0.0);
    for (const auto& x : as) {
        s.a.push_back(x[0]);
        s.ap.push_back(x[1]);
    }
    std::vector<double> app(s.a.size());
    for (std::size_t k = 0; k < s.a.size(); ++k) {
        const double a = s.a[k], ap = s.ap[k];
        app[k] = -a - 2.0 * a * a * a;
        s.max_residual_a = std::max(s.max_residual_a, std::abs(ap * ap + a * a * a * a + a * a - e2));
    }
    s.a_interp_ = QuinticHermite(0.0, s.y_grid[1] - s.y_grid[0], s.a, s.ap, app);

    const double b0 = 1.0 / initial_radius(epsilon);
    auto bsys = [](const State2& x, State2& dx, double) {
        dx[0] = x[1];
        dx[1] = x[0] - 2.0 * x[0] * x[0] * x[0];
    };
    const int nb = static_cast<int>(std::ceil(t_extent / dt));
    s.t_grid = linspace(0.0, nb * dt, nb + 1);
    std::vector<double> ttimes(s.t_grid.begin() + 1, s.t_grid.end());
    const auto bs = integrate_to<State2>(bsys, State2{b0, 0.0}, 0.0, ttimes);
    s.b.assign(1, b0);
    s.bp.assign(1, 0.0);
    for (const auto& x : bs) {
        s.b.push_back(x[0]);
        s.bp.push_back(x[1]);
    }
    std::vector<double> bpp(s.b.size());
    for (std::size_t i = 0; i < s.b.size(); ++i) {
        const double b = s.b[i], bp = s.bp[i];
        bpp[i] = b - 2.0 * b * b * b;
        s.max_residual_b = std::max(s.max_residual_b, std::abs(bp * bp + b * b * b * b - e2 - b * b));
    }
    s.b_interp_ = QuinticHermite(0.0, dt, s.b, s.bp, bpp);
    if (s.max_residual_a > tol.ode || s.max_residual_b > tol.ode)
        throw NumericalError("solve_ab: ODE residual above ode_tol");
    return s;
}

namespace {

double psi_y_of(double eps, double R, double Rp, double psi) {
    const double cp = std::cos(psi);
    return std::sqrt(1.0 + eps * eps * R * R * (1.0 + cp * cp) + 2.0 * eps * Rp * cp);
}

std::vector<double> psi_on_axis(double eps, double R0, const std::vector<double>& ys) {
    auto sys = [eps, R0](const State1& x, State1& dx, double) { dx[0] = psi_y_of(eps, R0, 0.0, x[0]); };
    std::vector<double> out;
    out.reserve(ys.size());
    std::vector<double> pos;
    for (double y : ys)
        if (y > 0) pos.push_back(y);
    const auto st = integrate_to<State1>(sys, State1{0.0}, 0.0, pos);
    std::size_t j = 0;
    for (double y : ys) out.push_back(y > 0 ? st[j++][0] : 0.0);
    return out;
}

}  // namespace

double psi_at(const ProfileEval& prof, double t, double y) {
    const double eps = prof.epsilon();
    double psi0 = 0.0;
    if (y != 0.0) {
        auto sys = [&](const State1& x, State1& dx, double) { dx[0] = psi_y_of(eps, prof.R(0.0), 0.0, x[0]); };
        psi0 = integrate_to<State1>(sys, State1{0.0}, 0.0, std::vector<double>{y})[0][0];
    }
    if (t == 0.0) return psi0;
    auto tsys = [&](const State1& x, State1& dx, double tt) { dx[0] = eps * prof.R(tt) * std::sin(x[0]); };
    return integrate_to<State1>(tsys, State1{psi0}, 0.0, std::vector<double>{t})[0][0];
}

ConformalFrame conformal_frame(const RiemannProfile& profile, int nt, int ny, double t_extent,
                               const Tolerances& tol) {
    if (nt < 8 || ny < 8) throw std::invalid_argument("conformal_frame: grid too coarse");
    const double eps = profile.epsilon;
    const double T = t_extent > 0 ? t_extent : profile.t_max();
    if (T > profile.t_max() + 1e-12) throw std::invalid_argument("conformal_frame: extent beyond solved profile");
    ProfileEval ev(profile);
    ConformalFrame fr;
    fr.epsilon = eps;
    const double e2 = eps * eps;
    const double a02 = (std::sqrt(1.0 + 4.0 * e2) - 1.0) / 2.0;
    {
        const int m = 512;
        double sum = 0.0;
        for (int k = 0; k < m; ++k) {
            const double cv = std::cos(2.0 * kPi * k / m);
            sum += 1.0 / std::sqrt(1.0 + a02 * (1.0 + cv * cv));
        }
        fr.y_period = sum * 2.0 * kPi / m;
    }
    fr.tau = fr.y_period / (2.0 * kPi);
    fr.t_grid = linspace(-T, T, nt);
    fr.y_grid = periodic_grid(fr.y_period, ny);
    fr.R.resize(nt);
    fr.Rp.resize(nt);
    fr.c.resize(nt);
    fr.b.resize(nt);
    for (int i = 0; i < nt; ++i) {
        const double t = fr.t_grid[i];
        fr.R[i] = ev.R(t);
        fr.Rp[i] = ev.Rp(t);
        fr.c[i] = ev.c(t);
        fr.b[i] = 1.0 / fr.R[i];
    }
    const std::vector<double> psi0 = psi_on_axis(eps, profile.R0, fr.y_grid);

    fr.psi = Grid2(nt, ny);
    std::vector<double> tpos, tneg;
    std::vector<int> ipos, ineg;
    for (int i = 0; i < nt; ++i) {
        if (fr.t_grid[i] > 0) {
            tpos.push_back(fr.t_grid[i]);
            ipos.push_back(i);
        } else if (fr.t_grid[i] < 0) {
            tneg.push_back(fr.t_grid[i]);
            ineg.push_back(i);
        }
    }
    std::reverse(tneg.begin(), tneg.end());
    std::reverse(ineg.begin(), ineg.end());
    auto tsys = [&](const State1& x, State1& dx, double tt) { dx[0] = eps * ev.R(tt) * std::sin(x[0]); };
    for (int k = 0; k < ny; ++k) {
        const auto up = integrate_to<State1>(tsys, State1{psi0[k]}, 0.0, tpos, 1e-13);
        const auto dn = integrate_to<State1>(tsys, State1{psi0[k]}, 0.0, tneg, 1e-13);
        for (std::size_t j = 0; j < up.size(); ++j) fr.psi(ipos[j], k) = up[j][0];
        for (std::size_t j = 0; j < dn.size(); ++j) fr.psi(ineg[j], k) = dn[j][0];
        for (int i = 0; i < nt; ++i)
            if (fr.t_grid[i] == 0.0) fr.psi(i, k) = psi0[k];
    }

    fr.psi_t = Grid2(nt, ny);
    fr.psi_y = Grid2(nt, ny);
    fr.omega = Grid2(nt, ny);
    fr.sinh_omega = Grid2(nt, ny);
    fr.a = Grid2(nt, ny);
    Grid2 psi_yt(nt, ny), omega_t(nt, ny);
    for (int i = 0; i < nt; ++i) {
        const double R = fr.R[i], Rp = fr.Rp[i];
        const double Rpp = R + 2.0 * e2 * R * R * R;
        const double b = 1.0 / R, bt = -Rp / (R * R);
        for (int k = 0; k < ny; ++k) {
            const double ps = fr.psi(i, k);
            const double sp = std::sin(ps), cp = std::cos(ps);
            const double py = psi_y_of(eps, R, Rp, ps);
            const double pt = eps * R * sp;
            const double pyy = -e2 * R * R * sp * cp - eps * Rp * sp;
            const double a = eps * sp / py;
            const double ay = eps * (cp * py * py - sp * pyy) / (py * py);
            const double cosh_w = R * py;
            // cosh^2 w - 1 = (R' + eps R^2 cos psi)^2; the sign is fixed by the a, b relation.
            const double rel = (ay - bt) / (a * a + b * b);
            const double lin = Rp + eps * R * R * cp;
            const double sgn = (rel * lin >= 0.0) ? 1.0 : -1.0;
            const double sh = sgn * lin;
            fr.psi_t(i, k) = pt;
            fr.psi_y(i, k) = py;
            fr.a(i, k) = pt / cosh_w;
            fr.sinh_omega(i, k) = sh;
            fr.omega(i, k) = std::asinh(sh);
            fr.cosh_residual = std::max({fr.cosh_residual, std::abs(rel - sh) / (1.0 + std::abs(sh)),
                                         std::abs(std::sqrt(1.0 + sh * sh) - cosh_w) / cosh_w});
            // t-derivatives from the chain rule through the profile equation.
            const double rad_t = 2.0 * e2 * R * Rp * (1.0 + cp * cp) - 2.0 * e2 * R * R * cp * sp * pt +
                                 2.0 * eps * Rpp * cp - 2.0 * eps * Rp * sp * pt;
            psi_yt(i, k) = rad_t / (2.0 * py);
            omega_t(i, k) = sgn * (Rpp + 2.0 * eps * R * Rp * cp - eps * R * R * sp * pt) / cosh_w;
        }
    }
    // y-derivatives spectrally; psi - 2 pi y / y_eps is periodic.
    std::vector<double> row(ny), lin_part(ny);
    for (int k = 0; k < ny; ++k) lin_part[k] = 2.0 * kPi * fr.y_grid[k] / fr.y_period;
    for (int i = 0; i < nt; ++i) {
        for (int k = 0; k < ny; ++k) row[k] = fr.psi(i, k) - lin_part[k];
        const auto dpsi = spectral_derivative(row, fr.y_period);
        for (int k = 0; k < ny; ++k) row[k] = fr.psi_t(i, k);
        const auto dpt = spectral_derivative(row, fr.y_period);
        for (int k = 0; k < ny; ++k) row[k] = fr.omega(i, k);
        const auto dw = spectral_derivative(row, fr.y_period);
        for (int k = 0; k < ny; ++k) {
            const double py_num = dpsi[k] + 2.0 * kPi / fr.y_period;
            fr.integrability_residual =
                std::max({fr.integrability_residual, std::abs(dpt[k] - psi_yt(i, k)), std::abs(py_num - fr.psi_y(i, k))});
            fr.cauchy_riemann_residual = std::max({fr.cauchy_riemann_residual, std::abs(dw[k] + fr.psi_t(i, k)),
                                                   std::abs(omega_t(i, k) - fr.psi_y(i, k))});
        }
    }
    for (int k = 0; k < ny; ++k) {
        double lo = 1e300, hi = -1e300;
        for (int i = 0; i < nt; ++i) {
            lo = std::min(lo, fr.a(i, k));
            hi = std::max(hi, fr.a(i, k));
        }
        fr.a_t_variation = std::max(fr.a_t_variation, hi - lo);
    }
    if (fr.integrability_residual > tol.frame)
        throw NumericalError("conformal_frame: integrability residual above frame_tol");
    return fr;
}

double ImmersionPatch::max_abs_H(int skip) const {
    double m = 0.0;
    const int n0 = meanH.n0, n1 = meanH.n1;
    for (int i = skip; i < n0 - skip; ++i)
        for (int k = v_periodic ? 0 : skip; k < (v_periodic ? n1 : n1 - skip); ++k)
            m = std::max(m, std::abs(meanH(i, k)));
    return m;
}

ImmersionPatch patch_from_samples(const std::vector<double>& u_grid, const std::vector<double>& v_grid,
                                  bool v_periodic, const VGrid2& X, const VGrid2* N) {
    ImmersionPatch p;
    p.u_grid = u_grid;
    p.v_grid = v_grid;
    p.v_periodic = v_periodic;
    p.X = X;
    const int n0 = X.n0, n1 = X.n1;
    const double hu = u_grid[1] - u_grid[0];
    const double hv = v_grid[1] - v_grid[0];
    const VGrid2 Xu = diff0(X, hu, 1);
    const VGrid2 Xv = diff1(X, hv, 1, v_periodic);
    const VGrid2 Xuu = diff0(X, hu, 2);
    const VGrid2 Xvv = diff1(X, hv, 2, v_periodic);
    const VGrid2 Xuv = diff1(Xu, hv, 1, v_periodic);
    p.N = VGrid2(n0, n1);
    p.E = Grid2(n0, n1);
    p.F = Grid2(n0, n1);
    p.G = Grid2(n0, n1);
    p.e = Grid2(n0, n1);
    p.f = Grid2(n0, n1);
    p.g = Grid2(n0, n1);
    p.meanH = Grid2(n0, n1);
    for (int i = 0; i < n0; ++i) {
        for (int k = 0; k < n1; ++k) {
            const Vec3& a = Xu(i, k);
            const Vec3& b = Xv(i, k);
            Vec3 n = N ? (*N)(i, k) : a.cross(b).normalized();
            p.N(i, k) = n;
            const double E = a.dot(a), F = a.dot(b), G = b.dot(b);
            const double e = Xuu(i, k).dot(n), f = Xuv(i, k).dot(n), g = Xvv(i, k).dot(n);
            p.E(i, k) = E;
            p.F(i, k) = F;
            p.G(i, k) = G;
            p.e(i, k) = e;
            p.f(i, k) = f;
            p.g(i, k) = g;
            p.meanH(i, k) = (e * G - 2.0 * f * F + g * E) / (2.0 * (E * G - F * F));
        }
    }
    return p;
}

ImmersionPatch immerse(const ConformalFrame& fr, ImmersionReport* report, const Tolerances& tol) {
    const int nt = static_cast<int>(fr.t_grid.size()), ny = static_cast<int>(fr.y_grid.size());
    VGrid2 X(nt, ny), N(nt, ny);
    for (int i = 0; i < nt; ++i) {
        for (int k = 0; k < ny; ++k) {
            const double ps = fr.psi(i, k);
            const double R = fr.R[i];
            X(i, k) = Vec3(fr.c[i] + R * std::cos(ps), R * std::sin(ps), fr.t_grid[i]);
            const double ch = std::cosh(fr.omega(i, k));
            N(i, k) = Vec3(std::cos(ps), std::sin(ps), -fr.sinh_omega(i, k)) / ch;
        }
    }
    ImmersionPatch p = patch_from_samples(fr.t_grid, fr.y_grid, true, X, &N);
    ImmersionReport rep;
    const double eps = fr.epsilon;
    for (int i = 0; i < nt; ++i) {
        const double R = fr.R[i], Rp = fr.Rp[i];
        const double Rpp = R + 2.0 * eps * eps * R * R * R;
        const double cp1 = eps * R * R, cpp = 2.0 * eps * R * Rp;
        for (int k = 0; k < ny; ++k) {
            const double ps = fr.psi(i, k), sp = std::sin(ps), cs = std::cos(ps);
            const double pt = fr.psi_t(i, k), py = fr.psi_y(i, k);
            const double ptt = eps * Rp * sp + eps * R * cs * pt;
            const double pty = eps * R * cs * py;
            const double pyy = -eps * eps * R * R * sp * cs - eps * Rp * sp;
            // Exact derivatives of X through the frame equations.
            const Vec3 Xt(cp1 + Rp * cs - R * sp * pt, Rp * sp + R * cs * pt, 1.0);
            const Vec3 Xy(-R * sp * py, R * cs * py, 0.0);
            const Vec3 Xtt(cpp + Rpp * cs - 2.0 * Rp * sp * pt - R * cs * pt * pt - R * sp * ptt,
                           Rpp * sp + 2.0 * Rp * cs * pt - R * sp * pt * pt + R * cs * ptt, 0.0);
            const Vec3 Xty(-Rp * sp * py - R * cs * pt * py - R * sp * pty,
                           Rp * cs * py - R * sp * pt * py + R * cs * pty, 0.0);
            const Vec3 Xyy(-R * cs * py * py - R * sp * pyy, -R * sp * py * py + R * cs * pyy, 0.0);
            const Vec3& n = N(i, k);
            const double ch = std::cosh(fr.omega(i, k));
            const double c2 = ch * ch;
            // The metric factor grows like R^2 near the ends, so residuals are relative.
            rep.conformal_residual = std::max({rep.conformal_residual, std::abs(Xt.squaredNorm() - c2) / c2,
                                               std::abs(Xy.squaredNorm() - c2) / c2, std::abs(Xt.dot(Xy)) / c2});
            const double hs = 1.0 + std::abs(py);
            rep.second_form_residual =
                std::max({rep.second_form_residual, std::abs(Xtt.dot(n) - py) / hs, std::abs(Xyy.dot(n) + py) / hs,
                          std::abs(Xty.dot(n) + pt) / hs});
            rep.normal_residual = std::max({rep.normal_residual, std::abs(n.norm() - 1.0), std::abs(n.dot(Xt)) / ch,
                                            std::abs(n.dot(Xy)) / ch});
            if (i >= 2 && i < nt - 2)
                rep.fd_conformal_residual =
                    std::max({rep.fd_conformal_residual, std::abs(p.E(i, k) - c2) / c2,
                              std::abs(p.G(i, k) - c2) / c2, std::abs(p.F(i, k)) / c2});
        }
    }
    if (report) *report = rep;
    if (rep.conformal_residual > tol.geo) throw NumericalError("immerse: conformality residual above geo_tol");
    return p;
}

Grid2 jacobi_apply(const ConformalFrame& fr, const Grid2& field) {
    const int nt = field.n0, ny = field.n1;
    if (nt < 6 || ny < 5) throw std::invalid_argument("jacobi_apply: grid too coarse for the stencil");
    const Grid2 ftt = diff0(field, fr.ht(), 2);
    const Grid2 fyy = diff1(field, fr.hy(), 2, true);
    Grid2 out(nt, ny, 0.0);
    for (int i = 2; i < nt - 2; ++i)
        for (int k = 0; k < ny; ++k) {
            const double a = fr.a(i, k), b = fr.b[i];
            out(i, k) = ftt(i, k) + fyy(i, k) + 2.0 * (a * a + b * b) * field(i, k);
        }
    return out;
}

double verify_jacobi_kernel(const ConformalFrame& fr, const Grid2& field) { return max_abs(jacobi_apply(fr, field)); }

Grid2 normal_component(const ConformalFrame& fr, int axis) {
    const int nt = static_cast<int>(fr.t_grid.size()), ny = static_cast<int>(fr.y_grid.size());
    Grid2 out(nt, ny);
    for (int i = 0; i < nt; ++i)
        for (int k = 0; k < ny; ++k) {
            const double ch = std::cosh(fr.omega(i, k));
            const double ps = fr.psi(i, k);
            if (axis == 0)
                out(i, k) = std::cos(ps) / ch;
            else if (axis == 1)
                out(i, k) = std::sin(ps) / ch;
            else
                out(i, k) = -fr.sinh_omega(i, k) / ch;
        }
    return out;
}

}  // namespace minsurf
