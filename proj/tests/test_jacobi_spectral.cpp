#include "doctest.h"

#include "minsurf/jacobi_spectral.hpp"

#include <cmath>

using namespace minsurf;

TEST_CASE("even spectrum of D") {
    // Nearly free Laplacian: lambda_i -> i^2.
    const auto sp0 = spectrum_D(1e-6, 6, 32);
    for (int i = 0; i < 6; ++i) CHECK(std::abs(sp0.lambda[i] - i * i) < 1e-9);

    for (double e : {0.2, 0.1, 0.05}) {
        const auto sp = spectrum_D(e, 11, 64);
        CHECK(sp.doubling_shift < 1e-8);
        for (int i = 0; i <= 10; ++i) CHECK(sp.lambda[i] >= i * i + 1.0 - std::sqrt(1.0 + 4 * e * e));
        CHECK(sp.lambda[0] < 0.0);
        CHECK(sp.lambda[1] > 0.0);
        // Normalisation of the eigenfunctions.
        for (int i : {0, 3}) {
            const int n = 400;
            double s = 0.0;
            for (int k = 0; k < n; ++k) {
                const double f = sp.f(i, sp.y_period * k / n);
                s += f * f * sp.y_period / n;
            }
            CHECK(s == doctest::Approx(1.0).epsilon(1e-10));
        }
    }
    // Dense oracle at the doubled basis.
    const auto ab = solve_ab(0.1);
    const auto sp = spectrum_D(ab, 8, 64);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(galerkin_matrix(ab, 128));
    for (int i = 0; i < 8; ++i) CHECK(std::abs(es.eigenvalues()[i] - sp.lambda[i]) < 1e-8);
    CHECK_THROWS_AS(spectrum_D(ab, 8, 16), std::invalid_argument);
}

TEST_CASE("modal solves") {
    const double e = 0.1;
    const auto ab = solve_ab(e);
    const auto sp = spectrum_D(ab, 8, 32);
    const auto t = linspace(0.0, 5.0, 201);
    const std::vector<double> zero(t.size(), 0.0);
    for (int i = 2; i < 8; ++i) {
        const auto v = modal_solve(ab, sp, i, t, zero, {ModalBc::DirichletBoth});
        CHECK(max_abs(v) == 0.0);
    }
    // Manufactured solution for the Robin closure.
    std::vector<double> q(t.size()), g(t.size()), ex(t.size());
    const double k = 2.0;
    for (std::size_t n = 0; n < t.size(); ++n) {
        q[n] = -4.0;
        ex[n] = std::sin(t[n]) * std::exp(-k * t[n]);
    }
    // v'' - 4 v for v = sin t e^{-2t}: v'' = (3 sin t - 4 cos t) e^{-2t}
    for (std::size_t n = 0; n < t.size(); ++n)
        g[n] = (3 * std::sin(t[n]) - 4 * std::cos(t[n])) * std::exp(-k * t[n]) - 4 * ex[n];
    ModalBcSpec bc{ModalBc::DirichletRobin, 0.0, k};
    const auto v = solve_modal(t, q, g, bc);
    double err = 0.0;
    for (std::size_t n = 0; n < t.size(); ++n) err = std::max(err, std::abs(v[n] - ex[n]));
    CHECK(err < 1e-3);  // second order scheme, Robin data exact only asymptotically
    const auto Lv = apply_modal(t, q, v);
    for (std::size_t n = 1; n + 1 < t.size(); ++n) CHECK(std::abs(Lv[n] - g[n]) < 1e-9);
}

TEST_CASE("fundamental systems in the epsilon -> 0 limit") {
    const auto t = linspace(-2.0, 3.0, 101);
    // i = 1: span {1/cosh, t/cosh + sinh}
    {
        const auto fs = fundamental_system([](double s) { return 2.0 / (std::cosh(s) * std::cosh(s)) - 1.0; }, t);
        auto f = [](double s) { return 1.0 / std::cosh(s); };
        auto fp = [](double s) { return -std::tanh(s) / std::cosh(s); };
        auto g = [](double s) { return s / std::cosh(s) + std::sinh(s); };
        auto gp = [](double s) { return 1.0 / std::cosh(s) - s * std::tanh(s) / std::cosh(s) + std::cosh(s); };
        const double s0 = t[0];
        Eigen::Matrix2d A;
        A << f(s0), g(s0), fp(s0), gp(s0);
        for (int which = 0; which < 2; ++which) {
            const Eigen::Vector2d c = A.inverse() * (which == 0 ? Eigen::Vector2d(1, 0) : Eigen::Vector2d(0, 1));
            const auto& y = which == 0 ? fs.first : fs.second;
            for (std::size_t n = 0; n < t.size(); ++n) CHECK(std::abs(y[n] - c[0] * f(t[n]) - c[1] * g(t[n])) < 1e-6);
        }
    }
    // i = 0: span {tanh, t tanh - 1}
    {
        const auto fs = fundamental_system([](double s) { return 2.0 / (std::cosh(s) * std::cosh(s)); }, t);
        auto f = [](double s) { return std::tanh(s); };
        auto fp = [](double s) { return 1.0 / (std::cosh(s) * std::cosh(s)); };
        auto g = [](double s) { return s * std::tanh(s) - 1.0; };
        auto gp = [](double s) { return std::tanh(s) + s / (std::cosh(s) * std::cosh(s)); };
        const double s0 = t[0];
        Eigen::Matrix2d A;
        A << f(s0), g(s0), fp(s0), gp(s0);
        const Eigen::Vector2d c = A.inverse() * Eigen::Vector2d(1, 0);
        for (std::size_t n = 0; n < t.size(); ++n)
            CHECK(std::abs(fs.first[n] - c[0] * f(t[n]) - c[1] * g(t[n])) < 1e-6);
    }
}

TEST_CASE("right inverse is uniformly bounded") {
    std::vector<double> ratios;
    for (double e : {0.1, 0.05, 0.025}) {
        const auto ab = solve_ab(e);
        const double tt = -0.5 * std::log(e);
        for (double t0 : {tt, tt + 2.0}) {
            const auto t = linspace(t0, tt + 8.0, static_cast<int>(std::round((tt + 8.0 - t0) * 32)) + 1);
            ModalField g;
            g.t0 = t0;
            g.t_grid = t;
            g.weight = -1.5;
            g.tau = ab.tau;
            g.modes.assign(9, std::vector<double>(t.size(), 0.0));
            for (std::size_t i = 0; i < t.size(); ++i) g.modes[3][i] = std::exp(-1.5 * t[i]);
            const auto r = right_inverse(ab, t0, -1.5, g);
            CHECK(r.residual < 1e-8);
            CHECK(r.trace_complement < 1e-8);
            ratios.push_back(r.norm_ratio);
        }
    }
    const double hi = *std::max_element(ratios.begin(), ratios.end());
    const double lo = *std::min_element(ratios.begin(), ratios.end());
    CHECK(hi / lo <= 2.0);

    const auto ab = solve_ab(0.05);
    ModalField z;
    z.t0 = 1.0;
    z.t_grid = linspace(1.0, 9.0, 257);
    z.weight = -1.5;
    z.tau = ab.tau;
    z.modes.assign(5, std::vector<double>(257, 0.0));
    const auto r0 = right_inverse(ab, 1.0, -1.5, z);
    CHECK(r0.norm_ratio == 0.0);
    CHECK(weighted_norm(r0.v) == 0.0);
    CHECK_THROWS_AS(right_inverse(ab, 1.0, -2.5, z), std::invalid_argument);
}

TEST_CASE("Poisson extension") {
    const auto t = linspace(0.0, 6.0, 601);
    const auto w = poisson_extend({0, 0, 1.0}, t);
    for (std::size_t i = 0; i < t.size(); i += 50) CHECK(w.modes[2][i] == doctest::Approx(std::exp(-2 * t[i])));
    const auto w2 = poisson_extend({0, 0, 1.0, 0, 0, 0.5}, t);
    double best = 0.0, arg = -1.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double v = std::exp(2 * t[i]) * (w2.modes[2][i] + w2.modes[5][i]);
        if (v > best) {
            best = v;
            arg = t[i];
        }
    }
    CHECK(arg == 0.0);
    CHECK(weighted_norm(w2) == doctest::Approx(1.5).epsilon(1e-12));
    // Harmonicity of each mode: c'' - j^2 c = 0.
    for (int j = 2; j <= 5; ++j) {
        const auto L = apply_modal(t, std::vector<double>(t.size(), -double(j * j)), w2.modes[j]);
        // Leading truncation error of the three-point stencil: h^2 j^4 |c| / 12.
        const double h = t[1] - t[0];
        CHECK(max_abs(L) <= 1.01 * h * h * std::pow(j, 4) * max_abs(w2.modes[j]) / 12.0);
    }
    CHECK_THROWS_AS(poisson_extend({0.1, 0, 1.0}, t), std::invalid_argument);
    CHECK_THROWS_AS(poisson_extend({0, 0.1, 1.0}, t), std::invalid_argument);
}

TEST_CASE("catenoid Jacobi fields and the pairing") {
    for (auto k : {JacobiKind::Phi0Plus, JacobiKind::Phi0Minus, JacobiKind::Phi1Plus, JacobiKind::Phi1Minus})
        for (double s : {0.3, 1.0, 2.5}) CHECK(std::abs(jacobi_residual(jacobi_field(k), s, 0.4)) < 1e-5);
    const auto p0m = jacobi_field(JacobiKind::Phi0Minus);
    CHECK(p0m.value(0.0, 0.0) == 1.0);
    CHECK(p0m.ds(0.0, 0.0) == 0.0);
    const auto p1m = jacobi_field(JacobiKind::Phi1Minus);
    CHECK(std::log(std::abs(p1m.value(30.0, 0.0))) / 30.0 == doctest::Approx(1.0).epsilon(0.03));

    const auto p0p = jacobi_field(JacobiKind::Phi0Plus);
    const auto p1p = jacobi_field(JacobiKind::Phi1Plus);
    const double w0 = pairing_W(p0p, p0m, 0.5, 3.0);
    CHECK(std::abs(std::abs(w0) - 2 * kPi) < 1e-10);
    const double w1 = pairing_W(p1p, p1m, 0.5, 3.0);
    CHECK(std::abs(std::abs(w1) - 2 * kPi) < 1e-10);
    // Against the decaying field with unit coefficient of e^{-s} cos(theta).
    const double w1u = pairing_W(p1m, jacobi_field(JacobiKind::Phi1Plus, CatenoidEnd::Top, 0.5), 0.5, 3.0);
    CHECK(std::abs(std::abs(w1u) - kPi) < 1e-10);
    CHECK(std::abs(pairing_W(p0p, p0p, 0.5, 3.0)) < 1e-14);
    CHECK(std::abs(pairing_W(p0p, p0m, 1.0, 4.0) - pairing_W(p0p, p0m, 0.2, 2.0)) < 1e-8);
    // Bottom end carries opposite signs.
    CHECK(jacobi_field(JacobiKind::Phi0Plus, CatenoidEnd::Bottom).value(2.0, 0.0) == doctest::Approx(std::tanh(2.0)));
}

TEST_CASE("injectivity margin") {
    const auto ab = solve_ab(0.1);
    const auto sp = spectrum_D(ab, 9, 36);
    const auto rep = injectivity_margin(ab, sp, 0.0, 5.0, 2, 8);
    CHECK(rep.margin > 0.0);
    for (std::size_t k = 1; k < rep.per_mode.size(); ++k) CHECK(rep.per_mode[k] > rep.per_mode[k - 1]);
    // Potential bound: lambda_i - 2 b^2 >= i^2 - 2 sqrt(1 + 4 eps^2).
    for (std::size_t k = 0; k < rep.per_mode.size(); ++k) {
        const int i = 2 + static_cast<int>(k);
        CHECK(rep.per_mode[k] >= i * i - 2.0 * std::sqrt(1.04));
    }
    const auto rep0 = injectivity_margin(ab, sp, 0.0, 5.0, 0, 0);
    CHECK(rep0.per_mode.size() == 1);
    auto bad = sp;
    bad.epsilon = 0.9;
    CHECK_THROWS_AS(injectivity_margin(ab, bad, 0.0, 5.0), std::invalid_argument);
}
