#include "doctest.h"

#include "minsurf/graph_models.hpp"

#include <cmath>

using namespace minsurf;

namespace {

double interior_max(const Grid2& f, int skip) {
    double m = 0.0;
    for (int i = skip; i < f.n0 - skip; ++i)
        for (int k = 0; k < f.n1; ++k) m = std::max(m, std::abs(f(i, k)));
    return m;
}

// Least-squares coefficients of f against the given basis columns.
Eigen::VectorXd fit(const std::vector<std::vector<double>>& cols, const std::vector<double>& f) {
    Eigen::MatrixXd A(static_cast<int>(f.size()), static_cast<int>(cols.size()));
    Eigen::VectorXd b(static_cast<int>(f.size()));
    for (std::size_t r = 0; r < f.size(); ++r) {
        b[r] = f[r];
        for (std::size_t c = 0; c < cols.size(); ++c) A(r, c) = cols[c][r];
    }
    return A.colPivHouseholderQr().solve(b);
}

}  // namespace

TEST_CASE("planar end residual") {
    const auto flat = make_annulus_graph(0.1, 1.0, 65, 64, [](double, double) { return 0.0; });
    CHECK(max_abs(planar_residual(flat)) == 0.0);

    // Harmonic data: the residual is cubic in the amplitude.
    auto harmonic = [](double A) {
        return make_annulus_graph(0.2, 1.0, 129, 64, [A](double r, double th) { return A * r * r * std::cos(2 * th); });
    };
    const double r1 = max_abs(planar_residual(harmonic(0.05)));
    const double r2 = max_abs(planar_residual(harmonic(0.025)));
    const double r3 = max_abs(planar_residual(harmonic(0.0125)));
    CHECK(r1 / r2 == doctest::Approx(8.0).epsilon(0.05));
    CHECK(r2 / r3 == doctest::Approx(8.0).epsilon(0.05));

    // u = 0.01 |x|^2 against the closed form.
    const auto q = make_annulus_graph(0.5, 2.0, 129, 32, [](double r, double) { return 0.01 * r * r; });
    const auto res = planar_residual(q);
    for (int i : {10, 30, 64, 90, 120}) {
        const double r = q.r_grid[i];
        const double W = std::sqrt(1.0 + 4e-4 * std::pow(r, 6));
        const double exact = std::pow(r, 4) * (0.04 / W - 2.4e-5 * std::pow(r, 6) / std::pow(W, 3));
        CHECK(std::abs(res(i, 5) - exact) < 1e-8);
    }
    CHECK_THROWS_AS(make_annulus_graph(0.0, 1.0, 33, 32, [](double, double) { return 0.0; }), std::invalid_argument);
}

TEST_CASE("planar chart and graph mean curvature agree after inversion") {
    // u(x) on |x| in [0.2, 0.5]; U(z) = u(z/|z|^2) on |z| in [2, 5] with the same angle.
    auto u = [](double r, double th) { return 0.3 * r * r * std::cos(2 * th) + 0.2 * r * r * r * std::cos(3 * th); };
    const auto gx = make_annulus_graph(0.2, 0.5, 513, 64, u);
    const auto gz = make_annulus_graph(2.0, 5.0, 513, 64, [&](double rho, double th) { return u(1.0 / rho, th); });
    const auto res = planar_residual(gx);
    const auto H = graph_mean_curvature(gz);
    const double hx = gx.r_grid[1] - gx.r_grid[0];
    double worst = 0.0, scale = 0.0;
    for (int i = 20; i < 490; i += 47) {
        const double rho = gz.r_grid[i];
        std::vector<double> col(gx.r_grid.size());
        for (int k : {0, 7, 21}) {
            for (std::size_t j = 0; j < col.size(); ++j) col[j] = res(static_cast<int>(j), k);
            const double rx = lagrange_uniform(col, gx.r_grid[0], hx, 1.0 / rho, 8);
            worst = std::max(worst, std::abs(2.0 * H(i, k) - rx));
            scale = std::max(scale, std::abs(rx));
        }
    }
    CHECK(scale > 1e-3);
    CHECK(worst < 1e-6 * scale);
}

TEST_CASE("graph mean curvature") {
    const auto flat = make_annulus_graph(1.0, 3.0, 33, 32, [](double, double) { return 2.5; });
    CHECK(max_abs(graph_mean_curvature(flat)) == 0.0);

    // ln(2r) is not exactly the catenoid end: H = O(r^{-2}).
    const auto lg = make_annulus_graph(5.0, 40.0, 257, 16, [](double r, double) { return std::log(2 * r); });
    const auto H = graph_mean_curvature(lg);
    for (int i = 2; i < 255; ++i) CHECK(std::abs(H(i, 0)) <= 2.0 / (lg.r_grid[i] * lg.r_grid[i]));

    // The exact catenoid end arccosh(r) is minimal.
    const auto cat = make_annulus_graph(3.0, 10.0, 513, 16, [](double r, double) { return std::acosh(r); });
    CHECK(interior_max(graph_mean_curvature(cat), 2) < 1e-7);
}

TEST_CASE("catenoid normal graph expansion") {
    const auto s = linspace(-1.5, 1.5, 241);
    const int nt = 64;
    const auto th = periodic_grid(2 * kPi, nt);
    Grid2 zero(241, nt);
    const auto e0 = catenoid_graph_expansion(s, nt, zero);
    CHECK(max_abs(e0.full) < 1e-13);
    CHECK(max_abs(e0.remainder) < 1e-13);

    // Horizontal translation field.
    auto transl = [&](double d) {
        Grid2 w(241, nt);
        for (int i = 0; i < 241; ++i)
            for (int k = 0; k < nt; ++k) w(i, k) = d * std::cos(th[k]) / std::cosh(s[i]);
        return catenoid_graph_expansion(s, nt, w);
    };
    const auto e1 = transl(1e-2), e2 = transl(5e-3);
    CHECK(interior_max(e1.linear, 2) < 1e-2 * 1e-6);
    const double q1 = interior_max(e1.remainder, 2), q2 = interior_max(e2.remainder, 2);
    CHECK(q1 < 1e-2);
    CHECK(q1 / q2 == doctest::Approx(4.0).epsilon(0.05));

    // First fundamental form against the closed form cosh^2 - 2w + w^2/cosh^2 + w_s^2 for
    // a theta-independent w.
    Grid2 w(241, nt);
    for (int i = 0; i < 241; ++i)
        for (int k = 0; k < nt; ++k) w(i, k) = 0.1 * std::exp(-s[i] * s[i]);
    const auto ew = catenoid_graph_expansion(s, nt, w);
    for (int i : {40, 120, 200}) {
        const double ch = std::cosh(s[i]), W = w(i, 0), Ws = -2 * s[i] * W;
        CHECK(ew.E(i, 3) == doctest::Approx(ch * ch - 2 * W + W * W / (ch * ch) + Ws * Ws).epsilon(1e-8));
        CHECK(ew.G(i, 3) == doctest::Approx((ch + W / ch) * (ch + W / ch)).epsilon(1e-10));
    }

    Grid2 big(241, nt, 0.0);
    big(120, 0) = 2.0;
    CHECK_THROWS_AS(catenoid_graph_expansion(s, nt, big), std::invalid_argument);
}

TEST_CASE("remainder is quadratic and locally Lipschitz uniformly in the band") {
    const auto s = linspace(-1.0, 1.0, 161);
    const int nt = 64;
    const auto th = periodic_grid(2 * kPi, nt);
    auto remainder = [&](double d) {
        Grid2 w(161, nt);
        for (int i = 0; i < 161; ++i)
            for (int k = 0; k < nt; ++k)
                w(i, k) = d * std::cosh(s[i]) * (std::cos(2 * th[k]) + 0.5 * std::sin(s[i]) * std::cos(th[k]));
        return interior_max(catenoid_graph_expansion(s, nt, w).remainder, 2);
    };
    const double a = remainder(0.02), b = remainder(0.01), c = remainder(0.005);
    CHECK(a / (0.02 * 0.02) == doctest::Approx(b / (0.01 * 0.01)).epsilon(0.1));
    CHECK(b / (0.01 * 0.01) == doctest::Approx(c / (0.005 * 0.005)).epsilon(0.05));

    double lo = 1e300, hi = 0.0;
    for (double band : {0.0, 2.0, 4.0}) {
        auto v1 = [](double ss, double t) { return 0.05 * std::cos(2 * t) * std::exp(-0.1 * ss * ss); };
        auto v2 = [](double ss, double t) {
            return 0.05 * std::cos(2 * t) * std::exp(-0.1 * ss * ss) + 0.02 * std::sin(t + ss);
        };
        const double qv = lipschitz_probe(band, v1, v2);
        lo = std::min(lo, qv);
        hi = std::max(hi, qv);
    }
    MESSAGE("lipschitz quotient range " << lo << " .. " << hi);
    CHECK(hi < 20.0);
    CHECK(hi / lo < 5.0);
}

TEST_CASE("neck vertical graphs") {
    std::vector<double> dev_up;
    for (double e : {0.04, 0.02, 0.01}) {
        // A short stopping margin so that the slices reach r = 4 eps^{-1/2} on every ray.
        const auto prof = solve_profile(e, 0.2);
        const auto up = neck_graph(prof, 0.0, 0.0, 0.0, NeckSide::Up, 257);
        const auto dn = neck_graph(prof, 0.0, 0.0, 0.0, NeckSide::Down, 257);
        MESSAGE("eps " << e << " deviation/eps up " << up.sup_deviation / e << " down " << dn.sup_deviation / e
                       << " cb " << up.cb_deviation / e);
        CHECK(up.sup_deviation < 8.0 * e);
        CHECK(dn.sup_deviation < 8.0 * e);
        dev_up.push_back(up.sup_deviation / e);
        // Mean curvature of the graph. At eps = 0.04 the inner radius 1.25 sits next to the waist,
        // where the graph is steep and the uniform radial stencil is too coarse.
        if (e <= 0.02) CHECK(interior_max(graph_mean_curvature(up.graph), 2) < 1e-5);
    }
    CHECK(dev_up[2] / dev_up[1] == doctest::Approx(dev_up[1] / dev_up[0]).epsilon(0.25));
    CHECK(std::max({dev_up[0], dev_up[1], dev_up[2]}) / std::min({dev_up[0], dev_up[1], dev_up[2]}) < 1.5);

    // Dilation: the log coefficient is 1 + gamma.
    const auto prof = solve_profile(0.01);
    const auto g = neck_graph(prof, 0.1, 0.3, 0.2, NeckSide::Up);
    CHECK(g.sup_deviation < 8.0 * 0.01);
    // Basis: the closed form plus the leading O(eps) shapes 1/r^2, r^2 and r^2 cos 2 theta.
    std::vector<double> f, c0, c1, c2, c3, c4, c5, c6;
    for (int i = 0; i < g.graph.U.n0; ++i)
        for (int k = 0; k < g.graph.U.n1; ++k) {
            const double r = g.graph.r_grid[i], cth = std::cos(g.graph.theta_grid[k]);
            f.push_back(g.graph.U(i, k));
            c0.push_back(1.0);
            c1.push_back(std::log(2 * r));
            c2.push_back(r * cth);
            c3.push_back(cth / r);
            c4.push_back(1.0 / (r * r));
            c5.push_back(r * r);
            c6.push_back(r * r * std::cos(2 * g.graph.theta_grid[k]));
        }
    const auto coef = fit({c0, c1, c2, c3, c4, c5, c6}, f);
    MESSAGE("log coefficient " << coef[1]);
    CHECK(std::abs(coef[1] - 1.1) < 1e-3);

    // Chart derivatives against differences.
    const ProfileEval pe(prof);
    const auto p = neck_chart_root(pe, 10.0, 0.7, NeckSide::Down, 0.1, 0.2);
    const double h = 1e-5;
    const double tr = (neck_chart_root(pe, 10.0 + h, 0.7, NeckSide::Down, 0.1, 0.2).t -
                       neck_chart_root(pe, 10.0 - h, 0.7, NeckSide::Down, 0.1, 0.2).t) / (2 * h);
    const double tt = (neck_chart_root(pe, 10.0, 0.7 + h, NeckSide::Down, 0.1, 0.2).t -
                       neck_chart_root(pe, 10.0, 0.7 - h, NeckSide::Down, 0.1, 0.2).t) / (2 * h);
    CHECK(p.t < 0.0);
    CHECK(p.t_r == doctest::Approx(tr).epsilon(1e-6));
    CHECK(p.t_theta == doctest::Approx(tt).epsilon(1e-5));
    CHECK_THROWS_AS(neck_chart_root(pe, 1e4, 0.0, NeckSide::Up), std::invalid_argument);
}

TEST_CASE("tilted catenoid end graphs") {
    const auto up = chm_end_graph_model(0.0, 0.4, NeckSide::Up, 5.0, 50.0, 91, 16);
    for (int i = 0; i < up.graph.U.n0; ++i) {
        const double r = up.graph.r_grid[i];
        const double exact = std::log((1.0 + std::sqrt(1.0 - 1.0 / (r * r))) / 2.0);
        CHECK(std::abs(up.deviation(i, 3) - exact) < 1e-12);
        CHECK(std::abs(up.deviation(i, 3)) <= 1.0 / (4 * r * r) + 1.0 / (8 * std::pow(r, 4)));
    }
    const auto dn = chm_end_graph_model(0.0, 0.4, NeckSide::Down, 5.0, 50.0, 91, 16);
    for (int i = 0; i < 91; ++i)
        for (int k = 0; k < 16; ++k) CHECK(std::abs(dn.graph.U(i, k) + up.graph.U(i, (k + 8) % 16)) < 1e-12);

    const double xi = 0.01;
    for (NeckSide side : {NeckSide::Up, NeckSide::Down}) {
        const auto tl = chm_end_graph_model(xi, 0.0, side, 10.0, 30.0, 41, 32);
        std::vector<double> f, c0, c1, c2, c3;
        for (int i = 0; i < 41; ++i)
            for (int k = 0; k < 32; ++k) {
                const double r = tl.graph.r_grid[i], cth = std::cos(tl.graph.theta_grid[k]);
                f.push_back(tl.graph.U(i, k) - (side == NeckSide::Up ? 1.0 : -1.0) * std::log(2 * r));
                c0.push_back(1.0);
                c1.push_back(r * cth);
                c2.push_back(1.0 / (r * r));
                c3.push_back(cth / r);
            }
        const auto coef = fit({c0, c1, c2, c3}, f);
        CHECK(std::abs(coef[1] - xi) < 1e-4);
    }

    // Height derivatives against differences.
    const auto p = tilted_catenoid_root(0.02, 12.0, 1.1, NeckSide::Down);
    const double h = 1e-5;
    const double hr = (tilted_catenoid_root(0.02, 12.0 + h, 1.1, NeckSide::Down).height -
                       tilted_catenoid_root(0.02, 12.0 - h, 1.1, NeckSide::Down).height) / (2 * h);
    const double ht = (tilted_catenoid_root(0.02, 12.0, 1.1 + h, NeckSide::Down).height -
                       tilted_catenoid_root(0.02, 12.0, 1.1 - h, NeckSide::Down).height) / (2 * h);
    CHECK(p.height_r == doctest::Approx(hr).epsilon(1e-7));
    CHECK(p.height_theta == doctest::Approx(ht).epsilon(1e-6));
    CHECK_THROWS_AS(tilted_catenoid_root(0.0, 1.0, 0.0, NeckSide::Up), std::invalid_argument);
}

TEST_CASE("flux") {
    const auto pc = catenoid_patch(linspace(-2.0, 3.0, 501), 128);
    const Vec3 f1 = flux(pc, 100), f2 = flux(pc, 400);
    CHECK(std::abs(f1[0]) < 1e-12);
    CHECK(std::abs(f1[1]) < 1e-12);
    CHECK(std::abs(std::abs(f1[2]) - 2 * kPi) < 1e-8);
    CHECK((f1 - f2).norm() < 1e-8);

    // Plane z = 0 with an off-centre loop.
    std::vector<Vec3> pts, nrm;
    for (int k = 0; k <= 200; ++k) {
        const double a = 2 * kPi * (k % 200) / 200.0;
        pts.emplace_back(1.0 + 0.5 * std::cos(a), 2.0 + 0.3 * std::sin(a), 0.0);
        nrm.emplace_back(0.0, 0.0, 1.0);
    }
    CHECK(flux_loop(pts, nrm).norm() < 1e-14);
    pts.pop_back();
    nrm.pop_back();
    CHECK_THROWS_AS(flux_loop(pts, nrm), std::invalid_argument);

    // A polygonal loop on the catenoid waist agrees with the row flux.
    std::vector<Vec3> cp, cn;
    for (int k = 0; k <= 512; ++k) {
        const double a = 2 * kPi * (k % 512) / 512.0;
        cp.emplace_back(std::cos(a), std::sin(a), 0.0);
        cn.emplace_back(std::cos(a), std::sin(a), 0.0);
    }
    CHECK(std::abs(std::abs(flux_loop(cp, cn)[2]) - 2 * kPi) < 1e-3);
}

TEST_CASE("transverse field transfer") {
    const auto s = linspace(2.0, 4.0, 161);
    const int nt = 64;
    const auto pc = catenoid_patch(s, nt);
    Grid2 u(161, nt);
    for (int i = 0; i < 161; ++i)
        for (int k = 0; k < nt; ++k)
            u(i, k) = std::exp(-8 * (s[i] - 3) * (s[i] - 3)) * (1 + 0.5 * std::cos(pc.v_grid[k]));

    const auto same = transverse_transfer(pc, pc.N, u);
    CHECK(max_abs(same.residual) == 0.0);
    for (double g : same.factor.v) CHECK(g == doctest::Approx(1.0));

    VGrid2 e3(161, nt, Vec3(0, 0, 1));
    const auto vert = transverse_transfer(pc, e3, u);
    for (int i : {0, 80, 160}) CHECK(vert.factor(i, 5) == doctest::Approx(-std::tanh(s[i])).epsilon(1e-12));

    // Field tilted 5 degrees from the vertical.
    const double a = 5.0 * kPi / 180.0;
    VGrid2 tl(161, nt, Vec3(std::sin(a), 0, std::cos(a)));
    const auto r1 = transverse_transfer(pc, tl, u, 1e-2);
    const auto r2 = transverse_transfer(pc, tl, u, 5e-3);
    const auto r3 = transverse_transfer(pc, tl, u, 2.5e-3);
    MESSAGE("step residuals " << r1.sup_residual << " " << r2.sup_residual << " " << r3.sup_residual);
    CHECK(r1.sup_residual / r2.sup_residual == doctest::Approx(4.0).epsilon(0.15));
    CHECK(r2.sup_residual / r3.sup_residual == doctest::Approx(4.0).epsilon(0.15));

    const double d1 = transfer_defect(pc, tl, u, 4e-2), d2 = transfer_defect(pc, tl, u, 2e-2),
                 d3 = transfer_defect(pc, tl, u, 1e-2);
    MESSAGE("amplitude defects " << d1 << " " << d2 << " " << d3);
    CHECK(d1 / d2 == doctest::Approx(4.0).epsilon(0.15));
    CHECK(d2 / d3 == doctest::Approx(4.0).epsilon(0.15));

    VGrid2 flat(161, nt, Vec3(1, 0, 0));
    CHECK_THROWS_AS(transverse_transfer(pc, flat, u), std::invalid_argument);
}
