#include "minsurf/graph_models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace minsurf {

namespace {

// Spectral theta-derivative of every row of a periodic field.
Grid2 dtheta(const Grid2& f, int order = 1) {
    Grid2 out = f;
    std::vector<double> row(f.n1);
    for (int i = 0; i < f.n0; ++i) {
        for (int k = 0; k < f.n1; ++k) row[k] = f(i, k);
        for (int o = 0; o < order; ++o) row = spectral_derivative(row, 2.0 * kPi);
        for (int k = 0; k < f.n1; ++k) out(i, k) = row[k];
    }
    return out;
}

double step_of(const std::vector<double>& g) { return g[1] - g[0]; }

void check_grid(const AnnulusGraph& g) {
    if (g.r_grid.size() < 7 || g.theta_grid.size() < 8)
        throw std::invalid_argument("annulus graph grid too small");
    if (g.r_inner() <= 0.0) throw std::invalid_argument("annulus must avoid the origin");
    if (g.U.n0 != static_cast<int>(g.r_grid.size()) || g.U.n1 != static_cast<int>(g.theta_grid.size()))
        throw std::invalid_argument("annulus graph shape mismatch");
}

// Gradient (p, q) and Hessian in the orthonormal polar frame (e_r, e_theta).
struct PolarJet {
    Grid2 p, q, hrr, hrt, htt;
};

PolarJet polar_jet(const AnnulusGraph& g) {
    const double hr = step_of(g.r_grid);
    const Grid2 ur = diff0(g.U, hr, 1), urr = diff0(g.U, hr, 2);
    const Grid2 ut = dtheta(g.U), utt = dtheta(g.U, 2), urt = dtheta(ur);
    PolarJet j{ur, ut, urr, urt, utt};
    for (int i = 0; i < g.U.n0; ++i) {
        const double r = g.r_grid[i];
        for (int k = 0; k < g.U.n1; ++k) {
            j.q(i, k) = ut(i, k) / r;
            j.hrt(i, k) = urt(i, k) / r - ut(i, k) / (r * r);
            j.htt(i, k) = utt(i, k) / (r * r) + ur(i, k) / r;
        }
    }
    return j;
}

void zero_boundary_rows(Grid2& f, int skip) {
    for (int i = 0; i < f.n0; ++i) {
        if (i >= skip && i < f.n0 - skip) continue;
        for (int k = 0; k < f.n1; ++k) f(i, k) = 0.0;
    }
}

Vec3 catenoid_point(double s, double th) { return {std::cosh(s) * std::cos(th), std::cosh(s) * std::sin(th), s}; }

Vec3 catenoid_normal(double s, double th) {
    return Vec3(std::cos(th), std::sin(th), -std::sinh(s)) / std::cosh(s);
}

}  // namespace

AnnulusGraph make_annulus_graph(double r_in, double r_out, int n_r, int n_theta,
                                const std::function<double(double, double)>& u) {
    if (!(r_in > 0.0 && r_out > r_in)) throw std::invalid_argument("annulus radii must satisfy 0 < r_in < r_out");
    AnnulusGraph g;
    g.r_grid = linspace(r_in, r_out, n_r);
    g.theta_grid = periodic_grid(2.0 * kPi, n_theta);
    g.U = Grid2(n_r, n_theta);
    for (int i = 0; i < n_r; ++i)
        for (int k = 0; k < n_theta; ++k) g.U(i, k) = u(g.r_grid[i], g.theta_grid[k]);
    check_grid(g);
    return g;
}

double cb_norm(const AnnulusGraph& g, const Grid2& f, int order) {
    check_grid(g);
    const double hr = step_of(g.r_grid);
    const Grid2 fr = diff0(f, hr, 1);
    const Grid2 frr = diff0(f, hr, 2);
    const Grid2 ft = dtheta(f);
    const Grid2 ftt = dtheta(f, 2);
    const Grid2 frt = dtheta(fr);
    double m = 0.0;
    for (int i = 2; i < f.n0 - 2; ++i) {
        const double r = g.r_grid[i];
        for (int k = 0; k < f.n1; ++k) {
            m = std::max(m, std::abs(f(i, k)));
            if (order >= 1) m = std::max({m, std::abs(r * fr(i, k)), std::abs(ft(i, k))});
            if (order >= 2)
                m = std::max({m, std::abs(r * r * frr(i, k) + r * fr(i, k)), std::abs(r * frt(i, k)),
                              std::abs(ftt(i, k))});
        }
    }
    return m;
}

Grid2 planar_residual(const AnnulusGraph& g) {
    check_grid(g);
    const PolarJet j = polar_jet(g);
    Grid2 out(g.U.n0, g.U.n1);
    for (int i = 0; i < g.U.n0; ++i) {
        const double r = g.r_grid[i], r2 = r * r, r4 = r2 * r2;
        for (int k = 0; k < g.U.n1; ++k) {
            const double p = j.p(i, k), q = j.q(i, k);
            const double grad2 = p * p + q * q;
            const double W = std::sqrt(1.0 + r4 * grad2);
            const double hess_gg = p * p * j.hrr(i, k) + 2.0 * p * q * j.hrt(i, k) + q * q * j.htt(i, k);
            // div(grad u / W) = lap u / W - (2 r^2 |grad u|^2 (x . grad u) + r^4 u_i u_j u_ij) / W^3
            const double div = (j.hrr(i, k) + j.htt(i, k)) / W - (2.0 * r2 * grad2 * r * p + r4 * hess_gg) / (W * W * W);
            out(i, k) = r4 * div;
        }
    }
    zero_boundary_rows(out, 2);
    return out;
}

Grid2 graph_mean_curvature(const AnnulusGraph& g) {
    check_grid(g);
    const PolarJet j = polar_jet(g);
    Grid2 out(g.U.n0, g.U.n1);
    for (int i = 0; i < g.U.n0; ++i)
        for (int k = 0; k < g.U.n1; ++k) {
            const double p = j.p(i, k), q = j.q(i, k);
            const double W = std::sqrt(1.0 + p * p + q * q);
            out(i, k) = 0.5 * ((1.0 + q * q) * j.hrr(i, k) - 2.0 * p * q * j.hrt(i, k) + (1.0 + p * p) * j.htt(i, k)) /
                        (W * W * W);
        }
    zero_boundary_rows(out, 2);
    return out;
}

Grid2 oriented_mean_curvature(const std::vector<double>& u_grid, const std::vector<double>& v_grid, bool v_periodic,
                              const VGrid2& X, const VGrid2& ref) {
    const ImmersionPatch p = patch_from_samples(u_grid, v_grid, v_periodic, X);
    Grid2 H = p.meanH;
    for (int i = 0; i < X.n0; ++i)
        for (int k = 0; k < X.n1; ++k)
            if (p.N(i, k).dot(ref(i, k)) < 0.0) H(i, k) = -H(i, k);
    return H;
}

CatenoidExpansion catenoid_graph_expansion(const std::vector<double>& s_grid, int n_theta, const Grid2& w,
                                           double tubular_bound) {
    const int ns = static_cast<int>(s_grid.size());
    if (ns < 7 || n_theta < 8 || w.n0 != ns || w.n1 != n_theta)
        throw std::invalid_argument("catenoid expansion grid mismatch");
    CatenoidExpansion out;
    out.s_grid = s_grid;
    out.theta_grid = periodic_grid(2.0 * kPi, n_theta);
    const double hs = step_of(s_grid);
    const Grid2 ws = diff0(w, hs, 1);
    const Grid2 wss = diff0(w, hs, 2);
    const Grid2 wt = dtheta(w);
    const Grid2 wtt = dtheta(w, 2);
    const Grid2 wst = dtheta(ws);
    out.full = Grid2(ns, n_theta);
    out.linear = Grid2(ns, n_theta);
    out.remainder = Grid2(ns, n_theta);
    out.E = Grid2(ns, n_theta);
    out.F = Grid2(ns, n_theta);
    out.G = Grid2(ns, n_theta);
    for (int i = 0; i < ns; ++i) {
        const double s = s_grid[i];
        const double ch = std::cosh(s), sh = std::sinh(s);
        for (int k = 0; k < n_theta; ++k) {
            const double th = out.theta_grid[k];
            const double c = std::cos(th), sn = std::sin(th);
            const double W = w(i, k);
            if (std::abs(W / ch) > tubular_bound)
                throw std::invalid_argument("normal graph leaves the tubular neighbourhood");
            const Vec3 Xs(sh * c, sh * sn, 1.0), Xt(-ch * sn, ch * c, 0.0);
            const Vec3 Xss(ch * c, ch * sn, 0.0), Xst(-sh * sn, sh * c, 0.0), Xtt(-ch * c, -ch * sn, 0.0);
            const Vec3 N = catenoid_normal(s, th);
            const Vec3 Ns(-sh * c / (ch * ch), -sh * sn / (ch * ch), -1.0 / (ch * ch));
            const Vec3 Nt(-sn / ch, c / ch, 0.0);
            const double q = (ch * ch - 2.0 * sh * sh) / (ch * ch * ch);
            const Vec3 Nss(-q * c, -q * sn, 2.0 * sh / (ch * ch * ch));
            const Vec3 Nst(sh * sn / (ch * ch), -sh * c / (ch * ch), 0.0);
            const Vec3 Ntt(-c / ch, -sn / ch, 0.0);
            const Vec3 Ys = Xs + ws(i, k) * N + W * Ns;
            const Vec3 Yt = Xt + wt(i, k) * N + W * Nt;
            const Vec3 Yss = Xss + wss(i, k) * N + 2.0 * ws(i, k) * Ns + W * Nss;
            const Vec3 Yst = Xst + wst(i, k) * N + ws(i, k) * Nt + wt(i, k) * Ns + W * Nst;
            const Vec3 Ytt = Xtt + wtt(i, k) * N + 2.0 * wt(i, k) * Nt + W * Ntt;
            Vec3 n = Ys.cross(Yt).normalized();
            if (n.dot(N) < 0.0) n = -n;
            const double E = Ys.dot(Ys), F = Ys.dot(Yt), G = Yt.dot(Yt);
            const double e = Yss.dot(n), f = Yst.dot(n), g = Ytt.dot(n);
            out.E(i, k) = E;
            out.F(i, k) = F;
            out.G(i, k) = G;
            out.full(i, k) = (e * G - 2.0 * f * F + g * E) / (E * G - F * F);
            out.linear(i, k) = (wss(i, k) + wtt(i, k) + 2.0 * W / (ch * ch)) / (ch * ch);
            out.remainder(i, k) = out.full(i, k) - out.linear(i, k);
        }
    }
    return out;
}

double lipschitz_probe(double s_band, const std::function<double(double, double)>& v1,
                       const std::function<double(double, double)>& v2, int n_s, int n_theta) {
    if (n_s < 9) throw std::invalid_argument("lipschitz_probe needs at least 9 nodes");
    const double margin = 0.25;
    const int pad = static_cast<int>(std::ceil(margin * (n_s - 1)));
    const double h = 1.0 / (n_s - 1);
    const std::vector<double> s = linspace(s_band - pad * h, s_band + 1.0 + pad * h, n_s + 2 * pad);
    const std::vector<double> th = periodic_grid(2.0 * kPi, n_theta);
    const int n = static_cast<int>(s.size());
    Grid2 a(n, n_theta), b(n, n_theta), wa(n, n_theta), wb(n, n_theta);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n_theta; ++k) {
            a(i, k) = v1(s[i], th[k]);
            b(i, k) = v2(s[i], th[k]);
            wa(i, k) = std::cosh(s[i]) * a(i, k);
            wb(i, k) = std::cosh(s[i]) * b(i, k);
        }
    const CatenoidExpansion ea = catenoid_graph_expansion(s, n_theta, wa);
    const CatenoidExpansion eb = catenoid_graph_expansion(s, n_theta, wb);
    Grid2 d(n, n_theta);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n_theta; ++k) d(i, k) = b(i, k) - a(i, k);
    auto c2 = [&](const Grid2& f) {
        const Grid2 fs = diff0(f, h, 1), fss = diff0(f, h, 2);
        const Grid2 ft = dtheta(f), ftt = dtheta(f, 2), fst = dtheta(fs);
        double m = 0.0;
        for (int i = pad; i < n - pad; ++i)
            for (int k = 0; k < n_theta; ++k)
                m = std::max({m, std::abs(f(i, k)), std::abs(fs(i, k)), std::abs(ft(i, k)), std::abs(fss(i, k)),
                              std::abs(fst(i, k)), std::abs(ftt(i, k))});
        return m;
    };
    double num = 0.0;
    for (int i = pad; i < n - pad; ++i) {
        const double ch2 = std::cosh(s[i]) * std::cosh(s[i]);
        for (int k = 0; k < n_theta; ++k)
            num = std::max(num, std::abs(ch2 * (eb.remainder(i, k) - ea.remainder(i, k))));
    }
    const double den = std::max(c2(a), c2(b)) * c2(d);
    if (den == 0.0) throw std::invalid_argument("lipschitz_probe needs distinct nonzero fields");
    return num / den;
}

NeckChartPoint neck_chart_root(const ProfileEval& prof, double r, double theta, NeckSide side, double gamma,
                               double varsigma) {
    const double sc = 1.0 + gamma;
    if (!(sc > 0.0)) throw std::invalid_argument("dilation factor must be positive");
    const double st = std::sin(theta), ct = std::cos(theta);
    const double sgn = side == NeckSide::Up ? 1.0 : -1.0;
    // d(t): distance from the origin along the ray to the slice circle at height t.
    auto slice = [&](double tt, double& C, double& rho) {
        C = varsigma + sc * prof.c(tt);
        rho = sc * prof.R(tt);
    };
    auto dist = [&](double tt) {
        double C, rho;
        slice(tt, C, rho);
        const double disc = rho * rho - C * C * st * st;
        if (disc <= 0.0) return -1.0;
        return C * ct + std::sqrt(disc);
    };
    // The slice radius along the ray is monotone only up to the turning point near R ~ 1/eps, so
    // the first crossing is bracketed by a forward scan.
    const double tmax = prof.t_max();
    if (!(dist(0.0) < r)) throw std::invalid_argument("radius inside the neck waist");
    const int n_scan = std::max(64, static_cast<int>(std::ceil(64.0 * tmax)));
    double lo = 0.0, hi = 0.0;
    bool found = false;
    for (int j = 1; j <= n_scan && !found; ++j) {
        hi = sgn * tmax * j / n_scan;
        if (dist(hi) >= r) found = true;
        else lo = hi;
    }
    if (!found) throw std::invalid_argument("radius outside the range covered by the neck chart");
    const double t = find_root([&](double tt) { return dist(tt) - r; }, std::min(lo, hi), std::max(lo, hi), 1e-14);
    double C, rho;
    slice(t, C, rho);
    const double sq = std::sqrt(rho * rho - C * C * st * st);
    const double Ct = sc * prof.epsilon() * prof.R(t) * prof.R(t);
    const double rhot = sc * prof.Rp(t);
    const double d_t = Ct * ct + (rho * rhot - C * Ct * st * st) / sq;
    const double d_th = -C * st - C * C * st * ct / sq;
    if (!(sgn * d_t > 0.0)) throw NumericalError("neck chart is not injective along the ray");
    NeckChartPoint p;
    p.t = t;
    p.psi = std::atan2(r * st, r * ct - C);
    p.t_r = 1.0 / d_t;
    p.t_theta = -d_th / d_t;
    return p;
}

NeckGraph neck_graph(const RiemannProfile& profile, double gamma, double sigma, double varsigma, NeckSide side,
                     int n_r, int n_theta, double r_in, double r_out) {
    const double eps = profile.epsilon;
    if (r_in < 0.0) r_in = 0.25 / std::sqrt(eps);
    if (r_out < 0.0) r_out = 4.0 / std::sqrt(eps);
    const ProfileEval prof(profile);
    const double sc = 1.0 + gamma;
    const double sgn = side == NeckSide::Up ? 1.0 : -1.0;
    NeckGraph out;
    out.graph = make_annulus_graph(r_in, r_out, n_r, n_theta, [&](double r, double th) {
        return sigma + sc * neck_chart_root(prof, r, th, side, gamma, varsigma).t;
    });
    out.deviation = Grid2(n_r, n_theta);
    for (int i = 0; i < n_r; ++i) {
        const double r = out.graph.r_grid[i];
        for (int k = 0; k < n_theta; ++k) {
            const double ct = std::cos(out.graph.theta_grid[k]);
            const double model = sgn * sc * std::log(2.0 * r / sc) - 0.5 * eps * r * ct - sgn * sc * (varsigma / r) * ct;
            out.deviation(i, k) = out.graph.U(i, k) - sigma - model;
        }
    }
    out.sup_deviation = max_abs(out.deviation);
    out.cb_deviation = cb_norm(out.graph, out.deviation, 2);
    return out;
}

EndChartPoint tilted_catenoid_root(double xi, double r, double theta, NeckSide side) {
    if (!(r > 1.1)) throw std::invalid_argument("end chart needs r > 1.1");
    if (std::abs(xi) > 0.25) throw std::invalid_argument("tilt angle too large for the end chart");
    const double sgn = side == NeckSide::Up ? 1.0 : -1.0;
    const double cx = std::cos(xi), sx = std::sin(xi);
    const double target0 = r * std::cos(theta), target1 = r * std::sin(theta);
    double s = sgn * std::acosh(r), ph = theta;
    Eigen::Matrix2d Jm;
    for (int it = 0; it < 60; ++it) {
        const double ch = std::cosh(s), sh = std::sinh(s), c = std::cos(ph), sn = std::sin(ph);
        const Eigen::Vector2d F(ch * c * cx - s * sx - target0, ch * sn - target1);
        Jm << sh * c * cx - sx, -ch * sn * cx, sh * sn, ch * c;
        const Eigen::Vector2d d = Jm.partialPivLu().solve(F);
        s -= d[0];
        ph -= d[1];
        if (d.norm() < 1e-15 * (1.0 + std::abs(s))) break;
        if (it == 59) throw NumericalError("tilted catenoid inversion did not converge");
    }
    if (sgn * s <= 0.0) throw NumericalError("tilted catenoid inversion landed on the wrong end");
    const double ch = std::cosh(s), sh = std::sinh(s), c = std::cos(ph), sn = std::sin(ph);
    Jm << sh * c * cx - sx, -ch * sn * cx, sh * sn, ch * c;
    if (std::abs(Jm.determinant()) < 1e-12) throw NumericalError("tilted end is not a graph here");
    const Eigen::Vector2d zgrad(sh * c * sx + cx, -ch * sn * sx);
    const Eigen::Matrix2d Jinv = Jm.inverse();
    const Eigen::Vector2d hr(std::cos(theta), std::sin(theta));
    const Eigen::Vector2d hth(-r * std::sin(theta), r * std::cos(theta));
    EndChartPoint p;
    p.s = s;
    p.theta_c = ph;
    p.height = ch * c * sx + s * cx;
    p.height_r = zgrad.dot(Jinv * hr);
    p.height_theta = zgrad.dot(Jinv * hth);
    return p;
}

EndGraph chm_end_graph_model(double xi, double sigma, NeckSide side, double r_in, double r_out, int n_r,
                             int n_theta) {
    const double sgn = side == NeckSide::Up ? 1.0 : -1.0;
    EndGraph out;
    out.graph = make_annulus_graph(r_in, r_out, n_r, n_theta, [&](double r, double th) {
        return sgn * sigma + tilted_catenoid_root(xi, r, th, side).height;
    });
    out.deviation = Grid2(n_r, n_theta);
    for (int i = 0; i < n_r; ++i) {
        const double r = out.graph.r_grid[i];
        for (int k = 0; k < n_theta; ++k) {
            const double model = sgn * (sigma + std::log(2.0 * r)) + xi * r * std::cos(out.graph.theta_grid[k]);
            out.deviation(i, k) = out.graph.U(i, k) - model;
        }
    }
    out.sup_deviation = max_abs(out.deviation);
    return out;
}

Vec3 flux(const ImmersionPatch& patch, int row) {
    const int n0 = patch.X.n0, n1 = patch.X.n1;
    if (row < 0 || row >= n0) throw std::invalid_argument("flux row out of range");
    if (!patch.v_periodic) throw std::invalid_argument("flux needs a closed row loop");
    const double hu = step_of(patch.u_grid), hv = step_of(patch.v_grid);
    const VGrid2 Xu = diff0(patch.X, hu, 1);
    // Spectral derivative along the loop: the row integral is then exact up to aliasing.
    VGrid2 Xv(n0, n1);
    std::vector<double> comp(n1);
    for (int d = 0; d < 3; ++d) {
        for (int k = 0; k < n1; ++k) comp[k] = patch.X(row, k)[d];
        const auto dc = spectral_derivative(comp, hv * n1);
        for (int k = 0; k < n1; ++k) Xv(row, k)[d] = dc[k];
    }
    Vec3 total = Vec3::Zero();
    for (int k = 0; k < n1; ++k) {
        const Vec3& a = Xu(row, k);
        const Vec3& b = Xv(row, k);
        const Vec3 nu = (a - (a.dot(b) / b.squaredNorm()) * b).normalized();
        total += nu * b.norm() * hv;
    }
    return total;
}

Vec3 flux_loop(const std::vector<Vec3>& points, const std::vector<Vec3>& normals) {
    if (points.size() < 4 || points.size() != normals.size())
        throw std::invalid_argument("flux_loop needs matching point and normal lists");
    double scale = 0.0;
    for (const Vec3& p : points) scale = std::max(scale, p.norm());
    if ((points.front() - points.back()).norm() > 1e-12 * std::max(1.0, scale))
        throw std::invalid_argument("flux_loop needs a closed loop");
    Vec3 total = Vec3::Zero();
    for (std::size_t k = 0; k + 1 < points.size(); ++k) {
        const Vec3 t = points[k + 1] - points[k];
        const Vec3 n = (normals[k] + normals[k + 1]).normalized();
        total += t.cross(n);
    }
    return total;
}

TransferReport transverse_transfer(const ImmersionPatch& patch, const VGrid2& tilted, const Grid2& u, double step,
                                   int skip) {
    const int n0 = patch.X.n0, n1 = patch.X.n1;
    if (tilted.n0 != n0 || tilted.n1 != n1 || u.n0 != n0 || u.n1 != n1)
        throw std::invalid_argument("transverse_transfer shape mismatch");
    TransferReport rep;
    rep.factor = Grid2(n0, n1);
    rep.tangential = VGrid2(n0, n1);
    for (int i = 0; i < n0; ++i)
        for (int k = 0; k < n1; ++k) {
            const Vec3& N = patch.N(i, k);
            const double g = tilted(i, k).dot(N);
            if (std::abs(g) < 0.9) throw std::invalid_argument("field nearly tangent: |N~ . N| below 0.9");
            rep.factor(i, k) = g;
            rep.tangential(i, k) = tilted(i, k) - g * N;
        }
    auto displaced = [&](double h, bool along_tilted) {
        VGrid2 Y = patch.X;
        for (int i = 0; i < n0; ++i)
            for (int k = 0; k < n1; ++k)
                Y(i, k) += along_tilted ? Vec3(h * u(i, k) * tilted(i, k))
                                        : Vec3(h * rep.factor(i, k) * u(i, k) * patch.N(i, k));
        return oriented_mean_curvature(patch.u_grid, patch.v_grid, patch.v_periodic, Y, patch.N);
    };
    const Grid2 tp = displaced(step, true), tm = displaced(-step, true);
    const Grid2 np = displaced(step, false), nm = displaced(-step, false);
    rep.residual = Grid2(n0, n1);
    for (int i = skip; i < n0 - skip; ++i)
        for (int k = 0; k < n1; ++k) {
            const double dt = (tp(i, k) - tm(i, k)) / (2.0 * step);
            const double dn = (np(i, k) - nm(i, k)) / (2.0 * step);
            rep.residual(i, k) = dt - dn;
        }
    rep.sup_residual = max_abs(rep.residual);
    return rep;
}

double transfer_defect(const ImmersionPatch& patch, const VGrid2& tilted, const Grid2& u, double amplitude,
                       int skip) {
    const int n0 = patch.X.n0, n1 = patch.X.n1;
    if (tilted.n0 != n0 || tilted.n1 != n1 || u.n0 != n0 || u.n1 != n1)
        throw std::invalid_argument("transfer_defect shape mismatch");
    VGrid2 Yt = patch.X, Yn = patch.X;
    for (int i = 0; i < n0; ++i)
        for (int k = 0; k < n1; ++k) {
            const double g = tilted(i, k).dot(patch.N(i, k));
            if (std::abs(g) < 0.9) throw std::invalid_argument("field nearly tangent: |N~ . N| below 0.9");
            Yt(i, k) += amplitude * u(i, k) * tilted(i, k);
            Yn(i, k) += amplitude * g * u(i, k) * patch.N(i, k);
        }
    const Grid2 Ht = oriented_mean_curvature(patch.u_grid, patch.v_grid, patch.v_periodic, Yt, patch.N);
    const Grid2 Hn = oriented_mean_curvature(patch.u_grid, patch.v_grid, patch.v_periodic, Yn, patch.N);
    double m = 0.0;
    for (int i = skip; i < n0 - skip; ++i)
        for (int k = 0; k < n1; ++k) m = std::max(m, std::abs(Ht(i, k) - Hn(i, k)));
    return m;
}

ImmersionPatch catenoid_patch(const std::vector<double>& s_grid, int n_theta) {
    const std::vector<double> th = periodic_grid(2.0 * kPi, n_theta);
    const int ns = static_cast<int>(s_grid.size());
    VGrid2 X(ns, n_theta), N(ns, n_theta);
    for (int i = 0; i < ns; ++i)
        for (int k = 0; k < n_theta; ++k) {
            X(i, k) = catenoid_point(s_grid[i], th[k]);
            N(i, k) = catenoid_normal(s_grid[i], th[k]);
        }
    return patch_from_samples(s_grid, th, true, X, &N);
}

}  // namespace minsurf
