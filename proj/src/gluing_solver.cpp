#include "minsurf/gluing_solver.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>
#include <stdexcept>

namespace minsurf {

namespace {

// Neck: log-polar graph chart for t <= t~ + kBlendIn, conformal frame past t~ + kBlendOut.
constexpr double kBlendIn = 0.2;
constexpr double kBlendOut = 1.2;
constexpr int kGeoPad = 4;  // geometry rows kept past the cut so the stencils stay centred

std::vector<double> row_of(const Modes& m, int i) {
    std::vector<double> c(m.size());
    for (std::size_t j = 0; j < m.size(); ++j) c[j] = m[j][i];
    return c;
}

Modes zero_modes(int J, std::size_t n) { return Modes(J + 1, std::vector<double>(n, 0.0)); }

Modes add(const Modes& a, const Modes& b) {
    Modes c = a;
    for (std::size_t j = 0; j < c.size(); ++j)
        for (std::size_t i = 0; i < c[j].size(); ++i) c[j][i] += b[j][i];
    return c;
}

Modes sub(const Modes& a, const Modes& b) {
    Modes c = a;
    for (std::size_t j = 0; j < c.size(); ++j)
        for (std::size_t i = 0; i < c[j].size(); ++i) c[j][i] -= b[j][i];
    return c;
}

void check_phi(const std::vector<double>& phi, int J, const char* what) {
    if (static_cast<int>(phi.size()) != J + 1) throw std::invalid_argument(std::string(what) + ": expected J + 1 coefficients");
    if (phi[0] != 0.0 || phi[1] != 0.0)
        throw std::invalid_argument(std::string(what) + ": boundary data must be orthogonal to 1 and cos");
}

// Surface B + u N~ on rows [0, n_rows) with u given by cosine modes.
VGrid2 displaced(const VGrid2& base, const VGrid2& field, const Modes& u, int n_rows) {
    const int n1 = base.n1;
    VGrid2 P(n_rows, n1);
    for (int i = 0; i < n_rows; ++i) {
        const auto f = cosine_synthesis(row_of(u, i), n1);
        for (int k = 0; k < n1; ++k) P(i, k) = base(i, k) + f[k] * field(i, k);
    }
    return P;
}

// First and second derivatives of a sampled surface on a uniform grid, periodic in the second
// index. The stencils are linear, so the jet of B + d is the sum of the jets.
struct SurfaceJet {
    VGrid2 Xu, Xv, Xuu, Xuv, Xvv;
};

SurfaceJet surface_jet(const std::vector<double>& u_grid, const std::vector<double>& v_grid, const VGrid2& X) {
    const double hu = u_grid[1] - u_grid[0], hv = v_grid[1] - v_grid[0];
    SurfaceJet j;
    j.Xu = diff0(X, hu, 1);
    j.Xv = diff1(X, hv, 1, true);
    j.Xuu = diff0(X, hu, 2);
    j.Xvv = diff1(X, hv, 2, true);
    j.Xuv = diff1(j.Xu, hv, 1, true);
    return j;
}

// conformal * H of the surface with jet base + disp, normal oriented along `ref`. Keeping the
// small displacement jet separate avoids rounding it against the large base coordinates.
Grid2 jet_scaled_H(const SurfaceJet& base, const SurfaceJet* disp, const VGrid2& ref, const Grid2& conformal,
                   int n_rows) {
    const int n1 = base.Xu.n1;
    Grid2 M(n_rows, n1);
    for (int i = 0; i < n_rows; ++i)
        for (int k = 0; k < n1; ++k) {
            Vec3 a = base.Xu(i, k), b = base.Xv(i, k), uu = base.Xuu(i, k), uv = base.Xuv(i, k), vv = base.Xvv(i, k);
            if (disp) {
                a += disp->Xu(i, k);
                b += disp->Xv(i, k);
                uu += disp->Xuu(i, k);
                uv += disp->Xuv(i, k);
                vv += disp->Xvv(i, k);
            }
            Vec3 n = a.cross(b).normalized();
            if (n.dot(ref(i, k)) < 0.0) n = -n;
            const double E = a.dot(a), F = a.dot(b), G = b.dot(b);
            const double H = (uu.dot(n) * G - 2.0 * uv.dot(n) * F + vv.dot(n) * E) / (2.0 * (E * G - F * F));
            M(i, k) = conformal(i, k) * H;
        }
    return M;
}

// Displacement u N~ on rows [0, n_rows).
VGrid2 displacement(const VGrid2& field, const Modes& u, int n_rows) {
    const int n1 = field.n1;
    VGrid2 D(n_rows, n1);
    for (int i = 0; i < n_rows; ++i) {
        const auto f = cosine_synthesis(row_of(u, i), n1);
        for (int k = 0; k < n1; ++k) D(i, k) = f[k] * field(i, k);
    }
    return D;
}

// 2 sqrt(EG - F^2) of the base parametrisation: 2 cosh^2 omega where the base is conformal.
Grid2 area_factor(const std::vector<double>& u_grid, const std::vector<double>& v_grid, const VGrid2& base) {
    const ImmersionPatch p = patch_from_samples(u_grid, v_grid, true, base);
    Grid2 a(base.n0, base.n1);
    for (std::size_t q = 0; q < a.v.size(); ++q) a.v[q] = 2.0 * std::sqrt(p.E.v[q] * p.G.v[q] - p.F.v[q] * p.F.v[q]);
    return a;
}

// P_J of (M - M0) on rows [first, last].
Modes project_rows(const Grid2& M, const Grid2& M0, int J, std::size_t n, int first, int last) {
    Modes out = zero_modes(J, n);
    std::vector<double> f(M.n1);
    for (int i = first; i <= last; ++i) {
        for (int k = 0; k < M.n1; ++k) f[k] = M(i, k) - M0(i, k);
        const auto c = cosine_coefficients(f, J);
        for (int j = 0; j <= J; ++j) out[j][i] = c[j];
    }
    return out;
}

double body_norm(const Modes& m, const std::vector<double>& s, double delta, int n_theta) {
    double best = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto f = cosine_synthesis(row_of(m, static_cast<int>(i)), n_theta);
        best = std::max(best, std::pow(std::cosh(s[i]), -delta) * max_abs(f));
    }
    return best;
}

Modes cut_rows(Modes m, int first_zero) {
    for (auto& c : m)
        for (std::size_t i = static_cast<std::size_t>(std::max(first_zero, 0)); i < c.size(); ++i) c[i] = 0.0;
    return m;
}

struct ModeEval {
    std::vector<double> c, dc;
};

ModeEval eval_modes(const Modes& m, double x0, double h, double x) {
    ModeEval e;
    e.c.resize(m.size());
    e.dc.resize(m.size());
    for (std::size_t j = 0; j < m.size(); ++j) {
        e.c[j] = lagrange_uniform(m[j], x0, h, x);
        e.dc[j] = lagrange_uniform_deriv(m[j], x0, h, x);
    }
    return e;
}

Eigen::Matrix3d tilt_matrix(double xi) {
    const double c = std::cos(xi), s = std::sin(xi);
    Eigen::Matrix3d R;
    R << c, 0.0, -s, 0.0, 1.0, 0.0, s, 0.0, c;
    return R;
}

Vec3 half_turn(const Vec3& p) { return {-p[0], p[1], -p[2]}; }


}  // namespace

GluingParams GluingParams::zero(int J) {
    GluingParams p;
    p.phi_t.assign(J + 1, 0.0);
    p.phi_b.assign(J + 1, 0.0);
    p.phi_t_tilde.assign(J + 1, 0.0);
    p.phi_b_tilde.assign(J + 1, 0.0);
    return p;
}

Eigen::VectorXd GluingParams::scaled_vector(double eps) const {
    const double se = std::sqrt(eps), le = std::abs(std::log(eps));
    Eigen::VectorXd x(8);
    x << gamma_t, gamma_b, sigma_t / le, sigma_b / le, se * varsigma_t, se * varsigma_b, eta_t / se, eta_b / se;
    return x;
}

void GluingParams::set_scaled_vector(double eps, const Eigen::VectorXd& x) {
    if (x.size() != 8) throw std::invalid_argument("GluingParams: scaled vector has 8 entries");
    const double se = std::sqrt(eps), le = std::abs(std::log(eps));
    gamma_t = x[0];
    gamma_b = x[1];
    sigma_t = x[2] * le;
    sigma_b = x[3] * le;
    varsigma_t = x[4] / se;
    varsigma_b = x[5] / se;
    eta_t = x[6] * se;
    eta_b = x[7] * se;
}

double GluingParams::scaled_norm(double eps) const {
    double s = scaled_vector(eps).cwiseAbs().sum();
    for (const auto* f : {&phi_t, &phi_b, &phi_t_tilde, &phi_b_tilde})
        if (!f->empty()) s += max_abs(cosine_synthesis(*f, 4 * static_cast<int>(f->size())));
    return s;
}

// ---------------------------------------------------------------------------------------------
// Neck half

std::shared_ptr<NeckContext> make_neck_context(double epsilon, double eta, const GluingConfig& cfg) {
    const double eps_n = epsilon + eta;
    if (!(epsilon > 0.0 && epsilon <= 0.05)) throw std::invalid_argument("neck: epsilon must lie in (0, 0.05]");
    if (!(eps_n > 0.0 && std::abs(eta) <= 0.5 * epsilon)) throw std::invalid_argument("neck: flux offset too large");
    auto c = std::make_shared<NeckContext>();
    c->epsilon = epsilon;
    c->epsilon_neck = eps_n;
    const double dt = cfg.dt;
    const double tt = -0.5 * std::log(epsilon);
    c->t_tilde = tt;
    const double t0 = dt * std::floor((tt - 0.25) / dt);
    const int n = static_cast<int>(std::lround((tt + cfg.neck_length - t0) / dt)) + 1;
    c->t_grid.resize(n);
    for (int i = 0; i < n; ++i) c->t_grid[i] = t0 + dt * i;

    c->profile = solve_profile(eps_n, cfg.profile_margin, 1.0 / 512.0, cfg.tol);
    c->prof = ProfileEval(c->profile);
    const double t_eps = c->profile.t_blowup;
    c->t_cut = t_eps - 1.0;
    const int m = static_cast<int>(std::floor((t_eps - 0.75) / dt));
    if (m * dt > c->profile.t_max()) throw NumericalError("neck: profile does not cover the frame extent");
    c->i_cut = static_cast<int>(std::floor((c->t_cut - t0) / dt));
    c->n_geo = std::min(n, c->i_cut + kGeoPad + 1);
    const int off = m + static_cast<int>(std::lround(t0 / dt));
    if (off < 0 || off + c->n_geo > 2 * m + 1) throw NumericalError("neck: frame too short for the geometry rows");
    if (c->i_cut < 8) throw NumericalError("neck: no room between t~ and the cut");

    const ConformalFrame fr = conformal_frame(c->profile, 2 * m + 1, cfg.n_y, m * dt, cfg.tol);
    const ImmersionPatch patch = immerse(fr, nullptr, cfg.tol);
    const ABSolution ab = solve_ab(eps_n, 2048, 16.0, 1.0 / 256.0, cfg.tol);
    if (std::abs(ab.tau - fr.tau) > 1e-9) throw NumericalError("neck: frame and y-period disagree");
    c->tau = fr.tau;
    c->y_grid = fr.y_grid;
    c->op = std::make_shared<ModalOperator>(ModalOperator::neck(ab, cfg.J, c->t_grid));

    const int ny = cfg.n_y;
    c->base = VGrid2(c->n_geo, ny);
    c->field = VGrid2(c->n_geo, ny);
    const Vec3 e3(0.0, 0.0, 1.0);
    for (int i = 0; i < c->n_geo; ++i) {
        const double t = c->t_grid[i];
        const double chi = smoothstep(t, tt + kBlendIn, tt + kBlendOut);
        for (int k = 0; k < ny; ++k) {
            const Vec3& X = patch.X(off + i, k);
            const Vec3 N = -patch.N(off + i, k);
            if (chi < 1.0) {
                const double th = c->y_grid[k] / c->tau;
                const double g0 = 0.5 * std::exp(t) * std::cos(th), g1 = 0.5 * std::exp(t) * std::sin(th);
                const double h0 = (1.0 - chi) * g0 + chi * X[0], h1 = (1.0 - chi) * g1 + chi * X[1];
                const auto p = neck_chart_root(c->prof, std::hypot(h0, h1), std::atan2(h1, h0), NeckSide::Up);
                c->base(i, k) = Vec3(h0, h1, p.t);
                if (chi > 0.0 && N[2] < 0.5) throw NumericalError("neck: normal not upward in the blend band");
            } else {
                c->base(i, k) = X;
            }
            c->field(i, k) = ((1.0 - chi) * e3 + chi * N).normalized();
        }
    }
    std::vector<double> tg(c->t_grid.begin(), c->t_grid.begin() + c->n_geo);
    c->conformal = area_factor(tg, c->y_grid, c->base);
    c->baseline = jet_scaled_H(surface_jet(tg, c->y_grid, c->base), nullptr, c->field, c->conformal, c->n_geo);
    return c;
}

Modes NeckSolution::total() const { return add(w, v); }

TracePoint NeckSolution::trace(double r, double theta, double gamma, double sigma, double varsigma) const {
    if (side == NeckSide::Down) {
        NeckSolution up = *this;
        up.side = NeckSide::Up;
        const TracePoint p = up.trace(r, kPi - theta, gamma, sigma, -varsigma);
        return {-p.value, -p.r_dr};
    }
    const NeckContext& c = *ctx;
    const double sc = 1.0 + gamma;
    const double q0 = (r * std::cos(theta) - varsigma) / sc, q1 = r * std::sin(theta) / sc;
    const double rho = std::hypot(q0, q1), thp = std::atan2(q1, q0);
    const double tt = std::log(2.0 * rho);
    const double dt = c.t_grid[1] - c.t_grid[0];
    if (tt < c.t_grid.front() || tt > c.t_tilde + kBlendIn) throw std::invalid_argument("neck trace outside the graph band");
    const auto root = neck_chart_root(c.prof, rho, thp, NeckSide::Up);
    const ModeEval e = eval_modes(total(), c.t_grid.front(), dt, tt);
    double u = 0.0, ut = 0.0, uth = 0.0;
    for (std::size_t j = 0; j < e.c.size(); ++j) {
        const double cj = std::cos(j * thp), sj = std::sin(j * thp);
        u += e.c[j] * cj;
        ut += e.dc[j] * cj;
        uth -= double(j) * e.c[j] * sj;
    }
    const double F = root.t + u;
    const double Frho = root.t_r + ut / rho;
    const double Fth = root.t_theta + uth;
    TracePoint p;
    p.value = sc * F + sc * std::log(sc) + sigma;
    p.r_dr = r * (Frho * std::cos(theta - thp) + Fth / rho * std::sin(theta - thp));
    return p;
}

VGrid2 NeckSolution::points(int i_first, int i_last, double gamma, double sigma, double varsigma) const {
    const NeckContext& c = *ctx;
    if (i_first < 0 || i_last >= c.n_geo || i_first > i_last) throw std::invalid_argument("neck points: bad row range");
    const VGrid2 P = displaced(c.base, c.field, total(), c.n_geo);
    const double sc = 1.0 + gamma;
    const bool down = side == NeckSide::Down;
    const double vs = down ? -varsigma : varsigma;
    VGrid2 out(i_last - i_first + 1, P.n1);
    for (int i = i_first; i <= i_last; ++i)
        for (int k = 0; k < P.n1; ++k) {
            Vec3 x = sc * P(i, k);
            x[0] += vs;
            x[2] += sc * std::log(sc) + sigma;
            out(i - i_first, k) = down ? half_turn(x) : x;
        }
    return out;
}

NeckSolution GluingProblem::solve_neck(std::shared_ptr<const NeckContext> ctx, const std::vector<double>& phi,
                                       NeckSide side) const {
    const int J = cfg_.J;
    check_phi(phi, J, "solve_neck");
    const NeckContext& c = *ctx;
    const ModalOperator& op = *c.op;
    const std::size_t n = c.t_grid.size();
    NeckSolution sol;
    sol.ctx = ctx;
    sol.side = side;
    sol.phi = phi;
    // The half-turn about the x2-axis maps the lower half to an upper half with theta -> pi - theta.
    std::vector<double> ph = phi;
    if (side == NeckSide::Down)
        for (int j = 0; j <= J; ++j) ph[j] = -((j % 2) ? -1.0 : 1.0) * phi[j];
    sol.w = zero_modes(J, n);
    for (int j = 2; j <= J; ++j)
        for (std::size_t i = 0; i < n; ++i) sol.w[j][i] = ph[j] * std::exp(-j * (c.t_grid[i] - c.t_tilde));
    sol.v = zero_modes(J, n);
    std::vector<double> tg(c.t_grid.begin(), c.t_grid.begin() + c.n_geo);

    const SurfaceJet base_jet = surface_jet(tg, c.y_grid, c.base);
    auto residual = [&](const Modes& u) {
        const SurfaceJet dj = surface_jet(tg, c.y_grid, displacement(c.field, u, c.n_geo));
        const Grid2 M = jet_scaled_H(base_jet, &dj, c.field, c.conformal, c.n_geo);
        Modes R = project_rows(M, c.baseline, J, n, 1, c.i_cut);
        // Past the cut only the linear operator is kept.
        const Modes Lu = op.apply(u);
        for (int j = 0; j <= J; ++j)
            for (std::size_t i = c.i_cut + 1; i + 1 < n; ++i) R[j][i] = Lu[j][i];
        return R;
    };

    double prev = 0.0;
    for (int it = 0; it < cfg_.max_fixed_point; ++it) {
        const Modes R = residual(sol.total());
        const Modes rhs = sub(op.apply(sol.v), R);
        const Modes vn = op.solve(rhs);
        const double d = weighted_norm(sub(vn, sol.v), c.t_grid, cfg_.mu, cfg_.n_y);
        sol.v = vn;
        sol.report.iterations = it + 1;
        sol.report.update_norms.push_back(d);
        const double vnorm = weighted_norm(sol.v, c.t_grid, cfg_.mu, cfg_.n_y);
        if (it > 0 && prev > 1e3 * cfg_.fixed_point_tol * std::max(1.0, vnorm))  // skip ratios at the floor
            sol.report.contraction_estimate = std::max(sol.report.contraction_estimate, d / prev);
        const double floor_band = 1e3 * cfg_.fixed_point_tol * std::max(1.0, vnorm);
        const bool at_floor = it > 0 && d < floor_band && d > 0.5 * prev;  // round-off floor reached
        prev = d;
        if (d <= cfg_.fixed_point_tol * std::max(1.0, vnorm) || at_floor) break;
        if (it > 3 && d > 10.0 * sol.report.update_norms[1])
            throw NumericalError("solve_neck: fixed-point iteration diverges");
    }
    const Modes R = residual(sol.total());
    sol.report.residual_norm = weighted_norm(cut_rows(R, c.i_cut + 1), c.t_grid, cfg_.mu, cfg_.n_y);
    sol.report.correction_norm = weighted_norm(sol.v, c.t_grid, cfg_.mu, cfg_.n_y);
    if (sol.report.contraction_estimate >= 1.0) throw NumericalError("solve_neck: map is not a contraction");
    if (sol.report.update_norms.back() > cfg_.fixed_point_tol * std::max(1.0, sol.report.correction_norm) * 1e3)
        throw NumericalError("solve_neck: residual stagnation");
    return sol;
}

// ---------------------------------------------------------------------------------------------
// Body

std::shared_ptr<BodyContext> make_body_context(double epsilon, double xi, const GluingConfig& cfg) {
    if (!(epsilon > 0.0 && epsilon <= 0.05)) throw std::invalid_argument("body: epsilon must lie in (0, 0.05]");
    if (std::abs(xi) > epsilon) throw std::invalid_argument("body: tilt must satisfy |xi| <= eps");
    auto c = std::make_shared<BodyContext>();
    c->epsilon = epsilon;
    c->xi = xi;
    const double tt = -0.5 * std::log(epsilon);
    c->t_tilde = tt;
    const double ds = cfg.dt;
    const int half = static_cast<int>(std::ceil((tt + 2.0) / ds));
    c->s_grid.resize(2 * half + 1);
    for (int i = 0; i <= 2 * half; ++i) c->s_grid[i] = ds * (i - half);
    c->s_grid[half] = 0.0;
    c->theta_grid = periodic_grid(2.0 * kPi, cfg.n_y);
    c->op = std::make_shared<ModalOperator>(ModalOperator::body(cfg.J, c->s_grid));
    const Eigen::Matrix3d Rx = tilt_matrix(xi);
    const int ns = static_cast<int>(c->s_grid.size()), nt = cfg.n_y;
    c->base = VGrid2(ns, nt);
    c->field = VGrid2(ns, nt);
    const Vec3 e3(0.0, 0.0, 1.0);
    for (int i = 0; i < ns; ++i) {
        const double s = c->s_grid[i];
        const double ch = std::cosh(s), sh = std::sinh(s);
        const double chi = smoothstep(std::abs(s), tt - 0.8, tt - 0.4);
        const double sgn = s > 0.0 ? -1.0 : 1.0;  // sign of N_c . e3 on each end
        const NeckSide sd = s > 0.0 ? NeckSide::Up : NeckSide::Down;
        for (int k = 0; k < nt; ++k) {
            const double th = c->theta_grid[k];
            const Vec3 X = Rx * Vec3(ch * std::cos(th), ch * std::sin(th), s);
            const Vec3 N = Rx * (Vec3(std::cos(th), std::sin(th), -sh) / ch);
            if (chi > 0.0) {
                const double g = ch;
                const double h0 = (1.0 - chi) * X[0] + chi * g * std::cos(th);
                const double h1 = (1.0 - chi) * X[1] + chi * g * std::sin(th);
                const auto p = tilted_catenoid_root(xi, std::hypot(h0, h1), std::atan2(h1, h0), sd);
                c->base(i, k) = Vec3(h0, h1, p.height);
            } else {
                c->base(i, k) = X;
            }
            c->field(i, k) = ((1.0 - chi) * N + chi * sgn * e3).normalized();
        }
    }
    c->conformal = area_factor(c->s_grid, c->theta_grid, c->base);
    c->baseline = jet_scaled_H(surface_jet(c->s_grid, c->theta_grid, c->base), nullptr, c->field, c->conformal, ns);
    return c;
}

Modes BodySolution::total() const { return add(w, v); }

TracePoint BodySolution::trace(double r, double theta, NeckSide side) const {
    const BodyContext& c = *ctx;
    if (!(r > 1.0)) throw std::invalid_argument("body trace inside the waist");
    const double s = (side == NeckSide::Up ? 1.0 : -1.0) * std::acosh(r);
    if (std::abs(s) < c.t_tilde - 0.4 || std::abs(s) > c.s_grid.back())
        throw std::invalid_argument("body trace outside the graph band");
    const double sgn = side == NeckSide::Up ? -1.0 : 1.0;
    const auto root = tilted_catenoid_root(c.xi, r, theta, side);
    const ModeEval e = eval_modes(total(), c.s_grid.front(), c.s_grid[1] - c.s_grid[0], s);
    double u = 0.0, us = 0.0;
    for (std::size_t j = 0; j < e.c.size(); ++j) {
        const double cj = std::cos(j * theta);
        u += e.c[j] * cj;
        us += e.dc[j] * cj;
    }
    TracePoint p;
    p.value = root.height + sgn * u;
    p.r_dr = r * root.height_r + (side == NeckSide::Up ? sgn : -sgn) * us * r / std::sqrt(r * r - 1.0);
    return p;
}

VGrid2 BodySolution::points(int i_first, int i_last) const {
    const BodyContext& c = *ctx;
    const int ns = static_cast<int>(c.s_grid.size());
    if (i_first < 0 || i_last >= ns || i_first > i_last) throw std::invalid_argument("body points: bad row range");
    const VGrid2 P = displaced(c.base, c.field, total(), ns);
    VGrid2 out(i_last - i_first + 1, P.n1);
    for (int i = i_first; i <= i_last; ++i)
        for (int k = 0; k < P.n1; ++k) out(i - i_first, k) = P(i, k);
    return out;
}

BodySolution GluingProblem::solve_body(double xi, const std::vector<double>& phi_t, const std::vector<double>& phi_b) {
    const int J = cfg_.J;
    check_phi(phi_t, J, "solve_body");
    check_phi(phi_b, J, "solve_body");
    const auto ctx = body_context(xi);
    const BodyContext& c = *ctx;
    const ModalOperator& op = *c.op;
    const std::size_t n = c.s_grid.size();
    const double tt = c.t_tilde;
    BodySolution sol;
    sol.ctx = ctx;
    sol.phi_top = phi_t;
    sol.phi_bottom = phi_b;
    sol.w = zero_modes(J, n);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = c.s_grid[i];
        const double chi_t = smoothstep(s, 0.0, 1.0), chi_b = smoothstep(-s, 0.0, 1.0);
        for (int j = 2; j <= J; ++j)
            sol.w[j][i] = -chi_t * phi_t[j] * std::exp(-j * (tt - s)) + chi_b * phi_b[j] * std::exp(-j * (tt + s));
    }
    sol.v = zero_modes(J, n);

    // Extension operator: data kept on |s| <= t~, linear decay to zero on t~ <= |s| <= t~ + 1.
    const double ds = c.s_grid[1] - c.s_grid[0];
    auto extend = [&](Modes f) {
        for (auto& fj : f) {
            const double fr = lagrange_uniform(fj, c.s_grid.front(), ds, tt, 2);
            const double fl = lagrange_uniform(fj, c.s_grid.front(), ds, -tt, 2);
            for (std::size_t i = 0; i < n; ++i) {
                const double a = std::abs(c.s_grid[i]);
                if (a <= tt) continue;
                const double lam = a <= tt + 1.0 ? 1.0 + tt - a : 0.0;
                fj[i] = lam * (c.s_grid[i] > 0 ? fr : fl);
            }
        }
        return f;
    };
    const SurfaceJet base_jet = surface_jet(c.s_grid, c.theta_grid, c.base);
    auto projected = [&](const Modes& u) {
        const SurfaceJet dj = surface_jet(c.s_grid, c.theta_grid, displacement(c.field, u, static_cast<int>(n)));
        const Grid2 M = jet_scaled_H(base_jet, &dj, c.field, c.conformal, static_cast<int>(n));
        return project_rows(M, c.baseline, J, n, 1, static_cast<int>(n) - 2);
    };

    double prev = 0.0;
    for (int it = 0; it < cfg_.max_fixed_point; ++it) {
        const Modes R = projected(sol.total());
        const Modes vn = op.solve(extend(sub(op.apply(sol.v), R)));
        const double d = body_norm(sub(vn, sol.v), c.s_grid, cfg_.delta, cfg_.n_y);
        sol.v = vn;
        sol.report.iterations = it + 1;
        sol.report.update_norms.push_back(d);
        const double vnorm = body_norm(sol.v, c.s_grid, cfg_.delta, cfg_.n_y);
        if (it > 0 && prev > 1e3 * cfg_.fixed_point_tol * std::max(1.0, vnorm))
            sol.report.contraction_estimate = std::max(sol.report.contraction_estimate, d / prev);
        const double floor_band = 1e3 * cfg_.fixed_point_tol * std::max(1.0, vnorm);
        const bool at_floor = it > 0 && d < floor_band && d > 0.5 * prev;  // round-off floor reached
        prev = d;
        if (d <= cfg_.fixed_point_tol * std::max(1.0, vnorm) || at_floor) break;
        if (it > 3 && d > 10.0 * sol.report.update_norms[1])
            throw NumericalError("solve_body: fixed-point iteration diverges");
    }
    Modes R = projected(sol.total());
    for (auto& rj : R)
        for (std::size_t i = 0; i < n; ++i)
            if (std::abs(c.s_grid[i]) > tt) rj[i] = 0.0;
    sol.report.residual_norm = body_norm(R, c.s_grid, cfg_.delta, cfg_.n_y);
    sol.report.correction_norm = body_norm(sol.v, c.s_grid, cfg_.delta, cfg_.n_y);
    if (sol.report.contraction_estimate >= 1.0) throw NumericalError("solve_body: map is not a contraction");
    if (sol.report.update_norms.back() > cfg_.fixed_point_tol * std::max(1.0, sol.report.correction_norm) * 1e3)
        throw NumericalError("solve_body: residual stagnation");
    return sol;
}

// ---------------------------------------------------------------------------------------------
// Problem, caches

GluingProblem::GluingProblem(double epsilon, GluingConfig cfg) : eps_(epsilon), cfg_(std::move(cfg)) {
    if (!(epsilon > 0.0 && epsilon <= 0.05)) throw std::invalid_argument("gluing: epsilon must lie in (0, 0.05]");
    if (cfg_.J < 4) throw std::invalid_argument("gluing: Fourier truncation J must be at least 4");
    if (!(cfg_.mu > -2.0 && cfg_.mu < -1.0)) throw std::invalid_argument("gluing: mu must lie in (-2, -1)");
    if (!(cfg_.delta > 1.0 && cfg_.delta < 2.0)) throw std::invalid_argument("gluing: delta must lie in (1, 2)");
    t_tilde_ = -0.5 * std::log(epsilon);
}

std::shared_ptr<const NeckContext> GluingProblem::neck_context(double eta) {
    {
        std::lock_guard<std::mutex> lk(mu_);
        auto it = necks_.find(eta);
        if (it != necks_.end()) return it->second;
    }
    auto c = make_neck_context(eps_, eta, cfg_);
    std::lock_guard<std::mutex> lk(mu_);
    if (necks_.size() >= 24) necks_.clear();
    return necks_.emplace(eta, std::move(c)).first->second;
}

std::shared_ptr<const BodyContext> GluingProblem::body_context(double xi) {
    {
        std::lock_guard<std::mutex> lk(mu_);
        auto it = bodies_.find(xi);
        if (it != bodies_.end()) return it->second;
    }
    auto c = make_body_context(eps_, xi, cfg_);
    std::lock_guard<std::mutex> lk(mu_);
    if (bodies_.size() >= 8) bodies_.clear();
    return bodies_.emplace(xi, std::move(c)).first->second;
}

NeckSolution GluingProblem::solve_neck(double eta, const std::vector<double>& phi, NeckSide side) {
    return solve_neck(neck_context(eta), phi, side);
}

// ---------------------------------------------------------------------------------------------
// Matching

Eigen::VectorXd MatchingResidual::low_modes() const {
    Eigen::VectorXd r(8);
    r << m0_top[0], m0_top[1], m1_top[0], m1_top[1], m0_bottom[0], m0_bottom[1], m1_bottom[0], m1_bottom[1];
    return r;
}

double MatchingResidual::sup_mismatch() const {
    return std::max({max_abs(c0_top), max_abs(c0_bottom), max_abs(c1_top), max_abs(c1_bottom)});
}

double MatchingResidual::high_mode_norm() const {
    double h = 0.0;
    for (const auto* m : {&m0_top, &m0_bottom, &m1_top, &m1_bottom})
        for (std::size_t j = 2; j < m->size(); ++j) h = std::max(h, std::abs((*m)[j]));
    return h;
}

MatchingResidual matching_from_traces(int n, int J, const CircleTrace& neck_top, const CircleTrace& body_top,
                                      const CircleTrace& neck_bottom, const CircleTrace& body_bottom) {
    if (n < 2 * J + 2) throw std::invalid_argument("matching: circle grid too coarse for the Fourier truncation");
    MatchingResidual res;
    res.theta = periodic_grid(2.0 * kPi, n);
    for (auto* v : {&res.c0_top, &res.c0_bottom, &res.c1_top, &res.c1_bottom}) v->resize(n);
    for (int k = 0; k < n; ++k) {
        const double th = res.theta[k];
        const TracePoint ut = neck_top(th), bt = body_top(th), ub = neck_bottom(th), bb = body_bottom(th);
        res.c0_top[k] = ut.value - bt.value;
        res.c1_top[k] = ut.r_dr - bt.r_dr;
        res.c0_bottom[k] = ub.value - bb.value;
        res.c1_bottom[k] = ub.r_dr - bb.r_dr;
        res.trace_scale = std::max({res.trace_scale, std::abs(ut.value), std::abs(ub.value)});
    }
    res.m0_top = cosine_coefficients(res.c0_top, J);
    res.m1_top = cosine_coefficients(res.c1_top, J);
    res.m0_bottom = cosine_coefficients(res.c0_bottom, J);
    res.m1_bottom = cosine_coefficients(res.c1_bottom, J);
    return res;
}

MatchingResidual GluingProblem::assemble_matching(const GluingParams& p, const NeckSolution& top,
                                                  const NeckSolution& bottom, const BodySolution& body) const {
    if (top.side != NeckSide::Up || bottom.side != NeckSide::Down)
        throw std::invalid_argument("assemble_matching: neck halves passed in the wrong order");
    if (top.ctx->epsilon != eps_ || bottom.ctx->epsilon != eps_ || body.ctx->epsilon != eps_)
        throw std::invalid_argument("assemble_matching: pieces built for another epsilon");
    const double r = match_radius();
    return matching_from_traces(
        cfg_.n_match, cfg_.J, [&](double th) { return top.trace(r, th, p.gamma_t, p.sigma_t, p.varsigma_t); },
        [&](double th) { return body.trace(r, th, NeckSide::Up); },
        [&](double th) { return bottom.trace(r, th, p.gamma_b, p.sigma_b, p.varsigma_b); },
        [&](double th) { return body.trace(r, th, NeckSide::Down); });
}

MatchState GluingProblem::inner_stage(GluingParams& p) {
    const int J = cfg_.J;
    MatchState st;
    double prev = 0.0;
    for (int it = 0; it < cfg_.max_inner; ++it) {
        // The three solves are independent.
        auto ct = neck_context(p.eta_t), cb = neck_context(p.eta_b);
        body_context(p.xi);
        auto ft = std::async(std::launch::async, [&] { return solve_neck(ct, p.phi_t, NeckSide::Up); });
        auto fb = std::async(std::launch::async, [&] { return solve_neck(cb, p.phi_b, NeckSide::Down); });
        st.body = solve_body(p.xi, p.phi_t_tilde, p.phi_b_tilde);
        st.top = ft.get();
        st.bottom = fb.get();
        st.residual = assemble_matching(p, st.top, st.bottom, st.body);
        st.iterations = it + 1;
        const double h = st.residual.high_mode_norm();
        const double scale = std::max(1.0, st.residual.trace_scale);
        if (it > 0 && prev > 1e3 * cfg_.inner_tol * scale) st.contraction = std::max(st.contraction, h / prev);
        const bool at_floor = it > 0 && h < 1e3 * cfg_.inner_tol * scale && h > 0.5 * prev;
        if (h <= cfg_.inner_tol * scale || at_floor) break;
        if (it > 2 && h > 10.0 * prev) throw NumericalError("inner stage: mode-wise iteration diverges");
        prev = h;
        if (it + 1 == cfg_.max_inner) break;
        // Mode j of (C0, C1) moves by (1, -1; -j, -j) (phi_j, phi~_j) on either end.
        const auto& r = st.residual;
        for (int j = 2; j <= J; ++j) {
            p.phi_t[j] -= 0.5 * (r.m0_top[j] - r.m1_top[j] / j);
            p.phi_t_tilde[j] += 0.5 * (r.m0_top[j] + r.m1_top[j] / j);
            p.phi_b[j] -= 0.5 * (r.m0_bottom[j] - r.m1_bottom[j] / j);
            p.phi_b_tilde[j] += 0.5 * (r.m0_bottom[j] + r.m1_bottom[j] / j);
        }
    }
    return st;
}

std::pair<GluingParams, MatchReport> GluingProblem::match(GluingParams p) {
    const int J = cfg_.J;
    for (auto* f : {&p.phi_t, &p.phi_b, &p.phi_t_tilde, &p.phi_b_tilde})
        if (f->empty()) f->assign(J + 1, 0.0);
    for (auto* f : {&p.phi_t, &p.phi_b, &p.phi_t_tilde, &p.phi_b_tilde}) {
        if (static_cast<int>(f->size()) > J + 1) f->resize(J + 1);
        else f->resize(J + 1, 0.0);
        check_phi(*f, J, "match_cauchy_data");
    }
    p.xi = -0.5 * eps_;
    const double tol = cfg_.tol.match;
    MatchReport rep;
    MatchState st = inner_stage(p);
    rep.inner_iters.push_back(st.iterations);
    rep.inner_contraction = st.contraction;
    auto merit = [](const MatchingResidual& r) { return std::max(r.low_modes().cwiseAbs().maxCoeff(), r.high_mode_norm()); };
    double m = merit(st.residual);
    rep.residual_history.push_back(m);

    // Low-block Jacobian with the boundary functions frozen. gamma, sigma and varsigma only move
    // the traces; eta needs a fresh neck solve.
    auto jacobian = [&](const GluingParams& q, const MatchState& s) {
        const Eigen::VectorXd x0 = q.scaled_vector(eps_);
        const Eigen::VectorXd f0 = s.residual.low_modes();
        Eigen::MatrixXd Jm(8, 8);
        const double h = 1e-5;
        std::vector<std::future<NeckSolution>> eta_solves;
        for (int c = 6; c < 8; ++c) {
            GluingParams qc = q;
            Eigen::VectorXd x = x0;
            x[c] += h;
            qc.set_scaled_vector(eps_, x);
            const double eta = c == 6 ? qc.eta_t : qc.eta_b;
            auto ctx = neck_context(eta);
            const auto& phi = c == 6 ? q.phi_t : q.phi_b;
            const NeckSide side = c == 6 ? NeckSide::Up : NeckSide::Down;
            eta_solves.push_back(std::async(std::launch::async, [this, ctx, &phi, side] { return solve_neck(ctx, phi, side); }));
        }
        for (int c = 0; c < 8; ++c) {
            GluingParams qc = q;
            Eigen::VectorXd x = x0;
            x[c] += h;
            qc.set_scaled_vector(eps_, x);
            MatchingResidual rc;
            if (c < 6) rc = assemble_matching(qc, s.top, s.bottom, s.body);
            else if (c == 6) rc = assemble_matching(qc, eta_solves[0].get(), s.bottom, s.body);
            else rc = assemble_matching(qc, s.top, eta_solves[1].get(), s.body);
            Jm.col(c) = (rc.low_modes() - f0) / h;
        }
        return Jm;
    };

    for (int k = 0; k < cfg_.max_newton; ++k) {
        // Iterate past the acceptance tolerance down to newton_tol; a step that cannot reduce the
        // merit ends the loop (round-off floor).
        if (st.residual.sup_mismatch() <= cfg_.newton_tol * st.residual.trace_scale) break;
        const Eigen::MatrixXd Jm = jacobian(p, st);
        const Eigen::VectorXd dx = -Jm.fullPivLu().solve(st.residual.low_modes());
        if (!dx.allFinite()) throw NumericalError("match_cauchy_data: singular matching Jacobian");
        const Eigen::VectorXd x0 = p.scaled_vector(eps_);
        bool accepted = false;
        for (double lam = 1.0; lam >= 1.0 / 32.0; lam *= 0.5) {
            GluingParams q = p;
            q.set_scaled_vector(eps_, x0 + lam * dx);
            MatchState sq;
            try {
                sq = inner_stage(q);
            } catch (const std::invalid_argument&) {
                continue;  // trial left the charts, shorten the step
            } catch (const NumericalError&) {
                continue;
            }
            const double mq = merit(sq.residual);
            if (mq < m) {
                p = std::move(q);
                st = std::move(sq);
                m = mq;
                accepted = true;
                break;
            }
        }
        rep.newton_iters = k + 1;
        if (!accepted) break;
        rep.residual_history.push_back(m);
        rep.inner_iters.push_back(st.iterations);
        rep.inner_contraction = std::max(rep.inner_contraction, st.contraction);
    }
    rep.converged = st.residual.sup_mismatch() <= tol * st.residual.trace_scale;

    const MatchingResidual& r = st.residual;
    rep.c0_mismatch_top = max_abs(r.c0_top);
    rep.c0_mismatch_bottom = max_abs(r.c0_bottom);
    rep.c1_mismatch_top = max_abs(r.c1_top);
    rep.c1_mismatch_bottom = max_abs(r.c1_bottom);
    for (int j = 0; j <= J; ++j)
        for (const auto* mm : {&r.m0_top, &r.m1_top, &r.m0_bottom, &r.m1_bottom}) rep.modewise_residuals.push_back(std::abs((*mm)[j]));
    rep.trace_scale = r.trace_scale;
    rep.parameter_norm = p.scaled_vector(eps_).norm();
    if (!rep.converged) {
        std::ostringstream os;
        os << "match_cauchy_data: no convergence after " << rep.newton_iters << " Newton steps, mismatch "
           << r.sup_mismatch() << " against " << tol * r.trace_scale;
        throw NumericalError(os.str());
    }
    if (p.scaled_norm(eps_) > cfg_.kappa * eps_) throw NumericalError("match_cauchy_data: parameters left the kappa eps ball");
    return {p, rep};
}

// ---------------------------------------------------------------------------------------------
// Glued mesh

namespace {

double interior_max_H(const std::vector<double>& u_grid, const std::vector<double>& v_grid, const VGrid2& X,
                      const VGrid2& ref, int first, int last) {
    const Grid2 H = oriented_mean_curvature(u_grid, v_grid, true, X, ref);
    double m = 0.0;
    for (int i = std::max(first, 2); i <= std::min(last, H.n0 - 3); ++i)
        for (int k = 0; k < H.n1; ++k) m = std::max(m, std::abs(H(i, k)));
    return m;
}

int euler_characteristic(const Mesh& m) {
    std::vector<std::pair<int, int>> edges;
    edges.reserve(3 * m.faces.size());
    for (const auto& f : m.faces)
        for (int a = 0; a < 3; ++a) edges.emplace_back(std::minmax(f[a], f[(a + 1) % 3]));
    std::sort(edges.begin(), edges.end());
    const auto ne = std::unique(edges.begin(), edges.end()) - edges.begin();
    return static_cast<int>(m.vertices.size()) - static_cast<int>(ne) + static_cast<int>(m.faces.size());
}

}  // namespace

GluedMesh GluingProblem::build_glued_mesh(const GluingParams& p, int periods, const MatchReport* report) {
    if (periods < 1) throw std::invalid_argument("build_glued_mesh: at least one period");
    if (report && !report->converged) throw std::invalid_argument("build_glued_mesh: unmatched solution");
    const int ny = cfg_.n_y;
    if (ny % 2) throw std::invalid_argument("build_glued_mesh: n_y must be even");
    const NeckSolution top = solve_neck(p.eta_t, p.phi_t, NeckSide::Up);
    const NeckSolution bottom = solve_neck(p.eta_b, p.phi_b, NeckSide::Down);
    const BodySolution body = solve_body(p.xi, p.phi_t_tilde, p.phi_b_tilde);
    const MatchingResidual res = assemble_matching(p, top, bottom, body);
    if (res.sup_mismatch() > cfg_.tol.match * res.trace_scale) {
        std::ostringstream os;
        os << "build_glued_mesh: unmatched solution, Cauchy-data mismatch " << res.sup_mismatch();
        throw std::invalid_argument(os.str());
    }

    GluedMesh g;
    const double rm = match_radius();
    const double sm = std::acosh(rm);
    const BodyContext& bc = *body.ctx;
    const double ds = bc.s_grid[1] - bc.s_grid[0];

    // Rows of ny vertices, bottom end to top end, all at angle 2 pi k / ny.
    std::vector<std::vector<Vec3>> rows;
    std::vector<char> is_neck_seam;  // row index -> neck seam row flag
    auto push = [&](std::vector<Vec3> r, bool neck_seam) {
        rows.push_back(std::move(r));
        is_neck_seam.push_back(neck_seam);
    };
    auto neck_rows = [&](const NeckSolution& sol, double gamma, double sigma, double varsigma, int& first, int& last,
                         VGrid2& P) {
        const NeckContext& c = *sol.ctx;
        first = -1;
        for (int i = 0; i <= c.i_cut; ++i)
            if ((1.0 + gamma) * 0.5 * std::exp(c.t_grid[i]) - std::abs(varsigma) > rm * (1.0 + 0.25 * cfg_.dt)) {
                first = i;
                break;
            }
        if (first < 0) throw NumericalError("build_glued_mesh: neck rows do not reach past the seam");
        last = c.i_cut;
        P = sol.points(0, c.n_geo - 1, gamma, sigma, varsigma);
    };

    int bt_first, bt_last, tp_first, tp_last;
    VGrid2 Pb, Pt;
    neck_rows(bottom, p.gamma_b, p.sigma_b, p.varsigma_b, bt_first, bt_last, Pb);
    neck_rows(top, p.gamma_t, p.sigma_t, p.varsigma_t, tp_first, tp_last, Pt);

    // Lower neck, outer row first. The half-turn sends neck angle theta to pi - theta.
    for (int i = bt_last; i >= bt_first; --i) {
        std::vector<Vec3> r(ny);
        for (int k = 0; k < ny; ++k) r[k] = Pb(i, ((ny / 2 - k) % ny + ny) % ny);
        push(std::move(r), false);
    }
    std::vector<Vec3> seam_nb(ny), seam_bb(ny), seam_bt(ny), seam_nt(ny);
    for (int k = 0; k < ny; ++k) {
        const double th = 2.0 * kPi * k / ny;
        const double x = rm * std::cos(th), y = rm * std::sin(th);
        const TracePoint nb = bottom.trace(rm, th, p.gamma_b, p.sigma_b, p.varsigma_b);
        const TracePoint bb = body.trace(rm, th, NeckSide::Down);
        const TracePoint bt = body.trace(rm, th, NeckSide::Up);
        const TracePoint nt = top.trace(rm, th, p.gamma_t, p.sigma_t, p.varsigma_t);
        seam_nb[k] = Vec3(x, y, nb.value);
        seam_bb[k] = Vec3(x, y, bb.value);
        seam_bt[k] = Vec3(x, y, bt.value);
        seam_nt[k] = Vec3(x, y, nt.value);
        g.seam_c0_jump = std::max({g.seam_c0_jump, std::abs(nb.value - bb.value), std::abs(nt.value - bt.value)});
        g.seam_c1_jump = std::max({g.seam_c1_jump, std::abs(nb.r_dr - bb.r_dr), std::abs(nt.r_dr - bt.r_dr)});
    }
    push(seam_nb, true);
    push(seam_bb, false);
    int body_first = -1, body_last = -1;
    const VGrid2 Pbody = body.points(0, static_cast<int>(bc.s_grid.size()) - 1);
    for (std::size_t i = 0; i < bc.s_grid.size(); ++i) {
        if (std::abs(bc.s_grid[i]) > sm - 0.25 * ds) continue;
        if (body_first < 0) body_first = static_cast<int>(i);
        body_last = static_cast<int>(i);
        std::vector<Vec3> r(ny);
        for (int k = 0; k < ny; ++k) r[k] = Pbody(static_cast<int>(i), k);
        push(std::move(r), false);
    }
    push(seam_bt, false);
    push(seam_nt, true);
    for (int i = tp_first; i <= tp_last; ++i) {
        std::vector<Vec3> r(ny);
        for (int k = 0; k < ny; ++k) r[k] = Pt(i, k);
        push(std::move(r), false);
    }

    // Quad strips between consecutive rows, counterclockwise about the catenoid normal. The neck
    // and body seam rows are not joined; welding identifies them.
    Mesh& u = g.unwelded;
    for (const auto& r : rows) u.vertices.insert(u.vertices.end(), r.begin(), r.end());
    const auto idx = [ny](int row, int k) { return row * ny + (k % ny); };
    const int nb_seam_row = bt_last - bt_first + 1;
    const int nt_seam_row = static_cast<int>(rows.size()) - (tp_last - tp_first + 1) - 1;
    for (int a = 0; a + 1 < static_cast<int>(rows.size()); ++a) {
        if (a == nb_seam_row || a == nt_seam_row - 1) continue;
        for (int k = 0; k < ny; ++k) {
            u.faces.push_back({idx(a, k), idx(a, k + 1), idx(a + 1, k + 1)});
            u.faces.push_back({idx(a, k), idx(a + 1, k + 1), idx(a + 1, k)});
        }
    }
    // Weld each neck seam vertex to the body seam vertex over the same point of the circle.
    const double weld_tol = cfg_.tol.weld;
    std::vector<int> remap(u.vertices.size());
    for (std::size_t q = 0; q < remap.size(); ++q) remap[q] = static_cast<int>(q);
    for (const auto& [neck_row, body_row] : {std::pair{nb_seam_row, nb_seam_row + 1}, std::pair{nt_seam_row, nt_seam_row - 1}})
        for (int k = 0; k < ny; ++k) {
            const int a = idx(neck_row, k), b = idx(body_row, k);
            if ((u.vertices[a] - u.vertices[b]).norm() <= weld_tol) {
                remap[a] = b;
                g.weld_pairs.emplace_back(a, b);
            }
        }
    g.welded_vertices = static_cast<int>(g.weld_pairs.size());
    Mesh unit;
    std::vector<int> compact(u.vertices.size(), -1);
    for (std::size_t q = 0; q < u.vertices.size(); ++q)
        if (remap[q] == static_cast<int>(q)) {
            compact[q] = static_cast<int>(unit.vertices.size());
            unit.vertices.push_back(u.vertices[q]);
        }
    for (const auto& f : u.faces) unit.faces.push_back({compact[remap[f[0]]], compact[remap[f[1]]], compact[remap[f[2]]]});
    g.euler_characteristic = euler_characteristic(unit);

    // Translates of the fundamental piece by the lattice vector of the Riemann example at eps.
    const auto c0 = neck_context(0.0);
    g.period = Vec3(2.0 * c0->profile.ell, 0.0, 2.0 * c0->profile.t_blowup);
    g.periods = periods;
    g.vertices_per_period = static_cast<int>(unit.vertices.size());
    for (int n = 0; n < periods; ++n) {
        const int off = static_cast<int>(g.mesh.vertices.size());
        for (const auto& v : unit.vertices) g.mesh.vertices.push_back(v + double(n) * g.period);
        for (const auto& f : unit.faces) g.mesh.faces.push_back({f[0] + off, f[1] + off, f[2] + off});
    }

    // Mean curvature on each piece's own parameter grid, two rows clear of the seams and cuts.
    g.max_H_body = interior_max_H(bc.s_grid, bc.theta_grid, Pbody, bc.field, body_first + 2, body_last - 2);
    auto neck_H = [&](const NeckSolution& sol, const VGrid2& P, int first, int last) {
        const NeckContext& c = *sol.ctx;
        std::vector<double> tg(c.t_grid.begin(), c.t_grid.begin() + c.n_geo);
        VGrid2 ref = c.field;
        if (sol.side == NeckSide::Down)
            for (auto& v : ref.v) v = half_turn(v);
        return interior_max_H(tg, c.y_grid, P, ref, first + 2, last - 2);
    };
    g.max_H_neck_bottom = neck_H(bottom, Pb, bt_first, bt_last);
    g.max_H_neck_top = neck_H(top, Pt, tp_first, tp_last);
    g.max_H = std::max({g.max_H_body, g.max_H_neck_top, g.max_H_neck_bottom});

    std::ostringstream os;
    os.precision(6);
    os << "periods=" << periods << " vertices_per_period=" << g.vertices_per_period
       << " faces_per_period=" << unit.faces.size() << " euler_characteristic_per_period=" << g.euler_characteristic
       << " boundary_circles_per_period=2 welded_seam_vertices=" << g.welded_vertices << " of " << 2 * ny
       << " body=catenoid xi=" << p.xi;
    g.summary = os.str();
    return g;
}

AnnulusGraph neck_trace_graph(const NeckSolution& sol, double gamma, double sigma, double varsigma, double r_in,
                              double r_out, int n_r, int n_theta) {
    return make_annulus_graph(r_in, r_out, n_r, n_theta,
                              [&](double r, double th) { return sol.trace(r, th, gamma, sigma, varsigma).value; });
}

AnnulusGraph body_trace_graph(const BodySolution& sol, NeckSide side, double r_in, double r_out, int n_r, int n_theta) {
    return make_annulus_graph(r_in, r_out, n_r, n_theta, [&](double r, double th) { return sol.trace(r, th, side).value; });
}

NeckSolution solve_neck(double epsilon, double eta, const std::vector<double>& phi, NeckSide side,
                        const GluingConfig& cfg) {
    GluingProblem gp(epsilon, cfg);
    return gp.solve_neck(eta, phi, side);
}

BodySolution solve_body(double epsilon, double xi, const std::vector<double>& phi_t_tilde,
                        const std::vector<double>& phi_b_tilde, const GluingConfig& cfg) {
    GluingProblem gp(epsilon, cfg);
    return gp.solve_body(xi, phi_t_tilde, phi_b_tilde);
}

std::pair<GluingParams, MatchReport> match_cauchy_data(double epsilon, const GluingParams& initial,
                                                       const GluingConfig& cfg) {
    GluingProblem gp(epsilon, cfg);
    return gp.match(initial);
}

}  // namespace minsurf
