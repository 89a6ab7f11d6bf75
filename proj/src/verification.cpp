#include "minsurf/cli_io.hpp"

#include "minsurf/graph_models.hpp"
#include "minsurf/jacobi_spectral.hpp"
#include "minsurf/riemann_core.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

namespace minsurf {

std::string CheckResult::line() const {
    char buf[96];
    std::snprintf(buf, sizeof buf, "measured %.6g %s bound %.6g", measured, relation.c_str(), bound);
    std::ostringstream os;
    os << (pass ? "PASS" : "FAIL") << ' ';
    if (criterion > 0) os << "AC" << criterion << ' ';
    os << key << " | " << quantity << " | " << buf;
    return os.str();
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string eps_label(double e) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "eps=%.6g", e);
    return buf;
}

class Suite {
public:
    explicit Suite(std::vector<CheckResult>& out) : out_(out) {}

    void at_most(int ac, const std::string& key, const std::string& q, double measured, double bound) {
        out_.push_back({ac, key, q, measured, "<=", bound, measured <= bound});
    }
    void at_least(int ac, const std::string& key, const std::string& q, double measured, double bound) {
        out_.push_back({ac, key, q, measured, ">=", bound, measured >= bound});
    }
    // Runs body; an exception becomes a failing line carrying its message.
    void guarded(int ac, const std::string& key, const std::function<void()>& body) {
        try {
            body();
        } catch (const std::exception& e) {
            out_.push_back({ac, key, std::string("error: ") + e.what(), 0.0, "<=", 0.0, false});
        }
    }

private:
    std::vector<CheckResult>& out_;
};

double spread(const std::vector<double>& v) {
    return *std::max_element(v.begin(), v.end()) / *std::min_element(v.begin(), v.end());
}

void immersion_minimality(Suite& s) {
    const std::string key = "immersion_minimality";
    for (double e : {0.2, 0.1, 0.05}) {
        s.guarded(1, key, [&] {
            const auto t0 = Clock::now();
            const RiemannProfile p = solve_profile(e);
            std::vector<double> h, H;
            for (int n : {64, 128, 256}) {
                Tolerances tol;
                if (n == 64) tol.frame = 1e-3;  // the coarse grid only feeds the convergence order
                const ImmersionPatch im = immerse(conformal_frame(p, n, n, -1.0, tol));
                h.push_back(1.0 / n);
                H.push_back(im.max_abs_H());
            }
            const double dt = seconds_since(t0);
            s.at_most(1, key, "sup|H| on the 256^2 patch, " + eps_label(e), H.back(), 1e-5);
            s.at_least(1, key, "convergence order of sup|H| over 64/128/256, " + eps_label(e), loglog_slope(h, H), 1.9);
            s.at_most(1, key, "runtime in seconds, " + eps_label(e), dt, 30.0);
        });
    }
}

void profile_expansion(Suite& s) {
    const std::string key = "profile_expansion";
    s.guarded(2, key, [&] {
        std::vector<double> CR, Cc;
        for (double e : {0.1, 0.05, 0.025}) {
            const RiemannProfile p = solve_profile(e);
            double mR = 0.0, mc = 0.0;
            for (std::size_t i = 0; i < p.t_grid.size(); ++i) {
                const double t = p.t_grid[i];
                if (std::abs(t) > p.t_blowup - 1.0) continue;
                const double ch = std::cosh(t);
                mR = std::max(mR, std::abs(p.R[i] - ch) / (e * e * ch * ch * ch));
                mc = std::max(mc, std::abs(p.c[i] - e * (t / 2 + std::sinh(2 * t) / 4)) / (e * e * e * std::pow(ch, 4)));
            }
            CR.push_back(mR);
            Cc.push_back(mc);
        }
        s.at_most(2, key, "max/min of |R - cosh t| / (eps^2 cosh^3 t) over eps = 0.1, 0.05, 0.025", spread(CR), 1.25);
        s.at_most(2, key, "max/min of |c - c_model| / (eps^3 cosh^4 t) over eps = 0.1, 0.05, 0.025", spread(Cc), 1.25);
    });
}

void spectral_bound(Suite& s, int ac, double e, int modes, int basis, const Tolerances& tol) {
    const std::string key = "spectral_bound";
    s.guarded(ac, key, [&] {
        const EvenSpectrum sp = spectrum_D(e, modes, basis, tol);
        double margin = 1e300;
        for (int i = 0; i < modes; ++i) margin = std::min(margin, sp.lambda[i] - (i * i + 1.0 - std::sqrt(1.0 + 4 * e * e)));
        s.at_least(ac, key, "min over i < " + std::to_string(modes) + " of lambda_i - (i^2 + 1 - sqrt(1 + 4 eps^2)), " + eps_label(e),
                   margin, 0.0);
        s.at_most(ac, key, "eigenvalue shift under basis doubling, " + eps_label(e), sp.doubling_shift, tol.eig);
    });
}

void period_bounds(Suite& s, int ac, const std::vector<double>& eps) {
    const std::string key = "period_bounds";
    s.guarded(ac, key, [&] {
        double lower = 1e300, upper = -1e300, shift = 0.0;
        for (double e : eps) {
            const ABSolution ab = solve_ab(e);
            const double q = std::pow(ab.y_period / (2 * kPi), 2);
            lower = std::min(lower, q - 1.0 / std::sqrt(1.0 + 4 * e * e));
            upper = std::max(upper, q);
            shift = std::max(shift, std::abs(period_t(e) + std::log(e)));
        }
        std::string range = eps.size() == 1 ? eps_label(eps[0]) : "eps in [1e-3, 0.2]";
        s.at_least(ac, key, "min of (y_eps / 2 pi)^2 - 1 / sqrt(1 + 4 eps^2), " + range, lower, 0.0);
        s.at_most(ac, key, "max of (y_eps / 2 pi)^2, " + range, upper, 1.0);
        s.at_most(ac, key, "max of |t_eps + log eps|, " + range, shift, 2.0);
    });
}

void pairing_constants(Suite& s) {
    const std::string key = "pairing_constants";
    s.guarded(5, key, [&] {
        const auto p0p = jacobi_field(JacobiKind::Phi0Plus), p0m = jacobi_field(JacobiKind::Phi0Minus);
        const auto p1m = jacobi_field(JacobiKind::Phi1Minus);
        const auto p1u = jacobi_field(JacobiKind::Phi1Plus, CatenoidEnd::Top, 0.5);  // unit e^{-s} cos coefficient
        const double w0 = pairing_W(p0p, p0m, 0.5, 3.0), w1 = pairing_W(p1m, p1u, 0.5, 3.0);
        s.at_most(5, key, "| |W(Phi0+, Phi0-)| - 2 pi |", std::abs(std::abs(w0) - 2 * kPi), 1e-6);
        s.at_most(5, key, "| |W(Phi1-, Phi1+)| - pi | with unit coefficients", std::abs(std::abs(w1) - kPi), 1e-6);
        s.at_most(5, key, "Phi0 pairing change between windows [0.5, 3] and [1, 4]",
                  std::abs(pairing_W(p0p, p0m, 1.0, 4.0) - w0), 1e-8);
        s.at_most(5, key, "Phi1 pairing change between windows [0.5, 3] and [1, 4]",
                  std::abs(pairing_W(p1m, p1u, 1.0, 4.0) - w1), 1e-8);
    });
}

void right_inverse_uniformity(Suite& s) {
    const std::string key = "right_inverse_uniformity";
    s.guarded(6, key, [&] {
        std::vector<double> ratios;
        double residual = 0.0;
        for (double e : {0.1, 0.05, 0.025}) {
            const ABSolution ab = solve_ab(e);
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
                const RightInverseResult r = right_inverse(ab, t0, -1.5, g);
                ratios.push_back(r.norm_ratio);
                residual = std::max(residual, r.residual);
            }
        }
        s.at_most(6, key, "max/min norm ratio over eps = 0.1, 0.05, 0.025 and t0 = t~, t~ + 2", spread(ratios), 2.0);
        s.at_most(6, key, "max weighted residual of L v - g", residual, 1e-8);
    });
}

void fixed_point_exponents(Suite& s) {
    const std::string key = "fixed_point_exponents";
    const std::vector<double> eps{0.02, 0.01, 0.005};
    auto probe = [](double e) {
        std::vector<double> phi(9, 0.0);
        phi[2] = e;
        phi[3] = 0.5 * e;
        return phi;
    };
    s.guarded(7, key, [&] {
        std::vector<double> norms;
        double contraction = 0.0;
        for (double e : eps) {
            const NeckSolution n = solve_neck(e, 0.0, probe(e), NeckSide::Up);
            norms.push_back(n.report.correction_norm);
            contraction = std::max(contraction, n.report.contraction_estimate);
        }
        s.at_most(7, key, "|neck exponent - 0.75| at mu = -1.5 over eps = 0.02, 0.01, 0.005",
                  std::abs(loglog_slope(eps, norms) - 0.75), 0.25);
        s.at_most(7, key, "neck contraction factor", contraction, 0.5);
    });
    s.guarded(7, key, [&] {
        std::vector<double> norms;
        double contraction = 0.0;
        for (double e : eps) {
            const BodySolution b = solve_body(e, 0.0, probe(e), probe(e));
            norms.push_back(b.report.correction_norm);
            contraction = std::max(contraction, b.report.contraction_estimate);
        }
        s.at_most(7, key, "|body exponent - 2| over eps = 0.02, 0.01, 0.005", std::abs(loglog_slope(eps, norms) - 2.0), 0.25);
        s.at_most(7, key, "body contraction factor", contraction, 0.5);
    });
}

void gluing_end_to_end(Suite& s) {
    const std::string key = "gluing_end_to_end";
    s.guarded(8, key, [&] {
        const double e = 0.02;
        const auto t0 = Clock::now();
        GluingProblem gp(e);
        auto [p, rep] = gp.match(GluingParams::zero(8));
        const double tol = 1e-8 * rep.trace_scale;
        s.at_most(8, key, "Newton steps at eps = 0.02, J = 8", rep.newton_iters, 20);
        s.at_most(8, key, "sup C0 seam mismatch", std::max(rep.c0_mismatch_top, rep.c0_mismatch_bottom), tol);
        s.at_most(8, key, "sup C1 seam mismatch", std::max(rep.c1_mismatch_top, rep.c1_mismatch_bottom), tol);
        s.at_most(8, key, "rescaled parameter norm", p.scaled_norm(e), 10.0 * e);
        const GluedMesh g = gp.build_glued_mesh(p, 1, &rep);
        s.at_most(8, key, "glued mesh interior sup|H|", g.max_H, 1e-5);
        GluingConfig c16;
        c16.J = 16;
        auto [p16, rep16] = match_cauchy_data(e, GluingParams::zero(16), c16);
        const double moved = (p16.scaled_vector(e) - p.scaled_vector(e)).cwiseAbs().maxCoeff();
        s.at_most(8, key, "parameter change from J = 8 to J = 16", moved, 1e-7);
        s.at_most(8, key, "runtime in seconds", seconds_since(t0), 600.0);
    });
}

void remainder_expansions(Suite& s) {
    const std::string key = "remainder_expansions";
    s.guarded(9, key, [&] {
        const int ns = 241, nt = 64;
        const auto sg = linspace(-1.5, 1.5, ns);
        const auto th = periodic_grid(2 * kPi, nt);
        std::vector<double> q;
        for (double a : {0.02, 0.01, 0.005}) {
            Grid2 w(ns, nt);
            for (int i = 0; i < ns; ++i)
                for (int k = 0; k < nt; ++k) w(i, k) = a * std::cos(th[k]) / std::cosh(sg[i]);
            const CatenoidExpansion ex = catenoid_graph_expansion(sg, nt, w);
            double m = 0.0;
            for (int i = 2; i < ns - 2; ++i)
                for (int k = 0; k < nt; ++k) m = std::max(m, std::abs(ex.remainder(i, k)));
            q.push_back(m / (a * a));
        }
        s.at_most(9, key, "max/min of sup|remainder| / a^2 over a = 0.02, 0.01, 0.005", spread(q), 1.25);
    });
    s.guarded(9, key, [&] {
        const int ns = 161, nt = 64;
        const auto sg = linspace(2.0, 4.0, ns);
        const ImmersionPatch pc = catenoid_patch(sg, nt);
        Grid2 u(ns, nt);
        for (int i = 0; i < ns; ++i)
            for (int k = 0; k < nt; ++k)
                u(i, k) = std::exp(-8 * (sg[i] - 3) * (sg[i] - 3)) * (1 + 0.5 * std::cos(pc.v_grid[k]));
        const double a = 5.0 * kPi / 180.0;
        const VGrid2 tl(ns, nt, Vec3(std::sin(a), 0, std::cos(a)));
        std::vector<double> steps{1e-2, 5e-3, 2.5e-3}, res, amps{4e-2, 2e-2, 1e-2}, def;
        for (double h : steps) res.push_back(transverse_transfer(pc, tl, u, h).sup_residual);
        for (double am : amps) def.push_back(transfer_defect(pc, tl, u, am));
        s.at_most(9, key, "|transfer residual order in the step - 2|", std::abs(loglog_slope(steps, res) - 2.0), 0.2);
        s.at_most(9, key, "|transfer defect order in the amplitude - 2|", std::abs(loglog_slope(amps, def) - 2.0), 0.2);
    });
}

void neck_expansion(Suite& s, double e) {
    const std::string key = "neck_expansion";
    s.guarded(0, key, [&] {
        const RiemannProfile prof = solve_profile(e, 0.2);
        for (NeckSide side : {NeckSide::Up, NeckSide::Down}) {
            const NeckGraph g = neck_graph(prof, 0.0, 0.0, 0.0, side, 257);
            s.at_most(0, key,
                      std::string("sup deviation of the ") + (side == NeckSide::Up ? "upper" : "lower") +
                          " neck graph from its closed form, " + eps_label(e),
                      g.sup_deviation, 8.0 * e);
        }
    });
}

}  // namespace

std::vector<CheckResult> run_verification(const RunConfig& cfg, bool include_extras) {
    std::vector<CheckResult> out;
    Suite s(out);
    immersion_minimality(s);
    profile_expansion(s);
    for (double e : {0.2, 0.1, 0.05}) spectral_bound(s, 3, e, 11, 64, Tolerances{});
    period_bounds(s, 4, {1e-3, 2e-3, 5e-3, 0.01, 0.02, 0.05, 0.1, 0.2});
    pairing_constants(s);
    right_inverse_uniformity(s);
    fixed_point_exponents(s);
    gluing_end_to_end(s);
    remainder_expansions(s);
    if (include_extras)
        for (double e : cfg.epsilon) {
            spectral_bound(s, 0, e, cfg.modes, cfg.basis, cfg.tol);
            period_bounds(s, 0, {e});
            // The annulus eps^{-1/2}/4 .. 4 eps^{-1/2} only clears the waist for small eps.
            if (e <= 0.04) neck_expansion(s, e);
        }
    return out;
}

}  // namespace minsurf
