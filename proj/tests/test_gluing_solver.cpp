#include "doctest.h"

#include "minsurf/gluing_solver.hpp"

#include <algorithm>
#include <cmath>
#include <set>

using namespace minsurf;

namespace {

// Boundary data inside the kappa eps ball.
std::vector<double> probe_phi(double eps, int J = 8) {
    std::vector<double> phi(J + 1, 0.0);
    phi[2] = eps;
    phi[3] = 0.5 * eps;
    return phi;
}

struct Matched {
    std::unique_ptr<GluingProblem> problem;
    GluingParams params;
    MatchReport report;
};

// The eps = 0.02, J = 8 matched solution is shared by several cases.
Matched& matched_002() {
    static Matched m = [] {
        Matched r;
        r.problem = std::make_unique<GluingProblem>(0.02);
        auto [p, rep] = r.problem->match(GluingParams::zero(8));
        r.params = p;
        r.report = rep;
        return r;
    }();
    return m;
}

}  // namespace

TEST_CASE("neck correction scales like eps^{(3+mu)/2} and the map contracts") {
    std::vector<double> eps{0.02, 0.01, 0.005}, norms;
    for (double e : eps) {
        const NeckSolution s = solve_neck(e, 0.0, probe_phi(e), NeckSide::Up);
        CHECK(s.report.contraction_estimate <= 0.5);
        CHECK(s.report.residual_norm <= 1e-8);
        CHECK(s.report.correction_norm > 0.0);
        norms.push_back(s.report.correction_norm);
    }
    const double slope = loglog_slope(eps, norms);
    MESSAGE("neck exponent " << slope);
    CHECK(std::abs(slope - 0.75) <= 0.25);
}

TEST_CASE("exact neck data needs no correction") {
    const NeckSolution s = solve_neck(0.01, 0.0, std::vector<double>(9, 0.0), NeckSide::Up);
    CHECK(s.report.correction_norm == 0.0);
}

TEST_CASE("body correction scales like eps^2 and the map contracts") {
    std::vector<double> eps{0.02, 0.01, 0.005}, norms;
    for (double e : eps) {
        const BodySolution s = solve_body(e, 0.0, probe_phi(e), probe_phi(e));
        CHECK(s.report.contraction_estimate <= 0.5);
        CHECK(s.report.residual_norm <= 1e-8);
        norms.push_back(s.report.correction_norm);
    }
    const double slope = loglog_slope(eps, norms);
    MESSAGE("body exponent " << slope);
    CHECK(std::abs(slope - 2.0) <= 0.25);
}

TEST_CASE("boundary data must be orthogonal to 1 and cos") {
    std::vector<double> phi(9, 0.0);
    phi[1] = 1e-3;
    CHECK_THROWS_AS(solve_neck(0.02, 0.0, phi, NeckSide::Up), std::invalid_argument);
    CHECK_THROWS_AS(solve_body(0.02, 0.0, phi, std::vector<double>(9, 0.0)), std::invalid_argument);
    CHECK_THROWS_AS(solve_neck(0.02, 0.0, std::vector<double>(5, 0.0), NeckSide::Up), std::invalid_argument);
}

TEST_CASE("gluing problem validates its parameters") {
    CHECK_THROWS_AS(GluingProblem(0.08), std::invalid_argument);
    GluingConfig cfg;
    cfg.J = 3;
    CHECK_THROWS_AS(GluingProblem(0.02, cfg), std::invalid_argument);
    cfg = {};
    cfg.mu = -2.5;
    CHECK_THROWS_AS(GluingProblem(0.02, cfg), std::invalid_argument);
}

TEST_CASE("the lower neck half is the half-turn of an upper half") {
    GluingProblem gp(0.02);
    const auto phi = probe_phi(0.02);
    const NeckSolution down = gp.solve_neck(0.0, phi, NeckSide::Down);
    std::vector<double> phi_up = phi;
    for (int j = 0; j <= 8; ++j) phi_up[j] = -((j % 2) ? -1.0 : 1.0) * phi[j];
    const NeckSolution up = gp.solve_neck(0.0, phi_up, NeckSide::Up);
    const double r = gp.match_radius();
    for (double th : {0.0, 0.7, 2.0, 3.1}) {
        const TracePoint a = down.trace(r, th, 0.01, 0.02, 0.3);
        const TracePoint b = up.trace(r, kPi - th, 0.01, 0.02, -0.3);
        CHECK(a.value == doctest::Approx(-b.value).epsilon(1e-14));
        CHECK(a.r_dr == doctest::Approx(-b.r_dr).epsilon(1e-14));
    }
}

TEST_CASE("identical traces match exactly") {
    auto model = [](double th) { return TracePoint{std::log(2.0 * 3.5) + 0.01 * std::cos(2.0 * th), 1.0 - 0.02 * std::cos(2.0 * th)}; };
    const MatchingResidual r = matching_from_traces(64, 8, model, model, model, model);
    CHECK(r.sup_mismatch() == 0.0);
    CHECK(r.low_modes().norm() == 0.0);
    CHECK(r.high_mode_norm() == 0.0);
    CHECK_THROWS_AS(matching_from_traces(16, 8, model, model, model, model), std::invalid_argument);
}

TEST_CASE("exact pieces leave an O(eps) matching residual") {
    std::vector<double> sup;
    for (double e : {0.02, 0.01}) {
        GluingProblem gp(e);
        GluingParams p = GluingParams::zero(8);
        p.xi = -0.5 * e;
        const auto a = gp.solve_neck(0.0, p.phi_t, NeckSide::Up);
        const auto b = gp.solve_neck(0.0, p.phi_b, NeckSide::Down);
        const auto c = gp.solve_body(p.xi, p.phi_t_tilde, p.phi_b_tilde);
        const MatchingResidual r = gp.assemble_matching(p, a, b, c);
        CHECK(r.sup_mismatch() <= 0.2 * e);
        sup.push_back(r.sup_mismatch());
    }
    const double ratio = sup[0] / sup[1];
    MESSAGE("residual ratio under halving " << ratio);
    CHECK(ratio > 1.5);
    CHECK(ratio < 3.0);
}

TEST_CASE("dilation enters the mode-0 height mismatch with coefficient -1/2 log eps") {
    const double e = 0.01;
    GluingProblem gp(e);
    GluingParams p = GluingParams::zero(8);
    p.xi = -0.5 * e;
    const auto a = gp.solve_neck(0.0, p.phi_t, NeckSide::Up);
    const auto b = gp.solve_neck(0.0, p.phi_b, NeckSide::Down);
    const auto c = gp.solve_body(p.xi, p.phi_t_tilde, p.phi_b_tilde);
    const double f0 = gp.assemble_matching(p, a, b, c).low_modes()[0];
    std::vector<double> coef;
    for (double h : {1e-3, 5e-4}) {
        GluingParams q = p;
        q.gamma_t = h;
        coef.push_back((gp.assemble_matching(q, a, b, c).low_modes()[0] - f0) / h);
    }
    const double expected = -0.5 * std::log(e);
    MESSAGE("coefficient " << coef[1] << " against " << expected);
    CHECK(std::abs(coef[1] - expected) <= 5.0 * e);
    // The O(h) term halves with h.
    CHECK(std::abs(coef[0] - coef[1]) <= 1e-3);
}

TEST_CASE("matching converges at eps = 0.02 with J = 8") {
    Matched& m = matched_002();
    const MatchReport& rep = m.report;
    const double e = 0.02;
    CHECK(rep.converged);
    CHECK(rep.newton_iters <= 20);
    const double tol = 1e-8 * rep.trace_scale;
    CHECK(rep.c0_mismatch_top <= tol);
    CHECK(rep.c0_mismatch_bottom <= tol);
    CHECK(rep.c1_mismatch_top <= tol);
    CHECK(rep.c1_mismatch_bottom <= tol);
    CHECK(rep.parameter_norm <= 10.0 * e);
    CHECK(m.params.scaled_norm(e) <= 10.0 * e);
    CHECK(m.params.xi == -0.5 * e);
    CHECK(rep.inner_contraction <= std::sqrt(e) + std::pow(e, 1.0 - 0.75));
    for (std::size_t k = 1; k < rep.residual_history.size(); ++k) CHECK(rep.residual_history[k] < rep.residual_history[k - 1]);
    // x2-symmetric data: the two ends see mirror problems.
    CHECK(m.params.gamma_t == doctest::Approx(m.params.gamma_b).epsilon(1e-6));
}

TEST_CASE("matched traces agree on a doubled angular grid") {
    Matched& m = matched_002();
    GluingConfig cfg;
    cfg.n_match = 128;
    GluingProblem gp(0.02, cfg);
    const GluingParams& p = m.params;
    const auto a = gp.solve_neck(p.eta_t, p.phi_t, NeckSide::Up);
    const auto b = gp.solve_neck(p.eta_b, p.phi_b, NeckSide::Down);
    const auto c = gp.solve_body(p.xi, p.phi_t_tilde, p.phi_b_tilde);
    const MatchingResidual r = gp.assemble_matching(p, a, b, c);
    CHECK(r.sup_mismatch() <= 1e-8 * r.trace_scale);
}

TEST_CASE("doubling the Fourier truncation leaves the matched parameters in place") {
    Matched& m = matched_002();
    GluingConfig cfg;
    cfg.J = 16;
    auto [p16, rep16] = match_cauchy_data(0.02, GluingParams::zero(16), cfg);
    CHECK(rep16.converged);
    const Eigen::VectorXd d = p16.scaled_vector(0.02) - m.params.scaled_vector(0.02);
    MESSAGE("parameter change " << d.cwiseAbs().maxCoeff());
    CHECK(d.cwiseAbs().maxCoeff() < 1e-7);
    for (int j = 0; j <= 8; ++j) {
        CHECK(std::abs(p16.phi_t[j] - m.params.phi_t[j]) < 1e-7);
        CHECK(std::abs(p16.phi_t_tilde[j] - m.params.phi_t_tilde[j]) < 1e-7);
    }
}

TEST_CASE("glued mesh of the matched solution") {
    Matched& m = matched_002();
    const GluedMesh g = m.problem->build_glued_mesh(m.params, 1, &m.report);
    MESSAGE(g.summary);
    CHECK(g.max_H <= 1e-5);
    CHECK(g.seam_c0_jump <= 10.0 * 1e-8 * m.report.trace_scale);
    CHECK(g.seam_c1_jump <= 10.0 * 1e-8 * m.report.trace_scale);
    CHECK(g.welded_vertices == 2 * 128);
    CHECK(g.euler_characteristic == 0);
    CHECK(g.mesh.vertices.size() + g.welded_vertices == g.unwelded.vertices.size());

    // Consistent orientation: every interior edge is used once in each direction.
    std::set<std::pair<int, int>> directed;
    for (const auto& f : g.mesh.faces)
        for (int a = 0; a < 3; ++a) CHECK(directed.insert({f[a], f[(a + 1) % 3]}).second);

    // Independent weld oracle: sweep the unwelded vertices sorted by x for pairs within weld_tol.
    const double wt = Tolerances{}.weld;
    const auto& V = g.unwelded.vertices;
    std::vector<int> order(V.size());
    for (std::size_t q = 0; q < V.size(); ++q) order[q] = static_cast<int>(q);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return V[a][0] < V[b][0]; });
    std::set<std::pair<int, int>> close;
    for (std::size_t a = 0; a < order.size(); ++a)
        for (std::size_t b = a + 1; b < order.size() && V[order[b]][0] - V[order[a]][0] <= wt; ++b)
            if ((V[order[a]] - V[order[b]]).norm() <= wt) close.insert(std::minmax(order[a], order[b]));
    std::set<std::pair<int, int>> reported;
    for (const auto& [a, b] : g.weld_pairs) reported.insert(std::minmax(a, b));
    CHECK(close == reported);
}

TEST_CASE("periods translate the fundamental piece") {
    Matched& m = matched_002();
    const GluedMesh g1 = m.problem->build_glued_mesh(m.params, 1, &m.report);
    const GluedMesh g3 = m.problem->build_glued_mesh(m.params, 3, &m.report);
    CHECK(g3.mesh.vertices.size() == 3 * g1.mesh.vertices.size());
    CHECK(g3.mesh.faces.size() == 3 * g1.mesh.faces.size());
    const RiemannProfile prof = solve_profile(0.02);
    CHECK(g3.period[0] == doctest::Approx(2.0 * prof.ell).epsilon(1e-9));
    CHECK(g3.period[1] == 0.0);
    CHECK(g3.period[2] == doctest::Approx(2.0 * prof.t_blowup).epsilon(1e-9));
    const std::size_t n = g1.mesh.vertices.size();
    const Vec3 d = g3.mesh.vertices[2 * n + 17] - g3.mesh.vertices[17];
    CHECK((d - 2.0 * g3.period).norm() <= 1e-9);
}

TEST_CASE("unmatched parameters refuse assembly") {
    GluingProblem gp(0.02);
    GluingParams p = GluingParams::zero(8);
    p.xi = -0.01;
    CHECK_THROWS_AS(gp.build_glued_mesh(p, 1), std::invalid_argument);
    MatchReport failed;
    CHECK_THROWS_AS(gp.build_glued_mesh(matched_002().params, 1, &failed), std::invalid_argument);
}
