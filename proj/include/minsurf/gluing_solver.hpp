#pragma once

#include "minsurf/graph_models.hpp"
#include "minsurf/jacobi_spectral.hpp"
#include "minsurf/numerics.hpp"
#include "minsurf/riemann_core.hpp"

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace minsurf {

struct GluingConfig {
    int J = 8;                   // cosine modes 0..J
    double mu = -1.5;            // neck weight e^{-mu t}
    double delta = 1.5;          // body weight cosh^{-delta} s
    double dt = 1.0 / 32.0;      // step in t (neck) and s (body)
    int n_y = 128;               // angular samples on the neck and body grids
    double neck_length = 8.0;    // T - t~ on the neck half-cylinder
    double profile_margin = 0.5; // stopping margin of the profile solve
    double kappa = 10.0;         // radius of the parameter ball, in units of eps
    int max_fixed_point = 80;
    double fixed_point_tol = 1e-12;  // relative update size; iteration also stops at the round-off floor
    int max_inner = 40;
    double inner_tol = 1e-12;
    int max_newton = 20;
    double newton_tol = 1e-12;  // Newton target relative to the trace scale; tol.match gates success
    int n_match = 64;  // samples on the matching circle
    Tolerances tol;
};

// Dilation, translation and flux offsets of the two neck halves, the end tilt and the
// boundary functions (cosine coefficients 0..J, entries 0 and 1 unused and zero).
struct GluingParams {
    double gamma_t = 0.0, gamma_b = 0.0;
    double sigma_t = 0.0, sigma_b = 0.0;
    double varsigma_t = 0.0, varsigma_b = 0.0;
    double eta_t = 0.0, eta_b = 0.0;
    double xi = 0.0;
    std::vector<double> phi_t, phi_b, phi_t_tilde, phi_b_tilde;

    static GluingParams zero(int J);
    // eps^{-1/2}|eta| + eps^{1/2}|varsigma| + |log eps|^{-1}|sigma| + |gamma| summed over both
    // sides, plus the sup norms of the four boundary functions.
    double scaled_norm(double epsilon) const;
    // (gamma_t, gamma_b, sigma_t, sigma_b, varsigma_t, varsigma_b, eta_t, eta_b) rescaled.
    Eigen::VectorXd scaled_vector(double epsilon) const;
    void set_scaled_vector(double epsilon, const Eigen::VectorXd& x);
};

struct SolveReport {
    int iterations = 0;
    double contraction_estimate = 0.0;  // max ratio of successive update norms
    double residual_norm = 0.0;         // weighted sup of the projected equation
    double correction_norm = 0.0;       // weighted sup of v
    std::vector<double> update_norms;
    AnnulusGraph trace_top, trace_bottom;
};

// Height of a graph over the horizontal plane and r d_r of it.
struct TracePoint {
    double value = 0.0;
    double r_dr = 0.0;
};

// Geometry of the upper neck half of the Riemann piece at eps + eta, on the half-cylinder
// [t0, T] x [0, y_eps) with t0 just below t~ = -1/2 log eps.
struct NeckContext {
    double epsilon = 0.0;       // gluing parameter
    double epsilon_neck = 0.0;  // eps + eta
    double t_tilde = 0.0;
    double t_cut = 0.0;  // the nonlinear terms are kept for t <= t_cut
    double tau = 1.0;
    RiemannProfile profile;
    ProfileEval prof;
    std::shared_ptr<const ModalOperator> op;
    std::vector<double> t_grid, y_grid;
    int n_geo = 0;  // rows carrying geometry
    int i_cut = 0;  // last row where the nonlinear terms are kept
    VGrid2 base;    // surface points on the geometry rows
    VGrid2 field;   // transverse unit field N~: e3 near t0, -N_eps past t~ + 1.2
    Grid2 conformal;  // 2 sqrt(EG - F^2) of the base, 2 cosh^2 omega on the conformal rows
    Grid2 baseline;   // conformal * H of the unperturbed base
};

struct NeckSolution {
    std::shared_ptr<const NeckContext> ctx;
    NeckSide side = NeckSide::Up;
    std::vector<double> phi;  // boundary data as given (physical angle)
    Modes w, v;               // Poisson extension and correction, cosine modes on ctx->t_grid
    SolveReport report;

    Modes total() const;
    // Trace after dilation by 1 + gamma, horizontal shift varsigma e1 and vertical shift sigma.
    // For the lower half the x2-axis half-turn maps it to an upper half.
    TracePoint trace(double r, double theta, double gamma, double sigma, double varsigma) const;
    // Points of the perturbed half on the geometry rows [i_first, i_last], after the same motion.
    VGrid2 points(int i_first, int i_last, double gamma, double sigma, double varsigma) const;
};

// Tilted catenoid R_xi X_c on [-S, S] x [0, 2 pi) with S ~ t~ + 2. On |s| >= t~ - 0.4 the
// points are the vertical graph over (cosh s cos theta, cosh s sin theta).
struct BodyContext {
    double epsilon = 0.0;
    double xi = 0.0;
    double t_tilde = 0.0;
    std::shared_ptr<const ModalOperator> op;
    std::vector<double> s_grid, theta_grid;
    VGrid2 base, field;
    Grid2 conformal, baseline;
};

struct BodySolution {
    std::shared_ptr<const BodyContext> ctx;
    std::vector<double> phi_top, phi_bottom;
    Modes w, v;
    SolveReport report;

    Modes total() const;
    TracePoint trace(double r, double theta, NeckSide side) const;
    VGrid2 points(int i_first, int i_last) const;
};

// Cauchy-data differences on the circle r = eps^{-1/2}/2.
struct MatchingResidual {
    std::vector<double> theta;
    std::vector<double> c0_top, c0_bottom, c1_top, c1_bottom;  // U - U-bar and r d_r (U - U-bar)
    std::vector<double> m0_top, m0_bottom, m1_top, m1_bottom;  // cosine modes 0..J
    double trace_scale = 0.0;                                  // sup |U| over the circle

    // (c0_t, c1_t, c0_b, c1_b) modes 0 and 1, in that order.
    Eigen::VectorXd low_modes() const;
    double sup_mismatch() const;
    double high_mode_norm() const;  // sup over modes >= 2
};

// Trace of one side as a function of the angle on the matching circle.
using CircleTrace = std::function<TracePoint(double theta)>;

// Differences neck minus body of the four traces on n_match equally spaced angles, projected on
// cosine modes 0..J.
MatchingResidual matching_from_traces(int n_match, int J, const CircleTrace& neck_top, const CircleTrace& body_top,
                                      const CircleTrace& neck_bottom, const CircleTrace& body_bottom);

struct MatchState {
    MatchingResidual residual;
    NeckSolution top, bottom;
    BodySolution body;
    int iterations = 0;
    double contraction = 0.0;  // max ratio of successive high-mode residuals
};

struct MatchReport {
    bool converged = false;
    double c0_mismatch_top = 0.0, c0_mismatch_bottom = 0.0;
    double c1_mismatch_top = 0.0, c1_mismatch_bottom = 0.0;
    std::vector<double> modewise_residuals;  // |m0_t|, |m1_t|, |m0_b|, |m1_b| interleaved by mode
    int newton_iters = 0;
    std::vector<double> residual_history;  // low-mode residual after every accepted step
    std::vector<int> inner_iters;
    double inner_contraction = 0.0;
    double trace_scale = 0.0;
    double glued_max_H = 0.0;  // filled by build_glued_mesh
    double parameter_norm = 0.0;
};

struct Mesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;  // counterclockwise, 0-based
};

struct GluedMesh {
    Mesh mesh;
    Mesh unwelded;  // one period before seam welding; body seam rows follow the neck seam rows
    double max_H_body = 0.0, max_H_neck_top = 0.0, max_H_neck_bottom = 0.0;
    double max_H = 0.0;
    double seam_c0_jump = 0.0, seam_c1_jump = 0.0;  // sup over both seams
    int welded_vertices = 0;
    std::vector<std::pair<int, int>> weld_pairs;  // (neck seam vertex, body seam vertex) in `unwelded`
    int euler_characteristic = 0;                 // of one period
    Vec3 period{0.0, 0.0, 0.0};
    int periods = 1;
    int vertices_per_period = 0;
    std::string summary;
};

class GluingProblem {
public:
    explicit GluingProblem(double epsilon, GluingConfig cfg = {});

    double epsilon() const { return eps_; }
    double t_tilde() const { return t_tilde_; }
    double match_radius() const { return 0.5 / std::sqrt(eps_); }
    const GluingConfig& config() const { return cfg_; }

    std::shared_ptr<const NeckContext> neck_context(double eta);
    std::shared_ptr<const BodyContext> body_context(double xi);

    // Fixed point v = G(L_G v - P_J[M(w_phi + v) - M(0)]) on the neck half-cylinder.
    NeckSolution solve_neck(double eta, const std::vector<double>& phi, NeckSide side);
    NeckSolution solve_neck(std::shared_ptr<const NeckContext> ctx, const std::vector<double>& phi,
                            NeckSide side) const;
    BodySolution solve_body(double xi, const std::vector<double>& phi_t_tilde, const std::vector<double>& phi_b_tilde);

    MatchingResidual assemble_matching(const GluingParams& p, const NeckSolution& top, const NeckSolution& bottom,
                                       const BodySolution& body) const;

    // Solves the modes j >= 2 of the matching system at fixed low parameters and updates the
    // boundary functions in place.
    MatchState inner_stage(GluingParams& p);

    std::pair<GluingParams, MatchReport> match(GluingParams initial);

    GluedMesh build_glued_mesh(const GluingParams& p, int periods, const MatchReport* report = nullptr);

private:
    double eps_;
    double t_tilde_;
    GluingConfig cfg_;
    std::mutex mu_;
    std::map<double, std::shared_ptr<const NeckContext>> necks_;
    std::map<double, std::shared_ptr<const BodyContext>> bodies_;
};

// Graph samples of the traces on annuli: the neck over [r_in, r_out] after the given motion,
// the body over [r_in, r_out] on one end.
AnnulusGraph neck_trace_graph(const NeckSolution& sol, double gamma, double sigma, double varsigma, double r_in,
                              double r_out, int n_r = 9, int n_theta = 64);
AnnulusGraph body_trace_graph(const BodySolution& sol, NeckSide side, double r_in, double r_out, int n_r = 9,
                              int n_theta = 64);

std::shared_ptr<NeckContext> make_neck_context(double epsilon, double eta, const GluingConfig& cfg);
std::shared_ptr<BodyContext> make_body_context(double epsilon, double xi, const GluingConfig& cfg);

// Convenience wrappers over a fresh GluingProblem.
NeckSolution solve_neck(double epsilon, double eta, const std::vector<double>& phi, NeckSide side,
                        const GluingConfig& cfg = {});
BodySolution solve_body(double epsilon, double xi, const std::vector<double>& phi_t_tilde,
                        const std::vector<double>& phi_b_tilde, const GluingConfig& cfg = {});
std::pair<GluingParams, MatchReport> match_cauchy_data(double epsilon, const GluingParams& initial,
                                                       const GluingConfig& cfg = {});

}  // namespace minsurf
