#pragma once

#include "minsurf/numerics.hpp"
#include "minsurf/riemann_core.hpp"

#include <functional>
#include <vector>

namespace minsurf {

// Height function over a polar annulus, sampled U(i, k) = U(r_i, theta_k) with r uniform and
// theta periodic.
struct AnnulusGraph {
    std::vector<double> r_grid;
    std::vector<double> theta_grid;
    Grid2 U;

    double r_inner() const { return r_grid.front(); }
    double r_outer() const { return r_grid.back(); }
};

AnnulusGraph make_annulus_graph(double r_in, double r_out, int n_r, int n_theta,
                                const std::function<double(double, double)>& u);

// sup over the interior of |f|, |r f_r|, |f_theta| (order >= 1) and the second derivatives in the
// same frame (order >= 2).
double cb_norm(const AnnulusGraph& g, const Grid2& f, int order);

// |x|^4 div(grad u / (1 + |x|^4 |grad u|^2)^{1/2}) in the inverted planar-end chart. Rows within
// two nodes of the radial boundary are zero.
Grid2 planar_residual(const AnnulusGraph& graph);

// Mean curvature (average of principal curvatures, upward normal) of the vertical graph.
Grid2 graph_mean_curvature(const AnnulusGraph& graph);

// Mean curvature of a sampled parametrised surface with the normal oriented along `ref`.
Grid2 oriented_mean_curvature(const std::vector<double>& u_grid, const std::vector<double>& v_grid, bool v_periodic,
                              const VGrid2& X, const VGrid2& ref);

// Normal graph X_c + w N_c over the catenoid band s_grid x [0, 2 pi).
struct CatenoidExpansion {
    std::vector<double> s_grid, theta_grid;
    Grid2 full;       // sum of principal curvatures, normal n with n . N_c > 0
    Grid2 linear;     // cosh^{-2} s (d_s^2 + d_theta^2 + 2 cosh^{-2} s) w
    Grid2 remainder;  // full - linear
    Grid2 E, F, G;    // first fundamental form of X_c + w N_c
};

CatenoidExpansion catenoid_graph_expansion(const std::vector<double>& s_grid, int n_theta, const Grid2& w,
                                           double tubular_bound = 1.0);

// Quotient |N(w2) - N(w1)|_{C^0} / (max_i |v_i|_{C^2} |v2 - v1|_{C^2}) on the band (s, s + 1), where
// w_i = cosh(s) v_i and N(w) = cosh^2 s * remainder(w) = Q_2 + cosh s Q_3.
double lipschitz_probe(double s_band, const std::function<double(double, double)>& v1,
                       const std::function<double(double, double)>& v2, int n_s = 33, int n_theta = 64);

enum class NeckSide { Up, Down };

// Circle intersection of the profile's horizontal slice with a ray, for the chart
// (r cos th, r sin th) = (vs + (1+g)(c + R cos psi), (1+g) R sin psi).
struct NeckChartPoint {
    double t = 0.0;
    double psi = 0.0;
    double t_r = 0.0;      // dt/dr at fixed theta
    double t_theta = 0.0;  // dt/dtheta at fixed r
};

NeckChartPoint neck_chart_root(const ProfileEval& prof, double r, double theta, NeckSide side, double gamma = 0.0,
                               double varsigma = 0.0);

struct NeckGraph {
    AnnulusGraph graph;
    Grid2 deviation;  // U - (closed-form expansion) without its O(eps) term
    double sup_deviation = 0.0;
    double cb_deviation = 0.0;  // C^2_b norm of the deviation in the (r d_r, d_theta) frame
};

// Vertical graph of the dilated and translated Riemann piece at height ~ -+ (1/2) log eps over
// r in [r_in, r_out] (defaults: the annulus eps^{-1/2}/4 .. 4 eps^{-1/2}).
NeckGraph neck_graph(const RiemannProfile& profile, double gamma, double sigma, double varsigma, NeckSide side,
                     int n_r = 65, int n_theta = 64, double r_in = -1.0, double r_out = -1.0);

// Tilted catenoid end R_xi X_c + sigma e3 as a vertical graph. R_xi rotates about the x2-axis
// with R_xi e3 = (-sin xi, 0, cos xi), so the tilt contributes + xi r cos(theta).
struct EndGraph {
    AnnulusGraph graph;
    Grid2 deviation;  // U - (sigma + ln 2r + xi r cos) on top, U - (-sigma - ln 2r + xi r cos) below
    double sup_deviation = 0.0;
};

EndGraph chm_end_graph_model(double xi, double sigma, NeckSide side, double r_in, double r_out, int n_r = 65,
                             int n_theta = 64);

// Catenoid point (s, theta_c) whose tilted image projects to (r cos th, r sin th), plus the
// partial derivatives of the height with respect to r and theta.
struct EndChartPoint {
    double s = 0.0;
    double theta_c = 0.0;
    double height = 0.0;
    double height_r = 0.0;
    double height_theta = 0.0;
};

EndChartPoint tilted_catenoid_root(double xi, double r, double theta, NeckSide side);

// Flux of a patch row loop v -> X(u_i, v): integral of the conormal pointing towards increasing u.
Vec3 flux(const ImmersionPatch& patch, int row);

// Flux of a closed polygonal loop with surface normals: sum of tangent x normal over the
// segments. Traversal direction fixes the sign. The loop must close (first == last).
Vec3 flux_loop(const std::vector<Vec3>& points, const std::vector<Vec3>& normals);

struct TransferReport {
    Grid2 factor;      // g(N~, N)
    VGrid2 tangential; // tangential part of N~
    Grid2 residual;    // DH_{N~,0} u - D H_{N,0}(g u) by central differences
    double sup_residual = 0.0;
};

// Transverse field transfer on a patch; interior rows only for the residual.
TransferReport transverse_transfer(const ImmersionPatch& patch, const VGrid2& tilted, const Grid2& u, double step = 1e-4,
                                   int skip = 3);

// sup over interior rows of |H(X + a u N~) - H(X + a g u N)|: the two graphs agree to first order,
// so on a minimal patch this is O(a^2) above the stencil floor.
double transfer_defect(const ImmersionPatch& patch, const VGrid2& tilted, const Grid2& u, double amplitude,
                       int skip = 3);

// Exact catenoid patch X_c on s_grid x [0, 2 pi), normal N_c.
ImmersionPatch catenoid_patch(const std::vector<double>& s_grid, int n_theta);

}  // namespace minsurf
