#pragma once

#include "minsurf/numerics.hpp"
#include "minsurf/riemann_core.hpp"

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace minsurf {

// Modal coefficient curves, indexed [j][i] for cosine mode j and time node i.
using Modes = std::vector<std::vector<double>>;

// Eigenpairs of D = -d^2/dy^2 - 2 a^2 on even y_eps-periodic functions. The frame convention is
// used (a vanishes at y = 0), see ConformalFrame.
struct EvenSpectrum {
    double epsilon = 0.0;
    double y_period = 0.0;
    double tau = 0.0;
    int basis_size = 0;
    std::vector<double> lambda;
    // Coefficients of f_i in the orthonormal basis 1/sqrt(y_eps), sqrt(2/y_eps) cos(k y / tau).
    std::vector<Eigen::VectorXd> coeffs;
    double doubling_shift = 0.0;  // max |lambda_i(N) - lambda_i(2N)|

    double f(int i, double y) const;
};

// Galerkin matrix of D in the orthonormal cosine basis 0..n-1.
Eigen::MatrixXd galerkin_matrix(const ABSolution& ab, int n);

EvenSpectrum spectrum_D(double epsilon, int n_modes, int basis_size, const Tolerances& tol = {});
EvenSpectrum spectrum_D(const ABSolution& ab, int n_modes, int basis_size, const Tolerances& tol = {});

// Function on a half-cylinder as cosine-mode curves c_j(t) of cos(j y / tau).
struct ModalField {
    double t0 = 0.0;
    std::vector<double> t_grid;
    Modes modes;
    double weight = 0.0;  // norm is sup e^{-weight t} |f|
    double tau = 1.0;

    int J() const { return static_cast<int>(modes.size()) - 1; }
    double value(int i, double y) const;
};

// Discrete weighted sup norm, y sampled on n_y points (default 4(J+1)).
double weighted_norm(const ModalField& f, int n_y = 0);
double weighted_norm(const Modes& m, const std::vector<double>& t, double weight, int n_y = 0);

enum class ModalBc {
    DirichletBoth,    // v = 0 at both ends
    DirichletRobin,   // v = 0 at the left end, v' + k_right v = 0 at the right end
    RobinBoth,        // v' - k_left v = 0 at the left, v' + k_right v = 0 at the right
    CauchyRight,      // v = v' = 0 at the right end, marched backwards
    CauchyAt          // v = v' = 0 at node `index`, marched both ways
};

struct ModalBcSpec {
    ModalBc kind = ModalBc::DirichletBoth;
    double k_left = 0.0;
    double k_right = 0.0;
    int index = 0;
};

// Second-order three-point solve of v'' + q v = g on a uniform grid.
std::vector<double> solve_modal(const std::vector<double>& t, const std::vector<double>& q,
                                const std::vector<double>& g, const ModalBcSpec& bc);

// Discrete operator v'' + q v on interior nodes (boundary nodes set to zero).
std::vector<double> apply_modal(const std::vector<double>& t, const std::vector<double>& q,
                                const std::vector<double>& v);

// Modal solve for (d_t^2 + 2 b^2 - lambda_i) v = g on the neck.
std::vector<double> modal_solve(const ABSolution& ab, const EvenSpectrum& spec, int i,
                                const std::vector<double>& t, const std::vector<double>& g,
                                const ModalBcSpec& bc);

// Two solutions of v'' + q(t) v = 0 with Cauchy data (1, 0) and (0, 1) at t_grid[0].
std::pair<std::vector<double>, std::vector<double>> fundamental_system(const std::function<double(double)>& q,
                                                                       const std::vector<double>& t_grid);

// Linear modal operator d_t^2 + 2 b^2(t) + (d_y^2 + 2 a^2) truncated to cosine modes 0..J, with
// the boundary closures of the right inverse. For the body the y-part is d_theta^2 and the
// potential 2/cosh^2 s.
class ModalOperator {
public:
    static ModalOperator neck(const ABSolution& ab, int J, std::vector<double> t_grid);
    static ModalOperator body(int J, std::vector<double> s_grid);

    // Interior-node operator; boundary nodes return zero.
    Modes apply(const Modes& v) const;
    Modes solve(const Modes& g) const;

    // Cosine coefficients to eigen-coordinates and back.
    Modes to_eigen(const Modes& c) const;
    Modes from_eigen(const Modes& e) const;

    int J() const { return J_; }
    const std::vector<double>& t_grid() const { return t_; }
    const std::vector<double>& lambda() const { return lambda_; }
    const std::vector<double>& potential() const { return pot_; }
    double tau() const { return tau_; }
    bool is_body() const { return body_; }

private:
    int J_ = 0;
    bool body_ = false;
    double tau_ = 1.0;
    std::vector<double> t_;
    std::vector<double> pot_;     // 2 b^2 or 2 / cosh^2 s on t_
    std::vector<double> lambda_;  // eigenvalues of the truncated y-operator
    Eigen::MatrixXd to_eig_, from_eig_;
    int center_ = 0;              // node of s = 0 for the body
};

struct RightInverseResult {
    ModalField v;
    double norm_ratio = 0.0;
    double residual = 0.0;        // weighted norm of L v - g on interior nodes
    double trace_complement = 0.0;// |components of v(t0) along f_i, i >= 2|
};

// Right inverse of L_eps on [t0, T], T = t0 + length, with weight mu.
RightInverseResult right_inverse(const ABSolution& ab, double t0, double mu, const ModalField& g,
                                 double bound_cap = 100.0);

// Harmonic extension sum_{j >= 2} phi_j e^{-j t} cos(j theta) sampled on t_grid (t >= 0).
ModalField poisson_extend(const std::vector<double>& phi, const std::vector<double>& t_grid, double tol = 1e-14);

enum class JacobiKind { Phi0Plus, Phi0Minus, Phi1Plus, Phi1Minus };
enum class CatenoidEnd { Top, Bottom };

// Closed-form Jacobi fields of the catenoid in the end variable s >= 0, with the end signs of
// the vertical translation, dilation, horizontal translation and rotation fields.
struct JacobiField {
    JacobiKind kind = JacobiKind::Phi0Plus;
    CatenoidEnd end = CatenoidEnd::Top;
    double scale = 1.0;

    double value(double s, double theta) const;
    double ds(double s, double theta) const;
    int angular_mode() const { return (kind == JacobiKind::Phi1Plus || kind == JacobiKind::Phi1Minus) ? 1 : 0; }
};

JacobiField jacobi_field(JacobiKind kind, CatenoidEnd end = CatenoidEnd::Top, double scale = 1.0);

// (d_s^2 + d_theta^2 + 2/cosh^2 s) applied to the field by finite differences at (s, theta).
double jacobi_residual(const JacobiField& f, double s, double theta, double h = 1e-3);

// Boundary form integral over theta of (a d_s b - b d_s a) at both window ends; throws if
// they differ by more than tol.
double pairing_W(const JacobiField& a, const JacobiField& b, double s1, double s2, double tol = 1e-8,
                 int n_theta = 64);

struct InjectivityReport {
    double margin = 0.0;
    std::vector<double> per_mode;  // smallest singular value per mode
};

// Smallest singular value of the Dirichlet discretisation of L_eps on [t0, t1], modes
// i_min..i_max.
InjectivityReport injectivity_margin(const ABSolution& ab, const EvenSpectrum& spec, double t0, double t1,
                                     int i_min = 2, int i_max = 8, int n_t = 321);

}  // namespace minsurf
