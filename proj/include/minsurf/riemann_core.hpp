#pragma once

#include "minsurf/numerics.hpp"

#include <vector>

namespace minsurf {

// Sampled solution of the profile system (R')^2 + 1 = R^2 + eps^2 R^4, c' = eps R^2
// on a uniform, symmetric time grid.
struct RiemannProfile {
    double epsilon = 0.0;
    std::vector<double> t_grid;
    std::vector<double> R;
    std::vector<double> Rp;
    std::vector<double> c;
    double t_blowup = 0.0;   // from the quadrature formula
    double t_detected = 0.0; // last sample time plus the exact tail of dt = dR/R'
    double ell = 0.0;        // lim (c - R) at the blow-up time
    double R0 = 0.0;
    double max_residual_R = 0.0;
    double max_residual_c = 0.0;

    double t_max() const { return t_grid.back(); }
    double dt() const { return t_grid[1] - t_grid[0]; }
};

// Smooth evaluation of R, R', c between samples (quintic Hermite using the ODE for
// second derivatives).
class ProfileEval {
public:
    ProfileEval() = default;
    explicit ProfileEval(const RiemannProfile& p);

    double R(double t) const { return R_(t); }
    double Rp(double t) const { return R_.deriv(t); }
    double c(double t) const { return c_(t); }
    double epsilon() const { return eps_; }
    double t_max() const { return R_.x_max(); }

private:
    double eps_ = 0.0;
    QuinticHermite R_, c_;
};

double initial_radius(double epsilon);

// Largest root of eps^2 z^4 = z^2 + 1.
double zeta_max(double epsilon);

// Blow-up time via the regularised quadrature of dz / sqrt(1 + z^2 - eps^2 z^4).
double period_t(double epsilon, double quad_tol = 1e-13);

// Remaining time to blow-up starting from radius R: integral of dR / R'.
double blowup_tail(double epsilon, double R);

// Remaining change of c - R from radius R to blow-up.
double shift_tail(double epsilon, double R);

RiemannProfile solve_profile(double epsilon, double margin = 0.5, double dt = 1.0 / 512.0,
                             const Tolerances& tol = {});

// Solutions a(y) (maximal at y = 0) and b(t) = 1/R(t).
struct ABSolution {
    double epsilon = 0.0;
    double a0 = 0.0;
    double y_period = 0.0;      // from the phase quadrature
    double y_period_ode = 0.0;  // from the ODE turning-point detection
    double tau = 0.0;
    std::vector<double> y_grid;  // uniform on [0, y_period], inclusive
    std::vector<double> a;
    std::vector<double> ap;
    std::vector<double> t_grid;  // uniform on [0, t_extent]
    std::vector<double> b;
    std::vector<double> bp;
    double max_residual_a = 0.0;
    double max_residual_b = 0.0;

    double a_at(double y) const;  // periodic, even extension
    double b_at(double t) const;  // even extension
    double bp_at(double t) const;

private:
    friend ABSolution solve_ab(double, int, double, double, const Tolerances&);
    QuinticHermite a_interp_, b_interp_;
};

ABSolution solve_ab(double epsilon, int n_y = 2048, double t_extent = 16.0, double dt = 1.0 / 256.0,
                    const Tolerances& tol = {});

// Conformal coordinates (t, y) on [-T, T] x [0, y_eps) with psi(0, 0) = 0.
struct ConformalFrame {
    double epsilon = 0.0;
    double y_period = 0.0;
    double tau = 0.0;
    std::vector<double> t_grid;
    std::vector<double> y_grid;
    Grid2 psi, psi_t, psi_y, omega, sinh_omega;
    std::vector<double> R, Rp, c;  // profile on t_grid
    Grid2 a;                       // psi_t / cosh(omega): depends on y only
    std::vector<double> b;         // 1/R on t_grid
    double integrability_residual = 0.0;
    double cosh_residual = 0.0;
    double cauchy_riemann_residual = 0.0;
    double a_t_variation = 0.0;

    double ht() const { return t_grid[1] - t_grid[0]; }
    double hy() const { return y_grid[1] - y_grid[0]; }
};

ConformalFrame conformal_frame(const RiemannProfile& profile, int nt, int ny, double t_extent = -1.0,
                               const Tolerances& tol = {});

// Psi at arbitrary (t, y) by integrating the two first-order equations.
double psi_at(const ProfileEval& prof, double t, double y);

struct ImmersionPatch {
    std::vector<double> u_grid, v_grid;
    bool v_periodic = true;
    VGrid2 X, N;
    Grid2 E, F, G, e, f, g, meanH;

    // sup |H| over nodes at least `skip` rows away from the open boundary.
    double max_abs_H(int skip = 2) const;
};

// Fundamental forms by fourth-order finite differences of sampled positions. If N is
// empty the normal Xu x Xv / |Xu x Xv| is used.
ImmersionPatch patch_from_samples(const std::vector<double>& u_grid, const std::vector<double>& v_grid,
                                  bool v_periodic, const VGrid2& X, const VGrid2* N = nullptr);

struct ImmersionReport {
    // From exact derivatives of X through the frame equations.
    double conformal_residual = 0.0;   // max |E - cosh^2 w|, |G - cosh^2 w|, |F| over cosh^2 w
    double second_form_residual = 0.0; // against (w_t, -psi_y, -psi_t), over 1 + psi_y
    double normal_residual = 0.0;      // ||N| - 1| and N . X_t, N . X_y
    // Same conformality check on the finite-difference fundamental forms of the patch.
    double fd_conformal_residual = 0.0;
};

ImmersionPatch immerse(const ConformalFrame& frame, ImmersionReport* report = nullptr,
                       const Tolerances& tol = {});

// (d_t^2 + d_y^2 + 2(a^2 + b^2)) applied to the field by finite differences. Returns the
// residual field; rows within two nodes of the boundary are zero.
Grid2 jacobi_apply(const ConformalFrame& frame, const Grid2& field);
double verify_jacobi_kernel(const ConformalFrame& frame, const Grid2& field);

// Translation-induced fields N.e3 and N.e1 on the frame grid.
Grid2 normal_component(const ConformalFrame& frame, int axis);

}  // namespace minsurf
