#include "minsurf/jacobi_spectral.hpp"

#include <boost/numeric/odeint.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>

namespace odeint = boost::numeric::odeint;

namespace minsurf {

namespace {

// Orthonormal cosine basis value on [0, P).
double basis(int k, double y, double P) {
    if (k == 0) return 1.0 / std::sqrt(P);
    return std::sqrt(2.0 / P) * std::cos(2.0 * kPi * k * y / P);
}

double basis_scale(int k, double P) { return k == 0 ? std::sqrt(P) : std::sqrt(P / 2.0); }

std::vector<double> thomas(std::vector<double> lo, std::vector<double> di, std::vector<double> up,
                           std::vector<double> rhs) {
    const std::size_t n = di.size();
    for (std::size_t i = 1; i < n; ++i) {
        if (di[i - 1] == 0.0) throw NumericalError("solve_modal: singular tridiagonal system");
        const double m = lo[i] / di[i - 1];
        di[i] -= m * up[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    std::vector<double> x(n);
    if (di[n - 1] == 0.0) throw NumericalError("solve_modal: singular tridiagonal system");
    x[n - 1] = rhs[n - 1] / di[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = (rhs[i] - up[i] * x[i + 1]) / di[i];
    return x;
}

std::pair<std::vector<double>, Eigen::MatrixXd> sorted_eigen(const Eigen::MatrixXd& M) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    if (es.info() != Eigen::Success) throw NumericalError("eigen solve failed");
    std::vector<double> lam(es.eigenvalues().data(), es.eigenvalues().data() + M.rows());
    Eigen::MatrixXd V = es.eigenvectors();
    // Fix signs: the largest-magnitude coefficient of each eigenvector is positive.
    for (int c = 0; c < V.cols(); ++c) {
        Eigen::Index r = 0;
        V.col(c).cwiseAbs().maxCoeff(&r);
        if (V(r, c) < 0) V.col(c) *= -1.0;
    }
    return {lam, V};
}

}  // namespace

Eigen::MatrixXd galerkin_matrix(const ABSolution& ab, int n) {
    const double P = ab.y_period;
    const double tau = ab.tau;
    const int nq = std::max(1024, 8 * n);
    std::vector<double> a2(nq);
    for (int q = 0; q < nq; ++q) {
        // frame convention: a_frame(y) = a_ab(y - y_eps/4)
        const double a = ab.a_at(P * q / nq - P / 4.0);
        a2[q] = a * a;
    }
    Eigen::MatrixXd B(nq, n);
    for (int q = 0; q < nq; ++q)
        for (int k = 0; k < n; ++k) B(q, k) = basis(k, P * q / nq, P);
    Eigen::MatrixXd W = B;
    for (int q = 0; q < nq; ++q) W.row(q) *= 2.0 * a2[q] * (P / nq);
    Eigen::MatrixXd M = -(B.transpose() * W);
    for (int k = 0; k < n; ++k) M(k, k) += (k / tau) * (k / tau);
    return 0.5 * (M + M.transpose());
}

double EvenSpectrum::f(int i, double y) const {
    const Eigen::VectorXd& c = coeffs.at(i);
    double s = 0.0;
    for (int k = 0; k < c.size(); ++k) s += c[k] * basis(k, y, y_period);
    return s;
}

EvenSpectrum spectrum_D(const ABSolution& ab, int n_modes, int basis_size, const Tolerances& tol) {
    if (basis_size < 4 * n_modes) throw std::invalid_argument("spectrum_D: basis_size must be at least 4 n_modes");
    EvenSpectrum sp;
    sp.epsilon = ab.epsilon;
    sp.y_period = ab.y_period;
    sp.tau = ab.tau;
    sp.basis_size = basis_size;
    const auto [lam, V] = sorted_eigen(galerkin_matrix(ab, basis_size));
    const auto lam2 = sorted_eigen(galerkin_matrix(ab, 2 * basis_size)).first;
    for (int i = 0; i < n_modes; ++i) {
        sp.lambda.push_back(lam[i]);
        sp.coeffs.push_back(V.col(i));
        sp.doubling_shift = std::max(sp.doubling_shift, std::abs(lam[i] - lam2[i]));
    }
    if (sp.doubling_shift > tol.eig) throw NumericalError("spectrum_D: eigenvalues moved under basis doubling");
    for (int i = 1; i < n_modes; ++i)
        if (!(sp.lambda[i] > sp.lambda[i - 1])) throw NumericalError("spectrum_D: eigenvalues not simple");
    return sp;
}

EvenSpectrum spectrum_D(double epsilon, int n_modes, int basis_size, const Tolerances& tol) {
    return spectrum_D(solve_ab(epsilon), n_modes, basis_size, tol);
}

double ModalField::value(int i, double y) const {
    double s = 0.0;
    for (int j = 0; j <= J(); ++j) s += modes[j][i] * std::cos(j * y / tau);
    return s;
}

double weighted_norm(const Modes& m, const std::vector<double>& t, double weight, int n_y) {
    const int J = static_cast<int>(m.size()) - 1;
    if (n_y <= 0) n_y = 4 * (J + 1);
    double best = 0.0;
    std::vector<double> c(J + 1);
    for (std::size_t i = 0; i < t.size(); ++i) {
        for (int j = 0; j <= J; ++j) c[j] = m[j][i];
        const auto f = cosine_synthesis(c, n_y);
        best = std::max(best, std::exp(-weight * t[i]) * max_abs(f));
    }
    return best;
}

double weighted_norm(const ModalField& f, int n_y) { return weighted_norm(f.modes, f.t_grid, f.weight, n_y); }

std::vector<double> apply_modal(const std::vector<double>& t, const std::vector<double>& q,
                                const std::vector<double>& v) {
    const std::size_t n = t.size();
    const double h = t[1] - t[0];
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (v[i - 1] - 2.0 * v[i] + v[i + 1]) / (h * h) + q[i] * v[i];
    return out;
}

std::vector<double> solve_modal(const std::vector<double>& t, const std::vector<double>& q,
                                const std::vector<double>& g, const ModalBcSpec& bc) {
    const int n = static_cast<int>(t.size());
    if (n < 3 || q.size() != t.size() || g.size() != t.size())
        throw std::invalid_argument("solve_modal: inconsistent grid sizes");
    const double h = t[1] - t[0];
    const double h2 = h * h;
    std::vector<double> v(n, 0.0);
    if (bc.kind == ModalBc::CauchyRight || bc.kind == ModalBc::CauchyAt) {
        if (bc.kind == ModalBc::CauchyRight) {
            // v_{n-1} = v_{n-2} = 0, then march the three-point equation backwards.
            for (int i = n - 2; i >= 1; --i) v[i - 1] = h2 * g[i] - v[i + 1] + (2.0 - h2 * q[i]) * v[i];
        } else {
            const int m = bc.index;
            if (m < 1 || m > n - 2) throw std::invalid_argument("solve_modal: Cauchy node must be interior");
            // v_m = 0 and the centred derivative vanishes: v_{m-1} = v_{m+1}.
            v[m] = 0.0;
            v[m + 1] = v[m - 1] = 0.5 * h2 * g[m];
            for (int i = m + 1; i + 1 < n; ++i) v[i + 1] = h2 * g[i] - v[i - 1] + (2.0 - h2 * q[i]) * v[i];
            for (int i = m - 1; i >= 1; --i) v[i - 1] = h2 * g[i] - v[i + 1] + (2.0 - h2 * q[i]) * v[i];
        }
        for (double x : v)
            if (!std::isfinite(x)) throw NumericalError("solve_modal: marching overflow");
        return v;
    }
    std::vector<double> lo(n, 1.0 / h2), di(n), up(n, 1.0 / h2), rhs(g);
    for (int i = 0; i < n; ++i) di[i] = -2.0 / h2 + q[i];
    lo[0] = 0.0;
    up[n - 1] = 0.0;
    // Left closure.
    if (bc.kind == ModalBc::DirichletBoth || bc.kind == ModalBc::DirichletRobin) {
        di[0] = 1.0;
        up[0] = 0.0;
        rhs[0] = 0.0;
    } else {
        // ghost node from v' = k_left v
        up[0] = 2.0 / h2;
        di[0] = -(2.0 + 2.0 * h * bc.k_left) / h2 + q[0];
    }
    // Right closure.
    if (bc.kind == ModalBc::DirichletBoth) {
        di[n - 1] = 1.0;
        lo[n - 1] = 0.0;
        rhs[n - 1] = 0.0;
    } else {
        lo[n - 1] = 2.0 / h2;
        di[n - 1] = -(2.0 + 2.0 * h * bc.k_right) / h2 + q[n - 1];
    }
    return thomas(lo, di, up, rhs);
}

std::vector<double> modal_solve(const ABSolution& ab, const EvenSpectrum& spec, int i,
                                const std::vector<double>& t, const std::vector<double>& g,
                                const ModalBcSpec& bc) {
    std::vector<double> q(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) {
        const double b = ab.b_at(t[k]);
        q[k] = 2.0 * b * b - spec.lambda.at(i);
    }
    if (bc.kind == ModalBc::DirichletBoth && i >= 2) {
        // Discrete analogue of the uniqueness statement for i >= 2: the operator is negative definite.
        for (double x : q)
            if (x >= 0.0) throw NumericalError("modal_solve: potential not below lambda_i; uniqueness hypothesis fails");
    }
    return solve_modal(t, q, g, bc);
}

std::pair<std::vector<double>, std::vector<double>> fundamental_system(const std::function<double(double)>& q,
                                                                       const std::vector<double>& t_grid) {
    using S2 = std::array<double, 2>;
    auto sys = [&](const S2& x, S2& dx, double t) {
        dx[0] = x[1];
        dx[1] = -q(t) * x[0];
    };
    std::pair<std::vector<double>, std::vector<double>> out;
    for (int which = 0; which < 2; ++which) {
        S2 x = which == 0 ? S2{1.0, 0.0} : S2{0.0, 1.0};
        std::vector<double> vals;
        auto stepper = odeint::make_controlled(1e-13, 1e-13, odeint::runge_kutta_fehlberg78<S2>());
        odeint::integrate_times(stepper, sys, x, t_grid.begin(), t_grid.end(), 1e-3,
                                [&](const S2& s, double) { vals.push_back(s[0]); });
        (which == 0 ? out.first : out.second) = vals;
    }
    return out;
}

ModalOperator ModalOperator::neck(const ABSolution& ab, int J, std::vector<double> t_grid) {
    ModalOperator op;
    op.J_ = J;
    op.tau_ = ab.tau;
    op.t_ = std::move(t_grid);
    op.pot_.resize(op.t_.size());
    for (std::size_t i = 0; i < op.t_.size(); ++i) {
        const double b = ab.b_at(op.t_[i]);
        op.pot_[i] = 2.0 * b * b;
    }
    const auto [lam, V] = sorted_eigen(galerkin_matrix(ab, J + 1));
    op.lambda_ = lam;
    Eigen::VectorXd S(J + 1);
    for (int k = 0; k <= J; ++k) S[k] = basis_scale(k, ab.y_period);
    op.to_eig_ = V.transpose() * S.asDiagonal();
    op.from_eig_ = S.cwiseInverse().asDiagonal() * V;
    return op;
}

ModalOperator ModalOperator::body(int J, std::vector<double> s_grid) {
    ModalOperator op;
    op.J_ = J;
    op.body_ = true;
    op.tau_ = 1.0;
    op.t_ = std::move(s_grid);
    op.pot_.resize(op.t_.size());
    int c = 0;
    for (std::size_t i = 0; i < op.t_.size(); ++i) {
        const double ch = std::cosh(op.t_[i]);
        op.pot_[i] = 2.0 / (ch * ch);
        if (std::abs(op.t_[i]) < std::abs(op.t_[c])) c = static_cast<int>(i);
    }
    if (std::abs(op.t_[c]) > 1e-12) throw std::invalid_argument("ModalOperator::body: grid must contain s = 0");
    op.center_ = c;
    for (int j = 0; j <= J; ++j) op.lambda_.push_back(double(j * j));
    op.to_eig_ = Eigen::MatrixXd::Identity(J + 1, J + 1);
    op.from_eig_ = op.to_eig_;
    return op;
}

Modes ModalOperator::to_eigen(const Modes& c) const {
    const std::size_t n = t_.size();
    Modes e(J_ + 1, std::vector<double>(n));
    Eigen::VectorXd x(J_ + 1);
    for (std::size_t i = 0; i < n; ++i) {
        for (int j = 0; j <= J_; ++j) x[j] = c[j][i];
        const Eigen::VectorXd y = to_eig_ * x;
        for (int j = 0; j <= J_; ++j) e[j][i] = y[j];
    }
    return e;
}

Modes ModalOperator::from_eigen(const Modes& e) const {
    const std::size_t n = t_.size();
    Modes c(J_ + 1, std::vector<double>(n));
    Eigen::VectorXd x(J_ + 1);
    for (std::size_t i = 0; i < n; ++i) {
        for (int j = 0; j <= J_; ++j) x[j] = e[j][i];
        const Eigen::VectorXd y = from_eig_ * x;
        for (int j = 0; j <= J_; ++j) c[j][i] = y[j];
    }
    return c;
}

Modes ModalOperator::apply(const Modes& v) const {
    Modes e = to_eigen(v);
    std::vector<double> q(t_.size());
    for (int j = 0; j <= J_; ++j) {
        for (std::size_t i = 0; i < t_.size(); ++i) q[i] = pot_[i] - lambda_[j];
        e[j] = apply_modal(t_, q, e[j]);
    }
    return from_eigen(e);
}

Modes ModalOperator::solve(const Modes& g) const {
    Modes e = to_eigen(g);
    const std::size_t n = t_.size();
    std::vector<double> q(n);
    for (int j = 0; j <= J_; ++j) {
        for (std::size_t i = 0; i < n; ++i) q[i] = pot_[i] - lambda_[j];
        ModalBcSpec bc;
        if (j >= 2) {
            if (body_) {
                bc.kind = ModalBc::RobinBoth;
                bc.k_left = std::sqrt(lambda_[j] - pot_.front());
                bc.k_right = std::sqrt(lambda_[j] - pot_.back());
            } else {
                bc.kind = ModalBc::DirichletRobin;
                const double k2 = lambda_[j] - pot_.back();
                if (k2 <= 0.0) throw NumericalError("right inverse: mode does not decay at the truncation");
                bc.k_right = std::sqrt(k2);
            }
        } else if (body_) {
            bc.kind = ModalBc::CauchyAt;
            bc.index = center_;
        } else {
            bc.kind = ModalBc::CauchyRight;
        }
        e[j] = solve_modal(t_, q, e[j], bc);
    }
    return from_eigen(e);
}

RightInverseResult right_inverse(const ABSolution& ab, double t0, double mu, const ModalField& g, double bound_cap) {
    if (!(mu > -2.0 && mu < -1.0)) throw std::invalid_argument("right_inverse: mu must lie in (-2, -1)");
    if (g.t_grid.empty() || std::abs(g.t_grid.front() - t0) > 1e-12)
        throw std::invalid_argument("right_inverse: rhs grid must start at t0");
    const ModalOperator op = ModalOperator::neck(ab, g.J(), g.t_grid);
    RightInverseResult r;
    r.v.t0 = t0;
    r.v.t_grid = g.t_grid;
    r.v.weight = mu;
    r.v.tau = ab.tau;
    r.v.modes = op.solve(g.modes);
    const double gn = weighted_norm(g);
    const double vn = weighted_norm(r.v);
    r.norm_ratio = gn > 0 ? vn / gn : 0.0;
    Modes Lv = op.apply(r.v.modes);
    for (int j = 0; j <= g.J(); ++j)
        for (std::size_t i = 0; i < g.t_grid.size(); ++i) {
            const bool boundary = (i == 0 || i + 1 == g.t_grid.size());
            Lv[j][i] = boundary ? 0.0 : Lv[j][i] - g.modes[j][i];
        }
    r.residual = gn > 0 ? weighted_norm(Lv, g.t_grid, mu) / gn : weighted_norm(Lv, g.t_grid, mu);
    const Modes e = op.to_eigen(r.v.modes);
    for (int j = 2; j <= g.J(); ++j) r.trace_complement = std::max(r.trace_complement, std::abs(e[j][0]));
    if (r.norm_ratio > bound_cap) throw NumericalError("right_inverse: norm ratio above bound cap");
    return r;
}

ModalField poisson_extend(const std::vector<double>& phi, const std::vector<double>& t_grid, double tol) {
    double nrm = 0.0;
    for (double c : phi) nrm = std::max(nrm, std::abs(c));
    if (phi.size() < 2) throw std::invalid_argument("poisson_extend: need modes 0 and 1");
    if (std::abs(phi[0]) > tol * std::max(1.0, nrm) || std::abs(phi[1]) > tol * std::max(1.0, nrm))
        throw std::invalid_argument("poisson_extend: data must be orthogonal to 1 and cos(theta)");
    ModalField w;
    w.t0 = t_grid.front();
    w.t_grid = t_grid;
    w.weight = -2.0;
    w.tau = 1.0;
    w.modes.assign(phi.size(), std::vector<double>(t_grid.size(), 0.0));
    for (std::size_t j = 2; j < phi.size(); ++j)
        for (std::size_t i = 0; i < t_grid.size(); ++i) w.modes[j][i] = phi[j] * std::exp(-double(j) * t_grid[i]);
    return w;
}

JacobiField jacobi_field(JacobiKind kind, CatenoidEnd end, double scale) { return JacobiField{kind, end, scale}; }

double JacobiField::value(double s, double theta) const {
    const double sg = (end == CatenoidEnd::Top ? 1.0 : -1.0) * scale;
    switch (kind) {
        case JacobiKind::Phi0Plus: return -sg * std::tanh(s);
        case JacobiKind::Phi0Minus: return sg * (1.0 - s * std::tanh(s));
        case JacobiKind::Phi1Plus: return sg * std::cos(theta) / std::cosh(s);
        case JacobiKind::Phi1Minus: return sg * (s / std::cosh(s) + std::sinh(s)) * std::cos(theta);
    }
    return 0.0;
}

double JacobiField::ds(double s, double theta) const {
    const double sg = (end == CatenoidEnd::Top ? 1.0 : -1.0) * scale;
    const double ch = std::cosh(s), th = std::tanh(s);
    switch (kind) {
        case JacobiKind::Phi0Plus: return -sg / (ch * ch);
        case JacobiKind::Phi0Minus: return sg * (-th - s / (ch * ch));
        case JacobiKind::Phi1Plus: return -sg * std::cos(theta) * th / ch;
        case JacobiKind::Phi1Minus: return sg * (1.0 / ch - s * th / ch + ch) * std::cos(theta);
    }
    return 0.0;
}

double jacobi_residual(const JacobiField& f, double s, double theta, double h) {
    const double fss = (f.value(s + h, theta) - 2.0 * f.value(s, theta) + f.value(s - h, theta)) / (h * h);
    const double ftt = (f.value(s, theta + h) - 2.0 * f.value(s, theta) + f.value(s, theta - h)) / (h * h);
    const double ch = std::cosh(s);
    return fss + ftt + 2.0 / (ch * ch) * f.value(s, theta);
}

double pairing_W(const JacobiField& a, const JacobiField& b, double s1, double s2, double tol, int n_theta) {
    auto w = [&](double s) {
        double sum = 0.0;
        for (int k = 0; k < n_theta; ++k) {
            const double th = 2.0 * kPi * k / n_theta;
            sum += a.value(s, th) * b.ds(s, th) - b.value(s, th) * a.ds(s, th);
        }
        return sum * 2.0 * kPi / n_theta;
    };
    const double w1 = w(s1), w2 = w(s2);
    if (std::abs(w1 - w2) > tol * std::max(1.0, std::abs(w1)))
        throw NumericalError("pairing_W: boundary form depends on the window (input not Jacobi)");
    return w1;
}

InjectivityReport injectivity_margin(const ABSolution& ab, const EvenSpectrum& spec, double t0, double t1, int i_min,
                                     int i_max, int n_t) {
    if (!(spec.epsilon > 0.0 && spec.epsilon < std::sqrt(0.75)))
        throw std::invalid_argument("injectivity_margin: epsilon outside (0, sqrt(3/4))");
    InjectivityReport rep;
    rep.margin = 1e300;
    const auto t = linspace(t0, t1, n_t);
    const double h = t[1] - t[0];
    const int n = n_t - 2;  // interior unknowns
    for (int i = i_min; i <= i_max; ++i) {
        Eigen::VectorXd d(n), e(std::max(n - 1, 0));
        for (int k = 0; k < n; ++k) {
            const double b = ab.b_at(t[k + 1]);
            d[k] = -2.0 / (h * h) + 2.0 * b * b - spec.lambda.at(i);
        }
        for (int k = 0; k + 1 < n; ++k) e[k] = 1.0 / (h * h);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
        es.computeFromTridiagonal(d, e, Eigen::EigenvaluesOnly);
        const double sv = es.eigenvalues().cwiseAbs().minCoeff();
        rep.per_mode.push_back(sv);
        rep.margin = std::min(rep.margin, sv);
    }
    return rep;
}

}  // namespace minsurf
