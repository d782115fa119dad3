#pragma once

// Jacobi operators of the unduloid and the bent torus, and the projected
// inverse of the limit operator.
//
// The limit operator L_a = dtt + dthth + 2 p_a acts on doubly periodic
// fields; theta derivatives are spectral (dense differentiation matrices),
// t derivatives are second-order central differences.  Second order is
// deliberate: the kernel seeds are ODE-accurate, so the discrete Laplacian
// dominates the kernel residual and its observed convergence order is the
// stencil order.
//
// The solver decomposes into theta modes.  In the reflection-symmetric
// class (cos for even j, sin for odd j) the per-mode operators
// dtt + 2p - j^2 are definite for j >= 2; the j = 0 and j = 1 lines carry
// the one-dimensional kernel seeds w0 and w1 and are solved through a
// bordered saddle system that pins the solution orthogonal to the seed
// while absorbing any seed content of the right-hand side into the
// multiplier.  Every solved line is symmetrized in t: the periodic j = 0
// operator has the odd kernel x'/x, and parity projection removes the
// round-off it would otherwise amplify.

#include <tori/geometry.hpp>
#include <tori/profile.hpp>
#include <tori/symfield.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

namespace tori {

// spectral differentiation matrices on the equispaced circle
struct ThetaDerivs {
    Eigen::MatrixXd D1, D2;
};

inline ThetaDerivs make_theta_derivs(int N) {
    ThetaDerivs out;
    out.D1 = Eigen::MatrixXd::Zero(N, N);
    out.D2 = Eigen::MatrixXd::Zero(N, N);
    const double twopi = 2.0 * std::numbers::pi;
    for (int p = 0; p < N; ++p)
        for (int q = 0; q < N; ++q) {
            const int r = p - q;
            double d1 = 0.0, d2 = 0.0;
            for (int m = 1; m <= N / 2 - 1; ++m) {
                d1 -= 2.0 * m * std::sin(twopi * m * r / N);
                d2 -= 2.0 * m * m * std::cos(twopi * m * r / N);
            }
            // Nyquist cosine mode contributes to the second derivative only
            d2 -= (N / 2) * (N / 2) * (r % 2 == 0 ? 1.0 : -1.0);
            out.D1(p, q) = d1 / N;
            out.D2(p, q) = d2 / N;
        }
    return out;
}

struct KernelPair {
    SymField w0_field, w1_field;
    Eigen::Matrix2d gram;
    double dt = 0.0, dtheta = 0.0;
};

inline KernelPair make_kernel_pair(const ProfileTable& tbl, int N_theta) {
    KernelPair ker;
    ker.dt = tbl.dt();
    ker.dtheta = 2.0 * std::numbers::pi / N_theta;
    ker.w0_field = SymField(tbl.N_t, N_theta);
    ker.w1_field = SymField(tbl.N_t, N_theta);
    for (int i = 0; i < tbl.N_t; ++i)
        for (int j = 0; j < N_theta; ++j) {
            const double th = -std::numbers::pi + j * ker.dtheta;
            ker.w0_field(i, j) = tbl.w0[i];
            ker.w1_field(i, j) = tbl.w1[i] * std::sin(th);
        }
    ker.w0_field.even_t = ker.w0_field.theta_mirror = true;
    ker.w1_field.even_t = ker.w1_field.theta_mirror = true;
    ker.gram(0, 0) = inner_l2(ker.w0_field, ker.w0_field, ker.dt, ker.dtheta);
    ker.gram(1, 1) = inner_l2(ker.w1_field, ker.w1_field, ker.dt, ker.dtheta);
    ker.gram(0, 1) = ker.gram(1, 0) = inner_l2(ker.w0_field, ker.w1_field, ker.dt, ker.dtheta);
    return ker;
}

struct ProjectionResult {
    double coeff0, coeff1;
    SymField remainder;
};

inline ProjectionResult project_kernel(const SymField& f, const KernelPair& ker) {
    if (!f.same_shape(ker.w0_field)) throw std::invalid_argument("project_kernel: shape mismatch");
    Eigen::Vector2d rhs{inner_l2(f, ker.w0_field, ker.dt, ker.dtheta),
                        inner_l2(f, ker.w1_field, ker.dt, ker.dtheta)};
    Eigen::Vector2d c = ker.gram.ldlt().solve(rhs);
    ProjectionResult out{c[0], c[1], f};
    for (size_t m = 0; m < f.v.size(); ++m)
        out.remainder.v[m] -= c[0] * ker.w0_field.v[m] + c[1] * ker.w1_field.v[m];
    return out;
}

// L_a f = f_tt + f_thth + 2 p f on periodic fields
inline SymField apply_limit(const SymField& f, const ProfileTable& tbl) {
    if (f.N_t != tbl.N_t) throw std::invalid_argument("apply_limit: field/table mismatch");
    const double dt = tbl.dt();
    SymField out = diff2_t(f, dt, 2);
    const ThetaDerivs th = make_theta_derivs(f.N_theta);
    for (int i = 0; i < f.N_t; ++i) {
        const double x2 = tbl.x[i] * tbl.x[i];
        const double p = x2 + tbl.gamma_a * tbl.gamma_a / x2;
        for (int j = 0; j < f.N_theta; ++j) {
            double dqq = 0.0;
            for (int m = 0; m < f.N_theta; ++m) dqq += th.D2(j, m) * f(i, m);
            out(i, j) += dqq + 2.0 * p * f(i, j);
        }
    }
    return out;
}

// sup residual of the even kernel seed under the discrete limit operator;
// the seam rows use the integrated ghost samples beyond +-tau since w0 is
// not periodic
inline double kernel_residual_w0(const ProfileTable& tbl) {
    const int n = tbl.N_t;
    const double dt = tbl.dt();
    auto w0ext = [&](int k) {
        if (k >= 0 && k <= n) return tbl.w0[k];
        // w0(-tau - s) = w0(tau + s), so both overhangs read the ghosts
        const int over = k < 0 ? -k : k - n;
        return tbl.w0_ghost[over - 1];
    };
    double worst = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double x2 = tbl.x[i] * tbl.x[i];
        const double p = x2 + tbl.gamma_a * tbl.gamma_a / x2;
        const double r =
            (w0ext(i - 1) - 2.0 * tbl.w0[i] + w0ext(i + 1)) / (dt * dt) + 2.0 * p * tbl.w0[i];
        worst = std::max(worst, std::abs(r));
    }
    return worst;
}

// idem for the odd-theta seed as the coefficient of sin(theta); w1 is
// periodic so the plain wrap applies
inline double kernel_residual_w1(const ProfileTable& tbl) {
    const int n = tbl.N_t;
    const double dt = tbl.dt();
    auto w1w = [&](int k) { return tbl.w1[SymField::wrap(k, n)]; };
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x2 = tbl.x[i] * tbl.x[i];
        const double p = x2 + tbl.gamma_a * tbl.gamma_a / x2;
        const double r = (w1w(i - 1) - 2.0 * tbl.w1[i] + w1w(i + 1)) / (dt * dt) +
                         (2.0 * p - 1.0) * tbl.w1[i];
        worst = std::max(worst, std::abs(r));
    }
    return worst;
}

// the same sin(theta) line carries a second exact eigenfunction next to the
// kernel: u = x - gamma/x satisfies u'' + (2p - 1)u = -4*gamma*u (combine
// x'' = (1-2*gamma)x - 2x^3 with z' = gamma + x^2). Its eigenvalue vanishes
// linearly in the neck size, so the projected inverse amplifies sources
// along u by 1/(4*gamma); anything iterating on top of the solver inherits
// that amplification.
inline std::vector<double> second_eigenfunction(const ProfileTable& tbl) {
    std::vector<double> u(tbl.x.size());
    for (size_t i = 0; i < u.size(); ++i) u[i] = tbl.x[i] - tbl.gamma_a / tbl.x[i];
    return u;
}

inline double second_eigen_residual(const ProfileTable& tbl) {
    const int n = tbl.N_t;
    const double dt = tbl.dt();
    const std::vector<double> u = second_eigenfunction(tbl);
    auto uw = [&](int k) { return u[SymField::wrap(k, n)]; };
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x2 = tbl.x[i] * tbl.x[i];
        const double p = x2 + tbl.gamma_a * tbl.gamma_a / x2;
        const double r = (uw(i - 1) - 2.0 * u[i] + uw(i + 1)) / (dt * dt) +
                         (2.0 * p - 1.0) * u[i] + 4.0 * tbl.gamma_a * u[i];
        worst = std::max(worst, std::abs(r));
    }
    return worst;
}

struct JacobiCoeffs {
    SymField b, c, d, e;
    std::vector<double> p;
};

// closed-form coefficients of the full linearized operator
//   b f_tt + f_thth + c f + d f_t + e f_th
inline JacobiCoeffs assemble_full(const TorusGrid& grid, const SurfaceJet& jet) {
    const ProfileTable& tbl = *grid.tbl;
    if (jet.N_t != tbl.N_t || jet.N_theta != grid.N_theta)
        throw std::invalid_argument("assemble_full: grid/jet mismatch");
    JacobiCoeffs out;
    out.b = SymField(jet.N_t, jet.N_theta);
    out.c = SymField(jet.N_t, jet.N_theta);
    out.d = SymField(jet.N_t, jet.N_theta);
    out.e = SymField(jet.N_t, jet.N_theta);
    out.p.resize(jet.N_t);
    for (int i = 0; i < jet.N_t; ++i) {
        const double x = tbl.x[i], x2 = x * x;
        out.p[i] = x2 + tbl.gamma_a * tbl.gamma_a / x2;
        for (int j = 0; j < jet.N_theta; ++j) {
            const PointJet& pt = jet.at(i, j);
            const Vec3 Xsec = pt.Xtt / pt.EE + pt.Xthth / pt.GG;
            const Vec3 Avec = (pt.Xt.cross(pt.Nth) + pt.Nt.cross(pt.Xth)) / pt.areaElem +
                              pt.Nvec * Xsec.dot(pt.Nvec);
            out.b(i, j) = x2 / pt.EE;
            out.d(i, j) = -x2 * Xsec.dot(pt.Xt) / pt.EE;
            out.e(i, j) = -x2 * Xsec.dot(pt.Xth) / pt.GG;
            const double q =
                0.5 * (Xsec.dot(Avec) - pt.Nth.squaredNorm() / pt.GG -
                       pt.Nt.squaredNorm() / pt.EE + 2.0 * pt.LL * pt.LL / (pt.EE * pt.EE) +
                       2.0 * pt.NN * pt.NN / (pt.GG * pt.GG) +
                       4.0 * pt.MM * pt.MM / (pt.EE * pt.GG));
            out.c(i, j) = 2.0 * x2 * q;
        }
    }
    measure_flags(out.b);
    measure_flags(out.c);
    measure_flags(out.d);
    measure_flags(out.e);
    return out;
}

inline SymField apply_full(const JacobiCoeffs& co, const SymField& f, const ProfileTable& tbl) {
    if (!f.same_shape(co.b)) throw std::invalid_argument("apply_full: shape mismatch");
    const double dt = tbl.dt();
    const SymField ft = diff_t(f, dt, 2), ftt = diff2_t(f, dt, 2);
    const ThetaDerivs th = make_theta_derivs(f.N_theta);
    SymField out(f.N_t, f.N_theta);
    for (int i = 0; i < f.N_t; ++i)
        for (int j = 0; j < f.N_theta; ++j) {
            double dq = 0.0, dqq = 0.0;
            for (int m = 0; m < f.N_theta; ++m) {
                dq += th.D1(j, m) * f(i, m);
                dqq += th.D2(j, m) * f(i, m);
            }
            out(i, j) = co.b(i, j) * ftt(i, j) + dqq + co.c(i, j) * f(i, j) +
                        co.d(i, j) * ft(i, j) + co.e(i, j) * dq;
        }
    return out;
}

// Projected inverse of the limit operator on the reflection-symmetric
// class.  Mode factorizations are cached, so keep one instance alive
// across repeated solves on the same table.
class LimitSolver {
  public:
    LimitSolver(const ProfileTable& tbl, int N_theta)
        : tbl_(&tbl), N_theta_(N_theta), ker_(make_kernel_pair(tbl, N_theta)),
          lu_(static_cast<size_t>(N_theta / 2 + 1)) {
        const int n = tbl.N_t;
        const double dt = tbl.dt();
        D2t_ = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i < n; ++i) {
            D2t_(i, i) = -2.0 / (dt * dt);
            D2t_(i, SymField::wrap(i + 1, n)) += 1.0 / (dt * dt);
            D2t_(i, SymField::wrap(i - 1, n)) += 1.0 / (dt * dt);
        }
    }

    const KernelPair& kernel() const { return ker_; }

    SymField solve(const SymField& f) const {
        const int n = tbl_->N_t, N = N_theta_;
        if (f.N_t != n || f.N_theta != N)
            throw std::invalid_argument("solve_projected: field/solver mismatch");
        check_class(f);
        check_solvability(f);

        // analysis: cosine lines for even j, sine lines for odd j
        SymField out(n, N, 0.0);
        Eigen::VectorXd line(n), sol(n);
        for (int j = 0; j <= N / 2; ++j) {
            const bool use_cos = j % 2 == 0;
            if (!use_cos && j == N / 2) continue;
            const double weight = (j == 0 || j == N / 2) ? 1.0 / N : 2.0 / N;
            for (int i = 0; i < n; ++i) {
                double s = 0.0;
                for (int m = 0; m < N; ++m) {
                    const double th = -std::numbers::pi + m * 2.0 * std::numbers::pi / N;
                    s += f(i, m) * (use_cos ? std::cos(j * th) : std::sin(j * th));
                }
                line[i] = weight * s;
            }
            solve_line(j, line, sol);
            // symmetrize in t: the periodic line operators carry odd
            // near-kernels that amplify round-off
            for (int i = 0; i < n; ++i) {
                const double even = 0.5 * (sol[i] + sol[SymField::wrap(n - i, n)]);
                line[i] = even;
            }
            for (int i = 0; i < n; ++i)
                for (int m = 0; m < N; ++m) {
                    const double th = -std::numbers::pi + m * 2.0 * std::numbers::pi / N;
                    out(i, m) += line[i] * (use_cos ? std::cos(j * th) : std::sin(j * th));
                }
        }

        // kill residual kernel content from round-off
        ProjectionResult pr = project_kernel(out, ker_);
        pr.remainder.even_t = pr.remainder.theta_mirror = true;
        return pr.remainder;
    }

  private:
    void check_class(const SymField& f) const {
        const double scale = 1e-9 * (1.0 + sup_norm(f));
        if (deviation_even_t(f) > scale || deviation_theta_mirror(f) > scale)
            throw std::invalid_argument(
                "solve_projected: input leaves the reflection-symmetric class");
    }

    void check_solvability(const SymField& f) const {
        // loose screen only; the bordered multipliers absorb what remains
        const double nf = norm_l2(f, ker_.dt, ker_.dtheta);
        const double c0 = inner_l2(f, ker_.w0_field, ker_.dt, ker_.dtheta) /
                          std::sqrt(ker_.gram(0, 0));
        const double c1 = inner_l2(f, ker_.w1_field, ker_.dt, ker_.dtheta) /
                          std::sqrt(ker_.gram(1, 1));
        if (std::abs(c0) > 1e-2 * (nf + 1e-300) || std::abs(c1) > 1e-2 * (nf + 1e-300))
            throw std::invalid_argument("solve_projected: right-hand side carries kernel content");
    }

    void solve_line(int j, const Eigen::VectorXd& rhs, Eigen::VectorXd& sol) const {
        const int n = tbl_->N_t;
        if (j >= 2) {
            if (!lu_[j]) {
                Eigen::MatrixXd A = D2t_;
                for (int i = 0; i < n; ++i) A(i, i) += 2.0 * pval(i) - double(j) * j;
                lu_[j] = std::make_unique<Eigen::PartialPivLU<Eigen::MatrixXd>>(A);
            }
            sol = lu_[j]->solve(rhs);
            return;
        }
        // bordered saddle for the kernel-carrying lines
        if (!lu_[j]) {
            Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n + 1, n + 1);
            A.topLeftCorner(n, n) = D2t_;
            for (int i = 0; i < n; ++i) {
                A(i, i) += 2.0 * pval(i) - double(j) * j;
                const double w = j == 0 ? tbl_->w0[i] : tbl_->w1[i];
                A(i, n) = w;
                A(n, i) = w;
            }
            lu_[j] = std::make_unique<Eigen::PartialPivLU<Eigen::MatrixXd>>(A);
        }
        Eigen::VectorXd ext(n + 1);
        ext.head(n) = rhs;
        ext[n] = 0.0;
        Eigen::VectorXd full = lu_[j]->solve(ext);
        sol = full.head(n);
    }

    double pval(int i) const {
        const double x2 = tbl_->x[i] * tbl_->x[i];
        return x2 + tbl_->gamma_a * tbl_->gamma_a / x2;
    }

    const ProfileTable* tbl_;
    int N_theta_;
    KernelPair ker_;
    Eigen::MatrixXd D2t_;
    mutable std::vector<std::unique_ptr<Eigen::PartialPivLU<Eigen::MatrixXd>>> lu_;
};

inline SymField solve_projected(const SymField& f, const ProfileTable& tbl) {
    return LimitSolver(tbl, f.N_theta).solve(f);
}

} // namespace tori
