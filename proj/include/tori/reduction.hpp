#pragma once

// Prescribed-curvature residual and the projected fixed point.
//
// The unknown is a normal graph phi over the bent torus.  Each Picard step
// evaluates F(phi) = L_a phi - 2 x^2 [M(X + phi N) - H(X + phi N)] through
// the curvature engine (no hand-coded quadratic remainders), projects out
// the kernel pair, and applies the bordered inverse of the limit operator.
// At the discrete fixed point the scaled residual 2x^2(M - H) lies in the
// span of the kernel fields up to solver round-off; its coefficients are
// the multipliers lambda0, lambda1 that the neck-size matching drives to
// zero.

#include <tori/jacobi.hpp>

#include <functional>
#include <limits>
#include <utility>

namespace tori {

// H(X) = 1 + A |X|^(-gamma) + r(|X|), radial by construction
struct PrescribedCurvature {
    double A = 0.0;
    double gamma = 1.0;
    double floor_radius = 1.0;
    std::function<double(double)> remainder; // optional r(|X|)

    PrescribedCurvature() = default;
    PrescribedCurvature(double A_, double gamma_, double floor_ = 1.0,
                        std::function<double(double)> rem = {})
        : A(A_), gamma(gamma_), floor_radius(floor_), remainder(std::move(rem)) {
        if (!(gamma > 0.0 && gamma < 2.0))
            throw std::invalid_argument("PrescribedCurvature: gamma must lie in (0,2)");
        if (!(floor_radius >= 0.0))
            throw std::invalid_argument("PrescribedCurvature: floor must be nonnegative");
    }
};

inline double eval_H(const PrescribedCurvature& H, const Vec3& X) {
    const double r = X.norm();
    if (r < H.floor_radius) throw std::domain_error("eval_H: radius below the configured floor");
    double v = 1.0 + H.A * std::pow(r, -H.gamma);
    if (H.remainder) v += H.remainder(r);
    return v;
}

// radial form frozen below the floor, for ray integrals that cross the
// small-radius region where the surface never sits
inline double eval_H_capped(const PrescribedCurvature& H, double r) {
    const double rc = std::max(r, H.floor_radius);
    double v = 1.0 + H.A * std::pow(rc, -H.gamma);
    if (H.remainder) v += H.remainder(rc);
    return v;
}

inline Vec3 grad_H(const PrescribedCurvature& H, const Vec3& X) {
    const double r = X.norm();
    if (r < H.floor_radius) throw std::domain_error("grad_H: radius below the configured floor");
    double dr = -H.A * H.gamma * std::pow(r, -H.gamma - 1.0);
    if (H.remainder) {
        const double h = 1e-6 * r;
        dr += (H.remainder(r + h) - H.remainder(r - h)) / (2.0 * h);
    }
    return (dr / r) * X;
}

// pointwise M(Y) - H(Y) on the normal graph Y = X + phi N
inline SymField residual(const TorusGrid& grid, const SymField& phi,
                         const PrescribedCurvature& H) {
    SurfaceJet Y = jet_perturbed(jet_torus(grid), phi);
    SymField M = mean_curvature(Y);
    SymField out(phi.N_t, phi.N_theta);
    for (int i = 0; i < out.N_t; ++i)
        for (int j = 0; j < out.N_theta; ++j) out(i, j) = M(i, j) - eval_H(H, Y.at(i, j).X);
    measure_flags(out, 1e-11);
    return out;
}

// 2 x^2 (M - H) on the graph, against a prebuilt base jet
inline SymField scaled_cmc_residual(const SurfaceJet& base, const ProfileTable& tbl,
                                    const SymField& phi, const PrescribedCurvature& H) {
    SurfaceJet Y = jet_perturbed(base, phi);
    SymField M = mean_curvature(Y);
    SymField out(phi.N_t, phi.N_theta);
    for (int i = 0; i < out.N_t; ++i) {
        const double x2 = tbl.x[i] * tbl.x[i];
        for (int j = 0; j < out.N_theta; ++j)
            out(i, j) = 2.0 * x2 * (M(i, j) - eval_H(H, Y.at(i, j).X));
    }
    measure_flags(out, 1e-11);
    return out;
}

struct IterationRecord {
    int iteration = 0;
    double increment = 0.0;     // weighted norm of the latest update
    double residual_orth = 0.0; // sup of the kernel-orthogonal scaled residual
    double lambda0 = 0.0, lambda1 = 0.0;
    double phi_norm = 0.0;
};

struct ReductionOptions {
    double tol_fp = 1e-10; // measured in the C^2 weighted norm
    int max_iterations = 200;
    int anderson_depth = 0; // 0 is plain Picard, up to 3
    WeightedNormSpec norm_spec{};
    std::function<void(const IterationRecord&)> on_iteration;
};

struct ReductionResult {
    SymField phi;
    double lambda0 = 0.0, lambda1 = 0.0;
    int iterations = 0;
    double residual_orth = 0.0;
    double residual_full = 0.0;
    double phi_norm_weighted = 0.0;
    std::vector<IterationRecord> trace;
};

inline ReductionResult fixed_point(const TorusGrid& grid, const PrescribedCurvature& H,
                                   const ReductionOptions& opts = {}) {
    if (opts.anderson_depth < 0 || opts.anderson_depth > 3)
        throw std::invalid_argument("fixed_point: anderson depth must lie in {0..3}");
    const ProfileTable& tbl = *grid.tbl;
    const SurfaceJet base = jet_torus(grid);
    LimitSolver solver(tbl, grid.N_theta);
    const KernelPair& ker = solver.kernel();

    ReductionResult out;
    out.phi = SymField(tbl.N_t, grid.N_theta, 0.0);
    out.phi.even_t = out.phi.theta_mirror = true;
    SymField& phi = out.phi;

    std::vector<SymField> hist_g, hist_r; // Anderson history of map values and residuals
    double prev_inc = std::numeric_limits<double>::infinity();
    int stall = 0, growth = 0;
    bool done = false;

    for (int k = 1; k <= opts.max_iterations; ++k) {
        SymField G = scaled_cmc_residual(base, tbl, phi, H);
        ProjectionResult pg = project_kernel(G, ker);

        SymField F = apply_limit(phi, tbl);
        for (size_t m = 0; m < F.v.size(); ++m) F.v[m] -= G.v[m];
        SymField rhs = project_kernel(F, ker).remainder;
        rhs.even_t = rhs.theta_mirror = true;
        SymField cand = solver.solve(rhs);

        SymField next = cand;
        if (opts.anderson_depth > 0) {
            SymField res = cand;
            for (size_t m = 0; m < res.v.size(); ++m) res.v[m] -= phi.v[m];
            hist_g.push_back(cand);
            hist_r.push_back(res);
            const size_t cap = static_cast<size_t>(opts.anderson_depth) + 1;
            while (hist_g.size() > cap) {
                hist_g.erase(hist_g.begin());
                hist_r.erase(hist_r.begin());
            }
            const int q = static_cast<int>(hist_g.size());
            if (q >= 2) {
                // minimize |sum alpha_i r_i| subject to sum alpha_i = 1
                Eigen::MatrixXd M = Eigen::MatrixXd::Zero(q + 1, q + 1);
                for (int i = 0; i < q; ++i)
                    for (int j = 0; j < q; ++j) {
                        double s = 0.0;
                        for (size_t m = 0; m < hist_r[i].v.size(); ++m)
                            s += hist_r[i].v[m] * hist_r[j].v[m];
                        M(i, j) = 2.0 * s;
                    }
                for (int i = 0; i < q; ++i) M(i, q) = M(q, i) = 1.0;
                Eigen::VectorXd b = Eigen::VectorXd::Zero(q + 1);
                b[q] = 1.0;
                Eigen::VectorXd alpha = M.fullPivLu().solve(b);
                if (alpha.allFinite()) {
                    next = SymField(phi.N_t, phi.N_theta, 0.0);
                    for (int i = 0; i < q; ++i)
                        for (size_t m = 0; m < next.v.size(); ++m)
                            next.v[m] += alpha[i] * hist_g[i].v[m];
                    next.even_t = next.theta_mirror = true;
                }
            }
        }

        // the normal graph over the reference torus is only a chart while
        // |phi| stays below the profile radius; past that point the surface
        // folds through the axis and the iterate is meaningless
        double chart = 0.0;
        for (int i = 0; i < next.N_t; ++i)
            for (int j = 0; j < next.N_theta; ++j)
                chart = std::max(chart, std::abs(next(i, j)) / tbl.x[i]);
        if (chart >= 0.95)
            throw std::runtime_error(
                "fixed_point: iterate leaves the graph chart (sup|phi|/x >= 0.95)");

        SymField dphi = next;
        for (size_t m = 0; m < dphi.v.size(); ++m) dphi.v[m] -= phi.v[m];
        const double inc = weighted_norm(dphi, tbl, opts.norm_spec, 2);
        const double pn = weighted_norm(next, tbl, opts.norm_spec, 2);

        IterationRecord rec{k, inc, sup_norm(pg.remainder), pg.coeff0, pg.coeff1, pn};
        out.trace.push_back(rec);
        if (opts.on_iteration) opts.on_iteration(rec);

        phi = next;
        phi.even_t = phi.theta_mirror = true;
        out.iterations = k;

        if (inc <= opts.tol_fp) {
            done = true;
            break;
        }
        // round-off floor: accept only a genuine stall just above tol, not
        // slow geometric decay that would still reach tol under the cap
        if (inc <= 1e2 * opts.tol_fp && inc >= 0.9 * prev_inc) {
            if (++stall >= 3) {
                done = true;
                break;
            }
        } else {
            stall = 0;
        }
        if (inc > prev_inc) {
            if (++growth >= 5)
                throw std::runtime_error("fixed_point: increment grew over 5 consecutive steps");
        } else {
            growth = 0;
        }
        prev_inc = inc;
    }
    if (!done) throw std::runtime_error("fixed_point: iteration cap reached without convergence");

    SymField G = scaled_cmc_residual(base, tbl, phi, H);
    ProjectionResult pg = project_kernel(G, ker);
    out.lambda0 = pg.coeff0;
    out.lambda1 = pg.coeff1;
    out.residual_orth = sup_norm(pg.remainder);
    out.residual_full = sup_norm(G);
    out.phi_norm_weighted = weighted_norm(phi, tbl, opts.norm_spec, 2);
    return out;
}

// kernel components of the scaled residual at a given graph
inline std::pair<double, double> multipliers(const TorusGrid& grid, const SymField& phi,
                                             const PrescribedCurvature& H) {
    if (phi.N_theta != grid.N_theta || phi.N_t != grid.tbl->N_t)
        throw std::invalid_argument("multipliers: field/grid mismatch");
    KernelPair ker = make_kernel_pair(*grid.tbl, grid.N_theta);
    SymField G = scaled_cmc_residual(jet_torus(grid), *grid.tbl, phi, H);
    ProjectionResult pg = project_kernel(G, ker);
    return {pg.coeff0, pg.coeff1};
}

} // namespace tori
