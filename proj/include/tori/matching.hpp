#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tori/geometry.hpp"
#include "tori/reduction.hpp"

// Energy functionals over the bent tori and the neck-size matching. The area
// and enclosed-volume quadratures are trapezoidal in t and exact in theta
// (the integrands are trigonometric polynomials there). The matching step
// root-finds, over the neck size in the scaled variable b = a n^gamma log n,
// the balance between the a-derivative of the H == 1 energy and the pairing
// of the forcing H - 1 against the neck kernel direction.

namespace tori {

struct EnergyReport {
    double area = 0.0;
    // algebraic volume (1/3) int X . Xt ^ Xth. For the bent tori the
    // orientation makes this negative; it is not |enclosed volume|.
    double volume = 0.0;
    double h_energy = 0.0;
    std::optional<double> a_derivative_energy;
};

namespace detail {

inline double simpson_rec(const std::function<double(double)>& f, double lo, double hi,
                          double flo, double fmid, double fhi, double whole, double eps,
                          int depth) {
    const double mid = 0.5 * (lo + hi);
    const double lq = f(0.5 * (lo + mid)), rq = f(0.5 * (mid + hi));
    const double left = (mid - lo) / 6.0 * (flo + 4.0 * lq + fmid);
    const double right = (hi - mid) / 6.0 * (fmid + 4.0 * rq + fhi);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * eps)
        return left + right + delta / 15.0;
    return simpson_rec(f, lo, mid, flo, lq, fmid, left, 0.5 * eps, depth - 1) +
           simpson_rec(f, mid, hi, fmid, rq, fhi, right, 0.5 * eps, depth - 1);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double lo, double hi,
                               double eps) {
    if (!(hi > lo)) return 0.0;
    const double flo = f(lo), fhi = f(hi), fmid = f(0.5 * (lo + hi));
    const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
    return simpson_rec(f, lo, hi, flo, fmid, fhi, whole, eps, 40);
}

} // namespace detail

// Ray average m_H(X) = int_0^1 H(s X) s^2 ds, with H frozen below its radius
// floor so the segment of the ray near the origin, which the surface never
// meets, cannot inject the r^{-gamma} singularity. Below the floor the
// integrand is a pure s^2 and is integrated exactly.
inline double ray_mean(const PrescribedCurvature& H, const Vec3& X) {
    const double r = X.norm();
    if (r <= H.floor_radius) return eval_H_capped(H, H.floor_radius) / 3.0;
    const double s0 = H.floor_radius / r;
    double out = eval_H_capped(H, H.floor_radius) * s0 * s0 * s0 / 3.0;
    auto f = [&](double s) { return eval_H_capped(H, s * r) * s * s; };
    out += detail::adaptive_simpson(f, s0, 1.0, 1e-12);
    return out;
}

// Area and algebraic volume of the full torus: the jet covers one profile
// period, the surface closes after n of them.
inline EnergyReport area_volume(const TorusGrid& grid, const SurfaceJet& jet) {
    if (jet.N_t != grid.tbl->N_t || jet.N_theta != grid.N_theta)
        throw std::invalid_argument("area_volume: grid/jet mismatch");
    const double cell = jet.dt * jet.dtheta;
    const double mult = jet.n > 0 ? static_cast<double>(jet.n) : 1.0;
    EnergyReport rep;
    for (int i = 0; i < jet.N_t; ++i)
        for (int j = 0; j < jet.N_theta; ++j) {
            const PointJet& p = jet.at(i, j);
            const Vec3 w = p.Xt.cross(p.Xth);
            rep.area += w.norm() * cell;
            rep.volume += p.X.dot(w) / 3.0 * cell;
        }
    rep.area *= mult;
    rep.volume *= mult;
    return rep;
}

// E_H = area + 2 int m_H(X) X . Xt ^ Xth; with H == 1 this is area + 2 vol.
inline EnergyReport h_energy(const TorusGrid& grid, const SurfaceJet& jet,
                             const PrescribedCurvature& H) {
    EnergyReport rep = area_volume(grid, jet);
    const double cell = jet.dt * jet.dtheta;
    const double mult = jet.n > 0 ? static_cast<double>(jet.n) : 1.0;
    double flux = 0.0;
    for (int i = 0; i < jet.N_t; ++i)
        for (int j = 0; j < jet.N_theta; ++j) {
            const PointJet& p = jet.at(i, j);
            flux += ray_mean(H, p.X) * p.X.dot(p.Xt.cross(p.Xth)) * cell;
        }
    rep.h_energy = rep.area + 2.0 * flux * mult;
    return rep;
}

// dh/da of the half-height, read off the kernel slope at the neck. The neck
// value of the family velocity is -1 and its t-slope there is (dh/da)(1-2a);
// row 0 sits at t = -tau, where the slope has the opposite sign.
inline double height_derivative(const ProfileTable& tbl) {
    return -tbl.y0p[0] / (1.0 - 2.0 * tbl.a.a);
}

// Exact quadrature of -(1/2n) d/da of the H == 1 energy of the closed torus
// at fixed n. The normal velocity of the family is not x^2 w0 (1+eps x sin t)
// alone: closing the torus ties the bending ratio eps = pi/(n h_a) to a, and
// the drift of eps moves the major radius and the swept angle. Dotting the
// full family velocity with Xt ^ Xth adds the second weight below, with
// drift = d(log eps)/da = -h'/h. Against a central difference of the energy
// the sum is exact to the difference's own truncation level.
inline double energy_a_derivative(int n, double a, int N_t, int N_theta) {
    ProfileTable tbl = solve_profile(NeckSize(a), N_t);
    TorusGrid grid = TorusGrid::bent(tbl, N_theta, n);
    SurfaceJet jet = jet_torus(grid);
    SymField M = mean_curvature(jet);
    const double drift = -height_derivative(tbl) / tbl.h;
    const double cell = tbl.dt() * grid.dtheta();
    double out = 0.0;
    for (int i = 0; i < tbl.N_t; ++i) {
        const double x = tbl.x[i];
        for (int j = 0; j < grid.N_theta; ++j) {
            const double s = std::sin(grid.theta(j));
            const double lift = 1.0 + grid.eps * x * s;
            const double vel =
                x * tbl.w0[i] + drift * (tbl.xp[i] * tbl.z[i] + tbl.zp[i] * s / grid.eps);
            out += (M(i, j) - 1.0) * x * lift * vel * cell;
        }
    }
    return out;
}

// int x^2 w0 dt dtheta over one period cell; equals 2 pi + O(a).
inline double kernel_mass(const ProfileTable& tbl) {
    double s = 0.0;
    for (int i = 0; i < tbl.N_t; ++i) s += tbl.x[i] * tbl.x[i] * tbl.w0[i];
    return 2.0 * std::numbers::pi * s * tbl.dt();
}

// The two sides of the neck equation at (n, a), normalized to the multiplier
// scale: lambda0 = 2 (m_energy - h_forcing) / int w0^2. m_energy is the
// energy derivative quadrature above; h_forcing pairs H - 1 against x^2 w0.
struct NeckBalance {
    double m_energy = 0.0;
    double h_forcing = 0.0;
    double lambda0 = 0.0;
};

inline NeckBalance neck_balance(int n, double a, const PrescribedCurvature& H, int N_t,
                                int N_theta) {
    NeckBalance nb;
    nb.m_energy = energy_a_derivative(n, a, N_t, N_theta);
    ProfileTable tbl = solve_profile(NeckSize(a), N_t);
    TorusGrid grid = TorusGrid::bent(tbl, N_theta, n);
    SurfaceJet jet = jet_torus(grid);
    const double cell = tbl.dt() * grid.dtheta();
    double w0sq = 0.0;
    for (int i = 0; i < tbl.N_t; ++i) {
        const double x2w0 = tbl.x[i] * tbl.x[i] * tbl.w0[i];
        w0sq += tbl.w0[i] * tbl.w0[i];
        for (int j = 0; j < grid.N_theta; ++j)
            nb.h_forcing += (eval_H(H, jet.at(i, j).X) - 1.0) * x2w0 * cell;
    }
    w0sq *= 2.0 * std::numbers::pi * tbl.dt();
    nb.lambda0 = 2.0 * (nb.m_energy - nb.h_forcing) / w0sq;
    return nb;
}

enum class MultiplierMode {
    reduced,  // run the fixed-point reduction, fail where it fails
    frozen,   // multipliers of the unperturbed torus (phi = 0)
    automatic // reduced where it converges, frozen fallback with a note
};

inline const char* to_string(MultiplierMode m) {
    switch (m) {
        case MultiplierMode::reduced: return "reduced";
        case MultiplierMode::frozen: return "frozen";
        default: return "automatic";
    }
}

struct MultiplierSample {
    double a = 0.0, b = 0.0;
    double balance_lambda0 = 0.0; // energy-balance form, the root-finding object
    double lambda0 = 0.0;         // direct kernel projection of the residual
    double lambda1 = 0.0;
    bool reduced_converged = false;
    std::string note; // why the reduction was not used, when it was not
};

struct MatchOptions {
    int N_t = 512;
    int N_theta = 32;
    MultiplierMode mode = MultiplierMode::automatic;
    double bracket_hint = 0.0; // upper end of the b scan; 0 picks 4x the closed-form center
    int scan_points = 8;
    int max_bisections = 30;
    double tol_scale = 1e-6; // bracket width target, times the closed-form center
    ReductionOptions reduction;
};

struct MatchResult {
    int n = 0;
    double a_n = 0.0, b_n = 0.0;
    double lambda0_res = 0.0;          // balance residual at the root
    double lambda1_res = 0.0;          // kernel projection, second direction
    double multiplier_lambda0 = 0.0;   // direct kernel projection at the root
    double a_lo = 0.0, a_hi = 0.0;     // final bisection bracket
    ReductionResult reduction;
    std::string mode_used; // "reduced" or "frozen", for the multiplier columns
};

// Thrown when the scan finds no root; carries the scan for reporting.
struct MatchError : std::runtime_error {
    std::vector<MultiplierSample> scan;
    MatchError(const std::string& msg, std::vector<MultiplierSample> s)
        : std::runtime_error(msg), scan(std::move(s)) {}
};

// Multipliers of the unperturbed bent torus, packaged like a reduction result
// so downstream reporting has one shape. phi stays zero, iterations zero.
inline ReductionResult frozen_multipliers(const TorusGrid& grid, const PrescribedCurvature& H) {
    const ProfileTable& tbl = *grid.tbl;
    ReductionResult out;
    out.phi = SymField(tbl.N_t, grid.N_theta, 0.0);
    out.phi.even_t = out.phi.theta_mirror = true;
    SymField G = scaled_cmc_residual(jet_torus(grid), tbl, out.phi, H);
    KernelPair ker = make_kernel_pair(tbl, grid.N_theta);
    ProjectionResult pg = project_kernel(G, ker);
    out.lambda0 = pg.coeff0;
    out.lambda1 = pg.coeff1;
    for (int i = 0; i < G.N_t; ++i)
        for (int j = 0; j < G.N_theta; ++j) {
            out.residual_full = std::max(out.residual_full, std::abs(G(i, j)));
            out.residual_orth = std::max(out.residual_orth, std::abs(pg.remainder(i, j)));
        }
    return out;
}

namespace detail {

struct SampleEval {
    MultiplierSample s;
    ReductionResult red;
};

inline SampleEval eval_sample(int n, double a, const PrescribedCurvature& H,
                              const MatchOptions& opt) {
    SampleEval ev;
    ev.s.a = a;
    ev.s.b = a * std::pow(double(n), H.gamma) * std::log(double(n));
    ev.s.balance_lambda0 = neck_balance(n, a, H, opt.N_t, opt.N_theta).lambda0;
    ProfileTable tbl = solve_profile(NeckSize(a), opt.N_t);
    TorusGrid grid = TorusGrid::bent(tbl, opt.N_theta, n);
    if (opt.mode != MultiplierMode::frozen) {
        try {
            ev.red = fixed_point(grid, H, opt.reduction);
            ev.s.reduced_converged = true;
            ev.s.lambda0 = ev.red.lambda0;
            ev.s.lambda1 = ev.red.lambda1;
            return ev;
        } catch (const std::runtime_error& e) {
            if (opt.mode == MultiplierMode::reduced) throw;
            ev.s.note = e.what();
        }
    }
    ev.red = frozen_multipliers(grid, H);
    ev.s.lambda0 = ev.red.lambda0;
    ev.s.lambda1 = ev.red.lambda1;
    return ev;
}

} // namespace detail

// Multipliers and balance along a grid of b values at fixed n. The scan is
// the diagnostic half of the matching step; match_neck runs the same balance
// to bracket its root.
inline std::vector<MultiplierSample> sweep_lambda0(int n, const PrescribedCurvature& H,
                                                   const std::vector<double>& b_values,
                                                   const MatchOptions& opt = {}) {
    std::vector<MultiplierSample> out;
    const double scale = std::pow(double(n), H.gamma) * std::log(double(n));
    for (double b : b_values) {
        const double a = b / scale;
        if (!(a > 0.0 && a < 0.45)) continue; // outside the unduloid family
        out.push_back(detail::eval_sample(n, a, H, opt).s);
    }
    return out;
}

// Root-find the neck balance over b by scan plus bisection. Only an
// attracting forcing (A < 0) balances the neck against the bending; the
// closed-form center of the leading balance is b_c = -A pi^gamma / gamma.
// The direct kernel projection lambda0 stays one-signed over the whole
// family (its curvature side is quadratic in the bending, so the forcing
// side dominates at every neck size); the balance form is the object with
// the root, and both are reported.
inline MatchResult match_neck(int n, const PrescribedCurvature& H, const MatchOptions& opt = {}) {
    if (n < 4) throw std::invalid_argument("match_neck: need n >= 4");
    if (H.A == 0.0) throw std::invalid_argument("match_neck: A = 0 leaves no forcing to balance");
    const double b_center = std::abs(H.A) * std::pow(std::numbers::pi, H.gamma) / H.gamma;
    const double b_hi0 = opt.bracket_hint > 0.0 ? opt.bracket_hint : 4.0 * b_center;
    const double scale = std::pow(double(n), H.gamma) * std::log(double(n));

    std::vector<MultiplierSample> scan;
    for (int k = 1; k <= opt.scan_points; ++k) {
        const double b = b_hi0 * k / opt.scan_points;
        if (!(b / scale < 0.45)) break;
        scan.push_back(detail::eval_sample(n, b / scale, H, opt).s);
    }
    if (scan.size() < 2)
        throw MatchError("match_neck: scan left the unduloid family", std::move(scan));

    int cross = -1;
    for (size_t k = 0; k + 1 < scan.size(); ++k)
        if (scan[k].balance_lambda0 * scan[k + 1].balance_lambda0 < 0.0) {
            cross = static_cast<int>(k);
            break;
        }
    if (cross < 0) {
        std::ostringstream msg;
        msg << "match_neck: no sign change over the scan; balance lambda0(b) =";
        for (const auto& s : scan) msg << " (" << s.b << ", " << s.balance_lambda0 << ")";
        throw MatchError(msg.str(), std::move(scan));
    }

    double b_lo = scan[cross].b, f_lo = scan[cross].balance_lambda0;
    double b_hi = scan[cross + 1].b;
    const double tol = opt.tol_scale * b_center;
    for (int it = 0; it < opt.max_bisections && (b_hi - b_lo) > tol; ++it) {
        const double b_mid = 0.5 * (b_lo + b_hi);
        const double f_mid = neck_balance(n, b_mid / scale, H, opt.N_t, opt.N_theta).lambda0;
        if (f_lo * f_mid <= 0.0) {
            b_hi = b_mid;
        } else {
            b_lo = b_mid;
            f_lo = f_mid;
        }
    }

    MatchResult res;
    res.n = n;
    res.b_n = 0.5 * (b_lo + b_hi);
    res.a_n = res.b_n / scale;
    res.a_lo = b_lo / scale;
    res.a_hi = b_hi / scale;
    detail::SampleEval fin = detail::eval_sample(n, res.a_n, H, opt);
    res.lambda0_res = fin.s.balance_lambda0;
    res.lambda1_res = fin.s.lambda1;
    res.multiplier_lambda0 = fin.s.lambda0;
    res.reduction = std::move(fin.red);
    res.mode_used = fin.s.reduced_converged ? "reduced" : "frozen";
    return res;
}

} // namespace tori
