#pragma once

// Self-test battery: twelve numbered end-to-end checks that walk the layers
// in dependency order, from the elliptic integrals through the profile ODE,
// the bent geometry, the limit operator and its projected solver, the
// nonlinear reduction, the neck matching, the embedding certificate and the
// energy bookkeeping. Each check returns a pass flag and a one-line
// measurement summary; run_criterion never throws, an escaped exception is
// folded into the outcome.
//
// Two checks probe uniformity windows the operator measurably does not have
// and are expected to fail:
//
//   check 7   asks the projected-solve amplification to be monotone as the
//             neck closes. The axisymmetric line of the limit operator has an
//             eigenvalue crossing near a = 0.0102 (its smallest bordered
//             singular value dips through 0.0094 and recovers), and the
//             direction x - gamma/x is an exact eigenfunction of the first
//             theta lines with eigenvalue -4 gamma -> 0. Both mechanisms put
//             a bump inside any neck sweep that brackets them.
//
//   check 9   asks the second multiplier of the matched tori to vanish to
//             one percent of the balance sweep scale. At the frozen (phi = 0)
//             evaluation that multiplier is a genuine first moment of the
//             forcing; it is resolution-independent (identical at N_t = 512
//             and 1024) and sits at 2 to 14 percent of the sweep scale. Only
//             the solved graph makes it small, and the reduction does not
//             converge at the matched neck sizes (the bending there exceeds
//             the graph chart).
//
// expected_outcome records this so a harness can tell "still the documented
// state" from a regression in either direction.

#include <tori/toolkit.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace tori {

struct CriterionOutcome {
    int id = 0;
    std::string name;
    bool passed = false;
    bool documented_failure = false; // this id is expected to fail, see header
    std::string detail;
    double seconds = 0.0;
};

inline bool expected_outcome(int id) { return id != 7 && id != 9; }

inline const char* criterion_name(int id) {
    static const char* names[] = {"",
                                  "elliptic closed forms",
                                  "profile period and height",
                                  "profile invariants",
                                  "straight mean curvature",
                                  "bending deviation slope",
                                  "kernel residual order",
                                  "projected solver",
                                  "graph decay in the bending",
                                  "matched neck multipliers",
                                  "repelling forcing",
                                  "embedding certificates",
                                  "energy bookkeeping"};
    return (id >= 1 && id <= 12) ? names[id] : "unknown";
}

namespace selftest_detail {

inline std::string g3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

inline double lsq_slope(const std::vector<double>& lx, const std::vector<double>& ly) {
    const double m = static_cast<double>(lx.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

inline double theta_of(int j, int N) {
    return -std::numbers::pi + j * 2.0 * std::numbers::pi / N;
}

// 1: K(0) = E(0) = pi/2, E(1) = 1, and the Legendre relation on random moduli
inline bool check_elliptic(std::ostringstream& out, std::uint64_t seed) {
    using std::numbers::pi;
    double worst_cf = std::abs(ellipK(Modulus::from_k(0.0)) - pi / 2.0);
    worst_cf = std::max(worst_cf, std::abs(ellipE(Modulus::from_k(0.0)) - pi / 2.0));
    worst_cf = std::max(worst_cf, std::abs(ellipE(Modulus::from_k(1.0)) - 1.0));

    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> dist(0.02, 0.98);
    double worst_leg = 0.0;
    for (int m = 0; m < 20; ++m) {
        const double k = dist(gen);
        const Modulus mk(k, 1.0 - k * k);
        const Modulus mc(std::sqrt(1.0 - k * k), k * k);
        const double leg = ellipE(mk) * ellipK(mc) + ellipE(mc) * ellipK(mk) -
                           ellipK(mk) * ellipK(mc);
        worst_leg = std::max(worst_leg, std::abs(leg - pi / 2.0));
    }
    out << "closed-form dev " << g3(worst_cf) << ", Legendre dev " << g3(worst_leg)
        << " over 20 random moduli";
    return worst_cf <= 1e-12 && worst_leg <= 1e-10;
}

// 2: the ODE return time matches 2K and the integrated height matches E
inline bool check_period(std::ostringstream& out, std::uint64_t) {
    using std::numbers::pi;
    double worst_per = 0.0, worst_z = 0.0;
    for (double a : {0.05, 0.1, 0.2, 0.3, 0.4}) {
        const double tau = period_tau(NeckSize(a));
        worst_per = std::max(worst_per, std::abs(detect_period(NeckSize(a)) - tau) / tau);
    }
    for (double a : {0.05, 0.1, 0.2, 0.3, 0.4, 0.5}) {
        ProfileTable tbl = solve_profile(NeckSize(a), 512);
        worst_z = std::max(worst_z, std::abs(tbl.z.back() - tbl.h) / tbl.h);
    }
    const double dev_half = std::abs(height_h(NeckSize(0.5)) - pi / 2.0);
    out << "return-time dev " << g3(worst_per) << ", z(tau) dev " << g3(worst_z)
        << ", h(1/2) - pi/2 = " << g3(dev_half)
        << "; at a = 1/2 the orbit is the equilibrium x = 1/2 and has no return event";
    return worst_per <= 1e-8 && worst_z <= 1e-8 && dev_half <= 1e-12;
}

// 3: conformality, neck/bulge closure, quarter-period value, and the
// first-order invariant of w = z'/x
inline bool check_profile(std::ostringstream& out, std::uint64_t) {
    double conf = 0.0, ends = 0.0, quart = 0.0, wid = 0.0, wmin = 0.0;
    for (double a : {0.05, 0.1, 0.2, 0.3, 0.4, 0.5}) {
        ProfileTable tbl = solve_profile(NeckSize(a), 512);
        const double g = tbl.gamma_a;
        double mn_w = 1e300;
        for (int i = 0; i <= tbl.N_t; ++i) {
            const double x = tbl.x[i], xp = tbl.xp[i], zp = tbl.zp[i];
            conf = std::max(conf, std::abs(xp * xp + zp * zp - x * x));
            const double w = zp / x;
            const double wp = xp * (2.0 * x * x - zp) / (x * x);
            wid = std::max(wid, std::abs(wp * wp - (1.0 - w * w) * (w * w - 4.0 * g)));
            mn_w = std::min(mn_w, w);
        }
        ends = std::max({ends, std::abs(tbl.x[0] - a), std::abs(tbl.x[tbl.N_t] - a),
                         std::abs(tbl.x[tbl.mid()] - (1.0 - a))});
        quart = std::max(quart, std::abs(tbl.x[tbl.quarter()] * tbl.x[tbl.quarter()] - g));
        wmin = std::max(wmin, std::abs(mn_w - 2.0 * std::sqrt(g)));
    }
    out << "conformality " << g3(conf) << ", end/bulge closure " << g3(ends)
        << ", quarter value " << g3(quart) << ", w-invariant " << g3(wid) << ", min-w dev "
        << g3(wmin);
    return conf <= 1e-9 && ends <= 1e-8 && quart <= 1e-8 && wid <= 1e-8 && wmin <= 1e-6;
}

// 4: the straight surfaces have unit mean curvature to quadrature accuracy
inline bool check_straight(std::ostringstream& out, std::uint64_t) {
    double worst = 0.0;
    for (double a : {0.05, 0.1, 0.2, 0.3, 0.4, 0.5}) {
        ProfileTable tbl = solve_profile(NeckSize(a), 512);
        TorusGrid grid(tbl, 16, 0.0);
        SymField M = mean_curvature(jet_torus(grid));
        for (double v : M.v) worst = std::max(worst, std::abs(v - 1.0));
    }
    out << "max |M - 1| = " << g3(worst) << " over six neck sizes";
    return worst <= 1e-8;
}

// 5: the curvature deviation of the bent torus is first order in the bending
inline bool check_bending_slope(std::ostringstream& out, std::uint64_t) {
    ProfileTable tbl = solve_profile(NeckSize(0.1), 512);
    std::vector<double> lx, ly;
    for (double eps : {1e-3, 3.1623e-3, 1e-2, 3.1623e-2, 1e-1}) {
        TorusGrid grid(tbl, 16, eps);
        SymField M = mean_curvature(jet_torus(grid));
        double dev = 0.0;
        for (double v : M.v) dev = std::max(dev, std::abs(v - 1.0));
        lx.push_back(std::log(eps));
        ly.push_back(std::log(dev));
    }
    const double slope = lsq_slope(lx, ly);
    out << "log-log slope " << g3(slope) << " over eps in [1e-3, 1e-1]";
    return std::abs(slope - 1.0) <= 0.1;
}

// 6: the tabulated kernel directions satisfy the limit operator to second
// order in the grid spacing
inline bool check_kernel_residual(std::ostringstream& out, std::uint64_t) {
    double worst_fine = 0.0, lo_order = 1e300, hi_order = 0.0;
    for (double a : {0.1, 0.3}) {
        for (int pick = 0; pick < 2; ++pick) {
            double r[3];
            int m = 0;
            for (int N : {128, 256, 512}) {
                ProfileTable tbl = solve_profile(NeckSize(a), N);
                r[m++] = pick == 0 ? kernel_residual_w0(tbl) : kernel_residual_w1(tbl);
            }
            for (int k = 0; k + 1 < 3; ++k) {
                const double ord = std::log2(r[k] / r[k + 1]);
                lo_order = std::min(lo_order, ord);
                hi_order = std::max(hi_order, ord);
            }
            worst_fine = std::max(worst_fine, r[2]);
        }
    }
    out << "halving orders in [" << g3(lo_order) << ", " << g3(hi_order)
        << "], finest residual " << g3(worst_fine);
    return lo_order >= 1.7 && hi_order <= 2.3 && worst_fine <= 1e-5;
}

// 7: manufactured recovery of the projected solve, plus the (absent)
// monotonicity of its amplification over a shrinking neck
inline bool check_projected_solver(std::ostringstream& out, std::uint64_t) {
    const int N = 32;
    double rel = 0.0, resid_ratio = 0.0;
    {
        ProfileTable tbl = solve_profile(NeckSize(0.1), 512);
        LimitSolver solver(tbl, N);
        SymField psi(512, N);
        for (int i = 0; i < 512; ++i)
            for (int j = 0; j < N; ++j) {
                const double th = theta_of(j, N);
                psi(i, j) = tbl.x[i] * tbl.x[i] * std::cos(2.0 * th) +
                            0.5 * tbl.x[i] * tbl.w1[i] * std::sin(th) +
                            0.2 * std::pow(tbl.w1[i], 3) * std::sin(3.0 * th);
            }
        SymField target = project_kernel(psi, solver.kernel()).remainder;
        target.even_t = target.theta_mirror = true;
        SymField f = apply_limit(target, tbl);
        SymField phi = solver.solve(f);
        double err = 0.0;
        for (size_t m = 0; m < phi.v.size(); ++m)
            err = std::max(err, std::abs(phi.v[m] - target.v[m]));
        rel = err / sup_norm(target);
        SymField back = apply_limit(phi, tbl);
        double resid = 0.0;
        for (size_t m = 0; m < back.v.size(); ++m)
            resid = std::max(resid, std::abs(back.v[m] - f.v[m]));
        resid_ratio = resid / sup_norm(f);
    }

    std::vector<double> ratios;
    for (double a : {0.1, 0.03, 0.01, 0.003}) {
        ProfileTable tbl = solve_profile(NeckSize(a), 512);
        LimitSolver solver(tbl, N);
        SymField f(512, N);
        for (int i = 0; i < 512; ++i)
            for (int j = 0; j < N; ++j) {
                const double th = theta_of(j, N);
                f(i, j) = tbl.x[i] * tbl.x[i] * std::cos(2.0 * th) +
                          0.2 * std::pow(tbl.w1[i], 3) * std::sin(3.0 * th) +
                          0.5 * tbl.x[i] * tbl.x[i] * tbl.x[i];
            }
        f.even_t = f.theta_mirror = true;
        SymField f0 = project_kernel(f, solver.kernel()).remainder;
        f0.even_t = f0.theta_mirror = true;
        SymField phi = solver.solve(f0);
        const WeightedNormSpec spec(1.5, 1.0);
        ratios.push_back(weighted_norm(phi, tbl, spec, 2) / weighted_norm(f0, tbl, spec, 0));
    }
    bool monotone = true;
    for (size_t k = 0; k + 1 < ratios.size(); ++k)
        if (ratios[k + 1] > ratios[k]) monotone = false;

    out << "manufactured rel " << g3(rel) << ", back-residual ratio " << g3(resid_ratio)
        << "; solve ratios over a = {0.1, 0.03, 0.01, 0.003}: ";
    for (size_t k = 0; k < ratios.size(); ++k) out << (k ? ", " : "") << g3(ratios[k]);
    out << (monotone ? " (monotone)" : " (not monotone: the axisymmetric eigenvalue crossing "
                                       "near a = 0.0102 sits inside the sweep)");
    return rel <= 1e-6 && resid_ratio <= 1e-8 && monotone;
}

// 8: the solved graph scales like eps^min(1, gamma) with a single envelope
// constant. The gamma = 0.5 sweep starts at weaker bending: below n = 256 the
// forcing eps^(1/2) times the 1/(4 gamma_a) neck amplification exceeds the
// Picard contraction margin and the iteration diverges.
inline bool check_graph_decay(std::ostringstream& out, std::uint64_t) {
    ProfileTable tbl = solve_profile(NeckSize(0.2), 256);
    double R = 0.0, worst_orth = 0.0, worst_slope_err = 0.0;
    out << "slopes";
    bool ok = true;
    for (double gamma : {0.5, 1.0, 1.5}) {
        PrescribedCurvature H(-1.0, gamma);
        const double want = std::min(1.0, gamma);
        const std::vector<int> ns = gamma < 0.75 ? std::vector<int>{256, 512, 1024, 2048, 4096}
                                                 : std::vector<int>{32, 64, 128, 256, 512};
        std::vector<double> lx, ly;
        for (int n : ns) {
            TorusGrid grid = TorusGrid::bent(tbl, 16, n);
            ReductionResult res = fixed_point(grid, H);
            for (int i = 0; i < tbl.N_t; ++i)
                for (int j = 0; j < grid.N_theta; ++j)
                    R = std::max(R, std::abs(res.phi(i, j)) /
                                        (std::pow(grid.eps, want) * std::pow(tbl.x[i], 1.5)));
            worst_orth = std::max(worst_orth, res.residual_orth);
            lx.push_back(std::log(grid.eps));
            ly.push_back(std::log(res.phi_norm_weighted));
        }
        const double slope = lsq_slope(lx, ly);
        worst_slope_err = std::max(worst_slope_err, std::abs(slope - want));
        ok = ok && std::abs(slope - want) <= 0.15;
        out << " " << g3(slope) << " (want " << g3(want) << ")";
    }
    ok = ok && worst_orth <= 1e-8 && R < 100.0;
    out << ", envelope R = " << g3(R) << ", worst orthogonality " << g3(worst_orth);
    return ok;
}

// 9: the neck matching brackets a balance root with a tame scaled neck size,
// and the (unmet) one-percent window on the second multiplier
inline bool check_matching(std::ostringstream& out, std::uint64_t) {
    PrescribedCurvature H(-1.0, 1.0);
    MatchOptions mo;
    mo.N_t = 512;
    mo.N_theta = 32;
    mo.mode = MultiplierMode::frozen;
    double b_lo = 1e300, b_hi = 0.0;
    bool roots_ok = true, lambda1_ok = true;
    std::ostringstream l1s;
    for (int n : {16, 24, 32, 48}) {
        MatchResult mr = match_neck(n, H, mo);
        roots_ok = roots_ok && mr.a_lo < mr.a_n && mr.a_n < mr.a_hi;
        b_lo = std::min(b_lo, mr.b_n);
        b_hi = std::max(b_hi, mr.b_n);
        double scale = 0.0;
        for (int k = 1; k <= mo.scan_points; ++k) {
            const double a = 1.2 * k / (n * std::log(static_cast<double>(n)));
            if (!(a > 0.0 && a < 0.45)) continue;
            scale = std::max(scale, std::abs(neck_balance(n, a, H, mo.N_t, mo.N_theta).lambda0));
        }
        const double frac = std::abs(mr.lambda1_res) / scale;
        lambda1_ok = lambda1_ok && frac <= 1e-2;
        l1s << (n > 16 ? ", " : "") << "n=" << n << ": " << g3(frac);
    }
    out << "roots bracketed, b range [" << g3(b_lo) << ", " << g3(b_hi) << "] (ratio "
        << g3(b_hi / b_lo) << "); |lambda1| / sweep scale: " << l1s.str()
        << (lambda1_ok ? "" : " (want <= 0.01; the frozen-evaluation first moment is "
                              "resolution-independent and only the solved graph would cancel "
                              "it, out of the reduction's convergence range here)");
    return roots_ok && b_hi / b_lo <= 2.0 && lambda1_ok;
}

// 10: with the repelling sign of the forcing the balance never changes sign
inline bool check_repelling(std::ostringstream& out, std::uint64_t) {
    MatchOptions mo;
    mo.mode = MultiplierMode::frozen;
    try {
        match_neck(16, PrescribedCurvature(1.0, 1.0), mo);
        out << "a balance root appeared where none should exist";
        return false;
    } catch (const MatchError& e) {
        bool one_signed = e.scan.size() >= 2;
        for (const MultiplierSample& s : e.scan) one_signed = one_signed && s.balance_lambda0 < 0.0;
        out << "no sign change over " << e.scan.size() << " scan points, balance all of one sign";
        return one_signed;
    }
}

// 11: matched tori certify as embedded, a forced breach fails, and the
// certificate agrees with a brute-force mesh intersection oracle
inline bool check_certificates(std::ostringstream& out, std::uint64_t) {
    PrescribedCurvature H(-1.0, 1.0);
    MatchOptions mo;
    mo.N_t = 256;
    mo.N_theta = 16;
    mo.mode = MultiplierMode::frozen;
    bool certs_ok = true;
    double a16 = 0.0;
    for (int n : {16, 24, 32, 48}) {
        MatchResult mr = match_neck(n, H, mo);
        if (n == 16) a16 = mr.a_n;
        ProfileTable tbl = solve_profile(NeckSize(mr.a_n), mo.N_t);
        TorusGrid grid = TorusGrid::bent(tbl, mo.N_theta, n);
        EmbeddingCertificate cert = certify(grid, frozen_multipliers(grid, H), 0.3);
        certs_ok = certs_ok && cert.passed;
    }

    ProfileTable tbl16 = solve_profile(NeckSize(a16), mo.N_t);
    TorusGrid grid16 = TorusGrid::bent(tbl16, mo.N_theta, 16);
    ReductionResult breach = frozen_multipliers(grid16, H);
    for (int i = 0; i < tbl16.N_t; ++i)
        for (int j = 0; j < mo.N_theta; ++j) breach.phi(i, j) = 1.5 * 0.3 * tbl16.x[i];
    const bool breach_fails = !certify(grid16, breach, 0.3).passed;

    // brute-force oracle, coarse meshes: the matched torus is clean, a graph
    // pushed past the tube radius self-intersects; the certificate must agree
    ProfileTable ctbl = solve_profile(NeckSize(a16), 64);
    TorusGrid cgrid = TorusGrid::bent(ctbl, 16, 16);
    const bool cert_a = certify(cgrid, frozen_multipliers(cgrid, H), 0.3).passed;
    const bool mesh_a = !mesh_self_intersects(build_mesh(cgrid));

    ProfileTable ptbl = solve_profile(NeckSize(0.2), 64);
    TorusGrid pgrid = TorusGrid::bent(ptbl, 16, 8);
    ReductionResult poke = frozen_multipliers(pgrid, H);
    SymField pphi(64, 16);
    for (int i = 0; i < 64; ++i)
        for (int j = 0; j < 16; ++j) pphi(i, j) = 5.0 * ptbl.x[i];
    poke.phi = pphi;
    const bool cert_b = certify(pgrid, poke, 0.3).passed;
    const bool mesh_b = !mesh_self_intersects(build_mesh(pgrid, pphi));

    const bool oracle_ok = cert_a && mesh_a && !cert_b && !mesh_b;
    out << "matched certificates " << (certs_ok ? "all passed" : "FAILED") << ", forced breach "
        << (breach_fails ? "rejected" : "ACCEPTED") << "; mesh oracle agreement: clean ("
        << cert_a << "," << mesh_a << "), poked (" << cert_b << "," << mesh_b << ")";
    return certs_ok && breach_fails && oracle_ok;
}

// 12: area/volume against the elliptic closed forms, the constant-curvature
// energy identity, the a-derivative against a finite difference, and the
// kernel mass expansion
inline bool check_energy(std::ostringstream& out, std::uint64_t) {
    using std::numbers::pi;
    double worst_av = 0.0;
    for (double a : {0.1, 0.3, 0.45}) {
        ProfileTable tbl = solve_profile(NeckSize(a), 512);
        TorusGrid g(tbl, 16, 0.0);
        EnergyReport r = area_volume(g, jet_torus(g));
        const Modulus k = NeckSize(a).profile_modulus();
        const double area_cf = 4.0 * pi * (1.0 - a) * ellipE(k);
        worst_av = std::max(worst_av, std::abs(r.area - area_cf) / area_cf);
        std::vector<double> f(tbl.x.size());
        for (size_t i = 0; i < f.size(); ++i) f[i] = tbl.x[i] * tbl.x[i] * tbl.zp[i];
        double s = 0.5 * (f.front() + f.back());
        for (size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
        const double v_true = pi * s * tbl.dt();
        const double v_cf = (2.0 * pi / 3.0) * (1.0 - a) *
                            ((2.0 - a + a * a) * ellipE(k) - a * a * ellipK(k));
        worst_av = std::max(worst_av, std::abs(v_true - v_cf) / v_cf);
    }

    double e1_dev = 0.0;
    {
        ProfileTable tbl = solve_profile(NeckSize(0.15), 256);
        TorusGrid g = TorusGrid::bent(tbl, 16, 16);
        SurfaceJet jet = jet_torus(g);
        EnergyReport base = area_volume(g, jet);
        EnergyReport e1 = h_energy(g, jet, PrescribedCurvature(0.0, 1.0));
        e1_dev = std::abs(e1.h_energy - (base.area + 2.0 * base.volume)) / std::abs(base.area);
    }

    auto energy1 = [](double a, int n) {
        ProfileTable tbl = solve_profile(NeckSize(a), 512);
        TorusGrid g = TorusGrid::bent(tbl, 32, n);
        EnergyReport r = area_volume(g, jet_torus(g));
        return r.area + 2.0 * r.volume;
    };
    double worst_fd = 0.0;
    for (auto [n, a] : {std::pair{32, 0.05}, {16, 0.15}}) {
        const double quad = energy_a_derivative(n, a, 512, 32);
        const double da = 1e-4 * a;
        const double fd = -(energy1(a + da, n) - energy1(a - da, n)) / (2.0 * da) / (2.0 * n);
        worst_fd = std::max(worst_fd, std::abs(quad - fd) / std::abs(fd));
    }

    double worst_mass = 0.0;
    for (double a : {0.003, 0.01, 0.03, 0.1, 0.2}) {
        ProfileTable tbl = solve_profile(NeckSize(a), 512);
        worst_mass = std::max(worst_mass, std::abs(kernel_mass(tbl) / (2.0 * pi) - 1.0) / a);
    }

    out << "area/volume vs elliptic forms rel " << g3(worst_av) << ", energy identity dev "
        << g3(e1_dev) << ", a-derivative vs FD rel " << g3(worst_fd)
        << ", kernel mass |m/2pi - 1| <= " << g3(worst_mass) << " a";
    return worst_av <= 1e-8 && e1_dev <= 1e-10 && worst_fd <= 1e-4 && worst_mass <= 2.0;
}

} // namespace selftest_detail

inline CriterionOutcome run_criterion(int id, std::uint64_t seed = 20260822ull) {
    using selftest_detail::g3;
    CriterionOutcome out;
    out.id = id;
    out.name = criterion_name(id);
    out.documented_failure = !expected_outcome(id);
    const auto t0 = std::chrono::steady_clock::now();
    std::ostringstream oss;
    try {
        switch (id) {
            case 1: out.passed = selftest_detail::check_elliptic(oss, seed); break;
            case 2: out.passed = selftest_detail::check_period(oss, seed); break;
            case 3: out.passed = selftest_detail::check_profile(oss, seed); break;
            case 4: out.passed = selftest_detail::check_straight(oss, seed); break;
            case 5: out.passed = selftest_detail::check_bending_slope(oss, seed); break;
            case 6: out.passed = selftest_detail::check_kernel_residual(oss, seed); break;
            case 7: out.passed = selftest_detail::check_projected_solver(oss, seed); break;
            case 8: out.passed = selftest_detail::check_graph_decay(oss, seed); break;
            case 9: out.passed = selftest_detail::check_matching(oss, seed); break;
            case 10: out.passed = selftest_detail::check_repelling(oss, seed); break;
            case 11: out.passed = selftest_detail::check_certificates(oss, seed); break;
            case 12: out.passed = selftest_detail::check_energy(oss, seed); break;
            default: throw std::invalid_argument("run_criterion: id outside 1..12");
        }
    } catch (const std::invalid_argument&) {
        throw;
    } catch (const std::exception& e) {
        out.passed = false;
        oss << "unexpected exception: " << e.what();
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.detail = oss.str();
    return out;
}

// Runs the requested checks (all twelve when empty) and prints one line per
// outcome. Plain mode exits nonzero on any failure; expect_documented mode
// exits nonzero on any deviation from the documented expectations, in either
// direction, so a harness goes red both on a regression and on a silent
// change in the two documented failures.
inline int selftest_main(std::vector<int> which, bool expect_documented,
                         std::uint64_t seed = 20260822ull) {
    if (which.empty())
        for (int id = 1; id <= 12; ++id) which.push_back(id);
    bool all_pass = true, all_documented = true;
    for (int id : which) {
        CriterionOutcome o = run_criterion(id, seed);
        const bool expected = expected_outcome(id);
        std::printf("criterion %2d %s %-28s (%6.1fs)  %s\n", o.id, o.passed ? "PASS" : "FAIL",
                    o.name.c_str(), o.seconds, o.detail.c_str());
        if (o.passed != expected) {
            all_documented = false;
            if (expect_documented)
                std::printf("criterion %2d deviates from the documented expectation (%s)\n",
                            o.id, expected ? "PASS" : "documented FAIL");
        }
        all_pass = all_pass && o.passed;
    }
    if (expect_documented) {
        std::printf("documented expectations %s\n", all_documented ? "reproduced" : "VIOLATED");
        return all_documented ? 0 : 1;
    }
    std::printf("%s\n", all_pass ? "all criteria passed" : "some criteria failed");
    return all_pass ? 0 : 1;
}

} // namespace tori
