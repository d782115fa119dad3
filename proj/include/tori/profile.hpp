#pragma once

// Conformal unduloid profile over one period.
//
// The profile solves x'' = (1-2*gamma)x - 2x^3, z' = gamma + x^2 with
// x(0) = 1-a, x'(0) = 0, z(0) = 0, where gamma = a(1-a).  Conformality
// x^2 = x'^2 + z'^2 is a first integral.  The half-period tau and the
// half-height h = z(tau) come from the elliptic module, which is the
// source of truth; the ODE only has to land on them.
//
// Alongside the profile we integrate the even Jacobi seed w0 solving
// y'' = -2 p y, p = x^2 + gamma^2/x^2, y(0) = 1, y'(0) = 0.  w0 is NOT
// 2*tau-periodic (its value at +-tau is -1 but the derivative jumps);
// two ghost samples past +tau are kept for seam-aware stencils.
// The odd-theta seed w1 = z'/x is periodic.

#include <tori/elliptic.hpp>
#include <tori/symfield.hpp>

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace tori {

struct ProfileTable {
    NeckSize a;
    double gamma_a; // a(1-a)
    double tau;     // half-period
    double h;       // half-height z(tau)
    int N_t;        // interval count; arrays hold N_t+1 closed samples
    std::vector<double> t_grid; // -tau + i*dt, i = 0..N_t
    std::vector<double> x, xp, z, zp;
    std::vector<double> w0, y0p; // even kernel seed and its derivative
    std::vector<double> w1;      // z'/x
    std::array<double, 2> w0_ghost{}; // w0 at tau + dt, tau + 2*dt

    double dt() const { return 2.0 * tau / N_t; }
    // row index of a field <-> table sample index (0..N_t-1); sample N_t wraps to 0
    int mid() const { return N_t / 2; }          // t = 0
    int quarter() const { return 3 * N_t / 4; }  // t = tau/2
};

struct WeightedNormSpec {
    double mu = 1.5;   // weight exponent, in (1,2)
    double delta = 1.0; // window half-width

    WeightedNormSpec() = default;
    WeightedNormSpec(double mu_, double delta_) : mu(mu_), delta(delta_) {
        if (!(mu > 1.0 && mu < 2.0)) throw std::domain_error("WeightedNormSpec: mu outside (1,2)");
        if (!(delta > 0.0)) throw std::domain_error("WeightedNormSpec: delta <= 0");
    }
};

namespace detail {

using State5 = std::array<double, 5>; // x, x', z, w0, w0'

struct ProfileRhs {
    double gamma;
    void operator()(const State5& s, State5& ds, double) const {
        const double x = s[0];
        ds[0] = s[1];
        ds[1] = (1.0 - 2.0 * gamma) * x - 2.0 * x * x * x;
        ds[2] = gamma + x * x;
        const double p = x * x + gamma * gamma / (x * x);
        ds[3] = s[4];
        ds[4] = -2.0 * p * s[3];
    }
};

} // namespace detail

inline int default_N_t(const NeckSize& a) {
    if (a.a >= 0.01) return 1024;
    return 256 * static_cast<int>(std::ceil(period_tau(a)));
}

// Adaptive eighth-order integration, node to node, then parity extension.
inline ProfileTable solve_profile(const NeckSize& a, int N_t) {
    namespace ode = boost::numeric::odeint;
    if (N_t < 64 || N_t % 4 != 0)
        throw std::invalid_argument("solve_profile: N_t must be >= 64 and divisible by 4");

    ProfileTable tbl{a, a.gamma(), period_tau(a), height_h(a), N_t,
                     {}, {}, {}, {}, {}, {}, {}, {}, {}};
    const double dt = tbl.dt();
    const int n = N_t;
    tbl.t_grid.resize(n + 1);
    for (int i = 0; i <= n; ++i) tbl.t_grid[i] = -tbl.tau + i * dt;
    tbl.x.assign(n + 1, 0.0);
    tbl.xp.assign(n + 1, 0.0);
    tbl.z.assign(n + 1, 0.0);
    tbl.zp.assign(n + 1, 0.0);
    tbl.w0.assign(n + 1, 0.0);
    tbl.y0p.assign(n + 1, 0.0);
    tbl.w1.assign(n + 1, 0.0);

    const detail::ProfileRhs rhs{tbl.gamma_a};
    auto stepper = ode::make_controlled(1e-12, 1e-12,
                                        ode::runge_kutta_fehlberg78<detail::State5>());
    detail::State5 s{1.0 - a.a, 0.0, 0.0, 1.0, 0.0};

    auto store = [&](int i, const detail::State5& st) {
        tbl.x[i] = st[0];
        tbl.xp[i] = st[1];
        tbl.z[i] = st[2];
        tbl.w0[i] = st[3];
        tbl.y0p[i] = st[4];
    };
    store(tbl.mid(), s);
    try {
        for (int m = 1; m <= n / 2 + 2; ++m) {
            ode::integrate_adaptive(stepper, rhs, s, (m - 1) * dt, m * dt, 0.5 * dt);
            if (m <= n / 2)
                store(tbl.mid() + m, s);
            else
                tbl.w0_ghost[m - n / 2 - 1] = s[3];
        }
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("solve_profile: integration failed (") + e.what() +
                                 "); step-size underflow for this a/N_t pairing");
    }

    // parity: x, w0 even; z, x', w0' odd
    for (int i = 0; i < n / 2; ++i) {
        tbl.x[i] = tbl.x[n - i];
        tbl.xp[i] = -tbl.xp[n - i];
        tbl.z[i] = -tbl.z[n - i];
        tbl.w0[i] = tbl.w0[n - i];
        tbl.y0p[i] = -tbl.y0p[n - i];
    }
    for (int i = 0; i <= n; ++i) {
        tbl.zp[i] = tbl.gamma_a + tbl.x[i] * tbl.x[i];
        tbl.w1[i] = tbl.zp[i] / tbl.x[i];
    }

    // construction-time invariants
    const double amin = a.a - 1e-8, amax = 1.0 - a.a + 1e-8;
    for (int i = 0; i <= n; ++i) {
        const double conf = tbl.x[i] * tbl.x[i] - tbl.xp[i] * tbl.xp[i] - tbl.zp[i] * tbl.zp[i];
        if (std::abs(conf) > 1e-9)
            throw std::runtime_error("solve_profile: conformality residual exceeds 1e-9");
        if (tbl.x[i] < amin || tbl.x[i] > amax)
            throw std::runtime_error("solve_profile: x leaves [a, 1-a]");
    }
    if (std::abs(tbl.x[tbl.mid()] - (1.0 - a.a)) > 1e-12 || std::abs(tbl.x[n] - a.a) > 1e-8)
        throw std::runtime_error("solve_profile: endpoint values off");
    if (std::abs(tbl.z[n] - tbl.h) > 1e-8)
        throw std::runtime_error("solve_profile: z(tau) does not match the height formula");
    return tbl;
}

inline ProfileTable solve_profile(const NeckSize& a) { return solve_profile(a, default_N_t(a)); }

// Fixed-step classical Runge-Kutta variant.  Exists so grid-convergence
// order can be measured without the adaptive controller hiding the step
// size; not used by the production path.
inline ProfileTable solve_profile_fixed_rk4(const NeckSize& a, int N_t) {
    if (N_t < 64 || N_t % 4 != 0)
        throw std::invalid_argument("solve_profile_fixed_rk4: N_t must be >= 64 and divisible by 4");
    ProfileTable tbl{a, a.gamma(), period_tau(a), height_h(a), N_t,
                     {}, {}, {}, {}, {}, {}, {}, {}, {}};
    const double dt = tbl.dt();
    const int n = N_t;
    tbl.t_grid.resize(n + 1);
    for (int i = 0; i <= n; ++i) tbl.t_grid[i] = -tbl.tau + i * dt;
    tbl.x.assign(n + 1, 0.0);
    tbl.xp.assign(n + 1, 0.0);
    tbl.z.assign(n + 1, 0.0);
    tbl.zp.assign(n + 1, 0.0);
    tbl.w0.assign(n + 1, 0.0);
    tbl.y0p.assign(n + 1, 0.0);
    tbl.w1.assign(n + 1, 0.0);

    const detail::ProfileRhs rhs{tbl.gamma_a};
    boost::numeric::odeint::runge_kutta4<detail::State5> rk4;
    detail::State5 s{1.0 - a.a, 0.0, 0.0, 1.0, 0.0};
    tbl.x[tbl.mid()] = s[0];
    tbl.w0[tbl.mid()] = s[3];
    for (int m = 1; m <= n / 2 + 2; ++m) {
        rk4.do_step(rhs, s, (m - 1) * dt, dt);
        if (m <= n / 2) {
            const int i = tbl.mid() + m;
            tbl.x[i] = s[0];
            tbl.xp[i] = s[1];
            tbl.z[i] = s[2];
            tbl.w0[i] = s[3];
            tbl.y0p[i] = s[4];
        } else {
            tbl.w0_ghost[m - n / 2 - 1] = s[3];
        }
    }
    for (int i = 0; i < n / 2; ++i) {
        tbl.x[i] = tbl.x[n - i];
        tbl.xp[i] = -tbl.xp[n - i];
        tbl.z[i] = -tbl.z[n - i];
        tbl.w0[i] = tbl.w0[n - i];
        tbl.y0p[i] = -tbl.y0p[n - i];
    }
    for (int i = 0; i <= n; ++i) {
        tbl.zp[i] = tbl.gamma_a + tbl.x[i] * tbl.x[i];
        tbl.w1[i] = tbl.zp[i] / tbl.x[i];
    }
    return tbl;
}

// Cross-check of the elliptic period: first upward zero of x' after t = 0,
// located by bisection on dense output.  Undefined at the cylinder a = 1/2
// where x' vanishes identically.
inline double detect_period(const NeckSize& a) {
    namespace ode = boost::numeric::odeint;
    if (a.a >= 0.5) throw std::invalid_argument("detect_period: constant profile has no event");
    const double gamma = a.gamma();
    auto rhs = [gamma](const std::array<double, 2>& s, std::array<double, 2>& ds, double) {
        ds[0] = s[1];
        ds[1] = (1.0 - 2.0 * gamma) * s[0] - 2.0 * s[0] * s[0] * s[0];
    };
    auto stepper = ode::make_dense_output(1e-12, 1e-12, ode::runge_kutta_dopri5<std::array<double, 2>>());
    std::array<double, 2> s{1.0 - a.a, 0.0};
    stepper.initialize(s, 0.0, 0.1);
    double prev_t = 0.0, prev_xp = 0.0;
    const double t_max = 4.0 * period_tau(a);
    while (stepper.current_time() < t_max) {
        stepper.do_step(rhs);
        const double t1 = stepper.current_time();
        const double xp1 = stepper.current_state()[1];
        if (prev_t > 0.0 && prev_xp < 0.0 && xp1 >= 0.0) {
            double lo = prev_t, hi = t1;
            std::array<double, 2> mid_state;
            for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
                const double mid = 0.5 * (lo + hi);
                stepper.calc_state(mid, mid_state);
                (mid_state[1] < 0.0 ? lo : hi) = mid;
            }
            return 0.5 * (lo + hi);
        }
        prev_t = t1;
        prev_xp = xp1;
    }
    throw std::runtime_error("detect_period: no sign change found");
}

inline std::vector<double> kernel_w0(const ProfileTable& tbl) { return tbl.w0; }
inline std::vector<double> kernel_w1(const ProfileTable& tbl) { return tbl.w1; }

// Discrete surrogate of the weighted Hoelder norm:
//   sup_i  x(t_i)^(-mu) * ( sum over derivatives D of order <= k of
//                           max_window |D f|
//                         + max_window of second differences of the
//                           k-th order derivatives ).
// The window is all rows within wrapped distance delta of t_i, all theta.
// Derivatives use second-order periodic central stencils; the Hoelder
// exponent is dropped (grid data is band-limited).
inline double weighted_norm(const SymField& f, const ProfileTable& tbl,
                            const WeightedNormSpec& spec, int k) {
    if (k < 0 || k > 2) throw std::invalid_argument("weighted_norm: k must be 0, 1 or 2");
    if (f.N_t != tbl.N_t) throw std::invalid_argument("weighted_norm: field/table size mismatch");
    if (spec.delta > tbl.tau) throw std::domain_error("weighted_norm: window exceeds domain");

    const double dt = tbl.dt(), dth = 2.0 * std::numbers::pi / f.N_theta;
    std::vector<SymField> derivs;
    derivs.push_back(f);
    if (k >= 1) {
        derivs.push_back(diff_t(f, dt, 2));
        derivs.push_back(diff_theta(f, dth, 2));
    }
    if (k >= 2) {
        derivs.push_back(diff2_t(f, dt, 2));
        derivs.push_back(diff_theta(derivs[1], dth, 2));
        derivs.push_back(diff2_theta(f, dth, 2));
    }
    const size_t top_begin = k == 0 ? 0 : (k == 1 ? 1 : 3);

    const int n = f.N_t;
    std::vector<std::vector<double>> rowmax(derivs.size(), std::vector<double>(n, 0.0));
    for (size_t d = 0; d < derivs.size(); ++d)
        for (int i = 0; i < n; ++i) {
            double m = 0.0;
            for (int j = 0; j < f.N_theta; ++j) m = std::max(m, std::abs(derivs[d](i, j)));
            rowmax[d][i] = m;
        }
    // plain second differences (not divided by the step) of the top-order derivatives
    std::vector<double> rowmax_hold(n, 0.0);
    for (size_t d = top_begin; d < derivs.size(); ++d) {
        const SymField& g = derivs[d];
        for (int i = 0; i < n; ++i) {
            double m = rowmax_hold[i];
            for (int j = 0; j < f.N_theta; ++j) {
                m = std::max(m, std::abs(g.at(i + 1, j) - 2.0 * g(i, j) + g.at(i - 1, j)));
                m = std::max(m, std::abs(g.at(i, j + 1) - 2.0 * g(i, j) + g.at(i, j - 1)));
            }
            rowmax_hold[i] = m;
        }
    }

    const int r = static_cast<int>(std::floor(spec.delta / dt + 1e-12));
    double value = 0.0;
    for (int i = 0; i < n; ++i) {
        double wn = 0.0;
        for (size_t d = 0; d < derivs.size(); ++d) {
            double m = 0.0;
            for (int o = -r; o <= r; ++o) m = std::max(m, rowmax[d][SymField::wrap(i + o, n)]);
            wn += m;
        }
        double mh = 0.0;
        for (int o = -r; o <= r; ++o) mh = std::max(mh, rowmax_hold[SymField::wrap(i + o, n)]);
        wn += mh;
        value = std::max(value, std::pow(tbl.x[i], -spec.mu) * wn);
    }
    return value;
}

} // namespace tori
