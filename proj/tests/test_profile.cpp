#include <catch2/catch_amalgamated.hpp>

#include <tori/profile.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace tori;
using std::numbers::pi;

namespace {

SymField field_from_samples(const std::vector<double>& s, int N_t, int N_theta) {
    SymField f(N_t, N_theta);
    for (int i = 0; i < N_t; ++i)
        for (int j = 0; j < N_theta; ++j) f(i, j) = s[i];
    f.even_t = true;
    f.theta_mirror = true;
    return f;
}

// naive double-loop evaluation of the weighted norm, mirroring the
// documented definition without the per-row max cache
double brute_weighted_norm(const SymField& f, const ProfileTable& tbl, const WeightedNormSpec& spec,
                           int k) {
    const double dt = tbl.dt(), dth = 2.0 * pi / f.N_theta;
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
    const int r = static_cast<int>(std::floor(spec.delta / dt + 1e-12));
    double value = 0.0;
    for (int i = 0; i < n; ++i) {
        double wn = 0.0;
        for (size_t d = 0; d < derivs.size(); ++d) {
            double m = 0.0;
            for (int ip = 0; ip < n; ++ip) {
                const int off = std::min(std::abs(ip - i), n - std::abs(ip - i));
                if (off > r) continue;
                for (int j = 0; j < f.N_theta; ++j) m = std::max(m, std::abs(derivs[d](ip, j)));
            }
            wn += m;
        }
        double mh = 0.0;
        for (size_t d = top_begin; d < derivs.size(); ++d) {
            const SymField& g = derivs[d];
            for (int ip = 0; ip < n; ++ip) {
                const int off = std::min(std::abs(ip - i), n - std::abs(ip - i));
                if (off > r) continue;
                for (int j = 0; j < f.N_theta; ++j) {
                    mh = std::max(mh, std::abs(g.at(ip + 1, j) - 2.0 * g(ip, j) + g.at(ip - 1, j)));
                    mh = std::max(mh, std::abs(g.at(ip, j + 1) - 2.0 * g(ip, j) + g.at(ip, j - 1)));
                }
            }
        }
        wn += mh;
        value = std::max(value, std::pow(tbl.x[i], -spec.mu) * wn);
    }
    return value;
}

} // namespace

TEST_CASE("table invariants across neck sizes") {
    for (double av : {0.05, 0.1, 0.2, 0.3, 0.4, 0.5}) {
        const auto tbl = solve_profile(NeckSize(av), 512);
        const int n = tbl.N_t;
        CAPTURE(av);

        double conf = 0.0, zres = 0.0, par = 0.0;
        for (int i = 0; i <= n; ++i) {
            conf = std::max(conf, std::abs(tbl.x[i] * tbl.x[i] - tbl.xp[i] * tbl.xp[i] -
                                           tbl.zp[i] * tbl.zp[i]));
            zres = std::max(zres, std::abs(tbl.zp[i] - tbl.gamma_a - tbl.x[i] * tbl.x[i]));
        }
        for (int i = 0; i <= n; ++i) {
            par = std::max(par, std::abs(tbl.x[i] - tbl.x[n - i]));
            par = std::max(par, std::abs(tbl.z[i] + tbl.z[n - i]));
            par = std::max(par, std::abs(tbl.w0[i] - tbl.w0[n - i]));
            par = std::max(par, std::abs(tbl.w1[i] - tbl.w1[n - i]));
        }
        CHECK(conf <= 1e-9);
        CHECK(zres <= 1e-10);
        CHECK(par <= 1e-10);
        CHECK(std::abs(tbl.x[tbl.mid()] - (1.0 - av)) <= 1e-12);
        CHECK(std::abs(tbl.x[n] - av) <= 1e-8);
        CHECK(std::abs(tbl.z[n] - tbl.h) <= 1e-8);
        CHECK(std::abs(tbl.x[tbl.quarter()] * tbl.x[tbl.quarter()] - tbl.gamma_a) <= 1e-8);
    }
}

TEST_CASE("event detector agrees with the elliptic period") {
    for (double av : {0.1, 0.25, 0.4}) {
        const NeckSize a(av);
        CHECK(std::abs(detect_period(a) - period_tau(a)) <= 1e-8);
    }
    CHECK_THROWS_AS(detect_period(NeckSize(0.5)), std::invalid_argument);
}

TEST_CASE("cylinder degenerate case") {
    const auto tbl = solve_profile(NeckSize(0.5), 256);
    for (int i = 0; i <= tbl.N_t; ++i) {
        CHECK(std::abs(tbl.x[i] - 0.5) <= 1e-12);
        CHECK(std::abs(tbl.z[i] - 0.5 * tbl.t_grid[i]) <= 1e-10);
        CHECK(std::abs(tbl.w1[i] - 1.0) <= 1e-12);
        CHECK(std::abs(tbl.w0[i] - std::cos(tbl.t_grid[i])) <= 1e-10);
    }
    CHECK(std::abs(tbl.tau - pi) <= 1e-12);
}

TEST_CASE("conserved quantity of the cylindrical-graph form") {
    // with rho = x and rho' = dx/dz, rho^2 - rho/sqrt(1+rho'^2) = -gamma
    for (double av : {0.1, 0.3}) {
        const auto tbl = solve_profile(NeckSize(av), 512);
        for (int i = 0; i <= tbl.N_t; ++i) {
            const double rp = tbl.xp[i] / tbl.zp[i];
            const double cons = tbl.x[i] * tbl.x[i] - tbl.x[i] / std::sqrt(1.0 + rp * rp);
            CHECK(std::abs(cons + tbl.gamma_a) <= 1e-9);
        }
    }
}

TEST_CASE("growth bound by the square root of sech") {
    // holds up to a = 0.18; at a = 0.2 the endpoint x(tau) = a already
    // exceeds (1-a)sqrt(sech tau) by 3.6e-3
    for (double av : {0.05, 0.1, 0.15}) {
        const auto tbl = solve_profile(NeckSize(av), 512);
        for (int i = 0; i <= tbl.N_t; ++i) {
            const double bound = (1.0 - av) * std::sqrt(1.0 / std::cosh(tbl.t_grid[i]));
            CHECK(tbl.x[i] <= bound + 1e-12);
        }
    }
}

TEST_CASE("small-neck profile approaches sech") {
    const auto tbl = solve_profile(NeckSize(0.001));
    double worst_x = 0.0, worst_w0 = 0.0;
    for (int i = 0; i <= tbl.N_t; ++i) {
        const double t = tbl.t_grid[i];
        if (std::abs(t) <= 5.0)
            worst_x = std::max(worst_x, std::abs(tbl.x[i] - 1.0 / std::cosh(t)));
        if (std::abs(t) <= 3.0)
            worst_w0 = std::max(worst_w0, std::abs(tbl.w0[i] - (1.0 - t * std::tanh(t))));
    }
    CHECK(worst_x <= 0.05);
    CHECK(worst_w0 <= 0.05);
}

TEST_CASE("even kernel seed shape") {
    const auto tbl = solve_profile(NeckSize(0.1), 1024);
    const int n = tbl.N_t;
    CHECK(tbl.w0[tbl.mid()] == 1.0);
    // strictly decreasing on [0, tau/2], then a single interior minimum
    // before rising back to -1 at the period end
    for (int i = tbl.mid(); i < tbl.quarter(); ++i) CHECK(tbl.w0[i + 1] < tbl.w0[i]);
    int imin = tbl.mid();
    for (int i = tbl.mid(); i <= n; ++i)
        if (tbl.w0[i] < tbl.w0[imin]) imin = i;
    CHECK(imin > tbl.quarter());
    CHECK(imin < n);
    for (int i = tbl.mid(); i < imin; ++i) CHECK(tbl.w0[i + 1] < tbl.w0[i]);
    for (int i = imin; i < n; ++i) CHECK(tbl.w0[i + 1] >= tbl.w0[i]);
    // linear growth envelope
    for (int i = 0; i <= n; ++i)
        CHECK(std::abs(tbl.w0[i]) <= 2.0 * (1.0 + std::abs(tbl.t_grid[i])));
    // value -1 at the period ends and slope tied to the height derivative,
    // independent of a
    for (double av : {0.05, 0.1, 0.3, 0.5}) {
        const auto t2 = solve_profile(NeckSize(av), 512);
        CHECK(std::abs(t2.w0[t2.N_t] + 1.0) <= 1e-7);
        const double d = 1e-6;
        const double dhda = av + d <= 0.5
                                ? (height_h(NeckSize(av + d)) - height_h(NeckSize(av - d))) / (2.0 * d)
                                : (height_h(NeckSize(av)) - height_h(NeckSize(av - d))) / d;
        CHECK(std::abs(t2.y0p[t2.N_t] - dhda * (1.0 - 2.0 * av)) <= 1e-6);
    }
    // ghost samples continue the rise through -1 past the seam
    CHECK(std::isfinite(tbl.w0_ghost[0]));
    CHECK(tbl.w0_ghost[0] > tbl.w0[n]);
    CHECK(tbl.w0_ghost[1] > tbl.w0_ghost[0]);
}

TEST_CASE("odd-theta kernel seed and its first integral") {
    const auto tbl = solve_profile(NeckSize(0.1), 1024);
    double minw = 2.0;
    for (int i = 0; i <= tbl.N_t; ++i) {
        CHECK(tbl.w1[i] > 0.0);
        CHECK(tbl.w1[i] <= 1.0 + 1e-12);
        minw = std::min(minw, tbl.w1[i]);
        const double w = tbl.w1[i];
        const double wp = tbl.xp[i] * (2.0 * tbl.x[i] * tbl.x[i] - tbl.zp[i]) /
                          (tbl.x[i] * tbl.x[i]);
        const double res = wp * wp - (1.0 - w * w) * (w * w - 4.0 * tbl.gamma_a);
        CHECK(std::abs(res) <= 1e-8);
    }
    CHECK(std::abs(minw - 2.0 * std::sqrt(tbl.gamma_a)) <= 1e-6);
    CHECK(std::abs(minw - 0.6) <= 1e-6);
}

TEST_CASE("potential sup norm") {
    for (double av : {0.05, 0.2, 0.5}) {
        const auto tbl = solve_profile(NeckSize(av), 512);
        double pmax = 0.0;
        for (int i = 0; i <= tbl.N_t; ++i) {
            const double x2 = tbl.x[i] * tbl.x[i];
            pmax = std::max(pmax, x2 + tbl.gamma_a * tbl.gamma_a / x2);
        }
        CHECK(std::abs(pmax - (av * av + (1.0 - av) * (1.0 - av))) <= 1e-8);
    }
}

TEST_CASE("weight is Lipschitz in the exponent metric") {
    const auto tbl = solve_profile(NeckSize(0.1), 1024);
    const double mu = 1.5;
    std::mt19937 rng(77u);
    std::uniform_int_distribution<int> pick(0, tbl.N_t);
    for (int trial = 0; trial < 100; ++trial) {
        const int i = pick(rng), j = pick(rng);
        const double lhs = std::pow(tbl.x[i], -mu);
        const double rhs = std::exp(mu * std::abs(tbl.t_grid[i] - tbl.t_grid[j])) *
                           std::pow(tbl.x[j], -mu);
        CHECK(lhs <= rhs * (1.0 + 1e-12));
    }
}

TEST_CASE("fixed-step path converges at fourth order") {
    auto conf_res = [](const ProfileTable& tbl) {
        double worst = 0.0;
        for (int i = 0; i <= tbl.N_t; ++i)
            worst = std::max(worst, std::abs(tbl.x[i] * tbl.x[i] - tbl.xp[i] * tbl.xp[i] -
                                             tbl.zp[i] * tbl.zp[i]));
        return worst;
    };
    const NeckSize a(0.2);
    const double r1 = conf_res(solve_profile_fixed_rk4(a, 128));
    const double r2 = conf_res(solve_profile_fixed_rk4(a, 256));
    const double r3 = conf_res(solve_profile_fixed_rk4(a, 512));
    CHECK(std::log2(r1 / r2) >= 3.5);
    CHECK(std::log2(r2 / r3) >= 3.5);
}

TEST_CASE("weighted norm basics") {
    const auto tbl = solve_profile(NeckSize(0.1), 512);
    const WeightedNormSpec spec(1.5, 1.0);

    SymField zero(tbl.N_t, 8, 0.0);
    CHECK(weighted_norm(zero, tbl, spec, 2) == 0.0);

    // f = x^mu: the weight cancels up to window growth
    std::vector<double> xmu(tbl.N_t + 1);
    for (int i = 0; i <= tbl.N_t; ++i) xmu[i] = std::pow(tbl.x[i], spec.mu);
    const double v = weighted_norm(field_from_samples(xmu, tbl.N_t, 8), tbl, spec, 0);
    CHECK(v >= 1.0);
    CHECK(v <= std::exp(spec.delta * spec.mu) * (1.0 + 1e-10));

    CHECK_THROWS_AS(weighted_norm(zero, tbl, WeightedNormSpec(1.5, 5.0), 0), std::domain_error);
    CHECK_THROWS_AS(weighted_norm(zero, tbl, spec, 3), std::invalid_argument);
    CHECK_THROWS_AS(WeightedNormSpec(2.5, 1.0), std::domain_error);
}

TEST_CASE("weighted norm matches brute-force evaluation") {
    const auto tbl = solve_profile(NeckSize(0.1), 256);
    const WeightedNormSpec spec(1.5, 1.0);
    SymField f(tbl.N_t, 8);
    // theta-dependent symmetric test field built from table data
    for (int i = 0; i < tbl.N_t; ++i)
        for (int j = 0; j < 8; ++j) {
            const double th = -pi + j * (2.0 * pi / 8);
            f(i, j) = tbl.w1[i] * (1.0 + 0.3 * std::sin(th)) + 0.1 * tbl.x[i];
        }
    for (int k = 0; k <= 2; ++k) {
        const double got = weighted_norm(f, tbl, spec, k);
        const double want = brute_weighted_norm(f, tbl, spec, k);
        CHECK(got == Catch::Approx(want).epsilon(1e-12));
        CHECK(std::isfinite(got));
    }
}

TEST_CASE("grid-size defaults and argument validation") {
    CHECK(default_N_t(NeckSize(0.05)) == 1024);
    const int n_small = default_N_t(NeckSize(0.001));
    CHECK(n_small >= 1024);
    CHECK(n_small % 4 == 0);
    CHECK_THROWS_AS(solve_profile(NeckSize(0.1), 62), std::invalid_argument);
    CHECK_THROWS_AS(solve_profile(NeckSize(0.1), 130), std::invalid_argument);
}
