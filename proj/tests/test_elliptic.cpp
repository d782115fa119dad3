#include <catch2/catch_amalgamated.hpp>

#include <tori/elliptic.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

using namespace tori;
using std::numbers::pi;

// adaptive Simpson, used to check the AGM against the defining integrals
namespace {

double simpson(double (*f)(double, double), double k, double a, double b) {
    const double c = 0.5 * (a + b);
    return (b - a) / 6.0 * (f(a, k) + 4.0 * f(c, k) + f(b, k));
}

double adapt(double (*f)(double, double), double k, double a, double b, double whole, double tol,
             int depth) {
    const double c = 0.5 * (a + b);
    const double left = simpson(f, k, a, c);
    const double right = simpson(f, k, c, b);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adapt(f, k, a, c, left, 0.5 * tol, depth - 1) +
           adapt(f, k, c, b, right, 0.5 * tol, depth - 1);
}

double integrate(double (*f)(double, double), double k, double a, double b) {
    return adapt(f, k, a, b, simpson(f, k, a, b), 1e-13, 30);
}

double K_integrand(double th, double k) {
    const double s = std::sin(th);
    return 1.0 / std::sqrt(1.0 - k * k * s * s);
}

double E_integrand(double th, double k) {
    const double s = std::sin(th);
    return std::sqrt(1.0 - k * k * s * s);
}

} // namespace

TEST_CASE("complete integrals at frozen reference moduli") {
    // reference values computed with 30-digit arithmetic
    struct Ref {
        double k, K, E;
    };
    const Ref refs[] = {
        {0.1, 1.574745561517355952669, 1.56686194202166829122},
        {0.5, 1.685750354812596042871, 1.46746220933942715546},
        {0.8, 1.995302777664729387686, 1.276349943169906423309},
    };
    for (const auto& r : refs) {
        const auto m = Modulus::from_k(r.k);
        CHECK(ellipK(m) == Catch::Approx(r.K).epsilon(1e-13));
        CHECK(ellipE(m) == Catch::Approx(r.E).epsilon(1e-13));
    }
}

TEST_CASE("endpoint values") {
    const auto m0 = Modulus::from_k(0.0);
    CHECK(std::abs(ellipK(m0) - pi / 2.0) < 1e-15);
    CHECK(std::abs(ellipE(m0) - pi / 2.0) < 1e-15);
    CHECK(ellipE(Modulus(1.0, 0.0)) == 1.0);
}

TEST_CASE("integrals match direct quadrature of the defining forms") {
    for (double k = 0.1; k < 0.95; k += 0.1) {
        const auto m = Modulus::from_k(k);
        CHECK(ellipK(m) == Catch::Approx(integrate(K_integrand, k, 0.0, pi / 2.0)).epsilon(1e-10));
        CHECK(ellipE(m) == Catch::Approx(integrate(E_integrand, k, 0.0, pi / 2.0)).epsilon(1e-10));
    }
}

TEST_CASE("Legendre relation on random moduli") {
    std::mt19937 rng(20240517u);
    std::uniform_real_distribution<double> U(0.01, 0.99);
    for (int i = 0; i < 20; ++i) {
        const double k = U(rng);
        const auto m = Modulus::from_k(k);
        const auto mc = Modulus(std::sqrt(m.kprime2), k * k);
        const double lhs =
            ellipE(m) * ellipK(mc) + ellipE(mc) * ellipK(m) - ellipK(m) * ellipK(mc);
        CHECK(std::abs(lhs - pi / 2.0) < 1e-10);
    }
}

TEST_CASE("E below K on the open interval") {
    for (double k = 0.05; k < 1.0; k += 0.05) {
        const auto m = Modulus::from_k(k);
        CHECK(ellipE(m) < ellipK(m));
    }
}

TEST_CASE("modulus invariants and domain errors") {
    CHECK_THROWS_AS(Modulus(0.5, 0.5), std::domain_error);
    CHECK_THROWS_AS(Modulus::from_k(1.5), std::domain_error);
    CHECK_THROWS_AS(ellipK(Modulus(1.0, 0.0)), std::domain_error);
    CHECK_THROWS_AS(NeckSize(0.0), std::domain_error);
    CHECK_THROWS_AS(NeckSize(0.7), std::domain_error);

    // producers keep k^2 + kprime2 = 1 to machine precision
    for (double a : {1e-8, 1e-4, 0.01, 0.1, 0.3, 0.5}) {
        const NeckSize ns(a);
        const auto pm = ns.period_modulus();
        CHECK(std::abs(pm.k * pm.k + pm.kprime2 - 1.0) <= 1e-14);
        const auto fm = ns.profile_modulus();
        CHECK(std::abs(fm.k * fm.k + fm.kprime2 - 1.0) <= 1e-14);
    }
}

TEST_CASE("period and height at frozen neck sizes") {
    // a = 1/4: period modulus 1/2
    CHECK(period_tau(NeckSize(0.25)) == Catch::Approx(3.371500709625192085742).epsilon(1e-13));
    CHECK(height_h(NeckSize(0.25)) == Catch::Approx(1.46746220933942715546).epsilon(1e-13));
    // a = 0.1: period modulus 0.8
    CHECK(period_tau(NeckSize(0.1)) == Catch::Approx(3.990605555329458775372).epsilon(1e-13));
    CHECK(height_h(NeckSize(0.1)) == Catch::Approx(1.276349943169906423309).epsilon(1e-13));
    // cylinder
    CHECK(period_tau(NeckSize(0.5)) == Catch::Approx(pi).margin(1e-12));
    CHECK(height_h(NeckSize(0.5)) == Catch::Approx(pi / 2.0).margin(1e-12));
}

TEST_CASE("height increases with neck size, from 1 toward pi/2") {
    double prev = 0.0;
    for (double a = 0.01; a <= 0.5 + 1e-12; a += 0.01) {
        const double h = height_h(NeckSize(std::min(a, 0.5)));
        CHECK(h > prev);
        prev = h;
    }
    CHECK(height_h(NeckSize(1e-6)) == Catch::Approx(1.0).margin(1e-4));
    CHECK(prev == Catch::Approx(pi / 2.0).margin(1e-12));
}

TEST_CASE("period grows like -log a for small necks") {
    for (double a : {0.01, 0.001, 1e-4, 1e-6, 1e-8}) {
        const double tau = period_tau(NeckSize(a));
        CHECK(std::isfinite(tau));
        CHECK(tau > 0.0);
        CHECK(std::abs(tau + std::log(a)) <= 3.0);
    }
    // height stays pinned near 1 in the same limit
    CHECK(height_h(NeckSize(1e-8)) == Catch::Approx(1.0).margin(1e-6));
}
