#pragma once

// Complete elliptic integrals K, E by the arithmetic-geometric mean,
// plus the unduloid period/height built on them.
//
// Accuracy note: every Modulus carries kprime2 = 1 - k^2 explicitly, so the
// AGM can be seeded with sqrt(kprime2) without the cancellation that
// recomputing 1 - k^2 would cost when k -> 1 (the small neck regime).

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace tori {

struct Modulus {
    double k;        // in [0,1); k = 1 allowed only for ellipE
    double kprime2;  // 1 - k^2, stored exactly by the producer

    Modulus(double k_, double kprime2_) : k(k_), kprime2(kprime2_) {
        if (!(k >= 0.0) || !(k <= 1.0))
            throw std::domain_error("Modulus: k outside [0,1]");
        if (!(kprime2 >= 0.0))
            throw std::domain_error("Modulus: kprime2 negative");
        if (std::abs(k * k + kprime2 - 1.0) > 1e-14)
            throw std::domain_error("Modulus: k^2 + kprime2 != 1");
    }

    static Modulus from_k(double k) { return Modulus(k, 1.0 - k * k); }
    // k recovered from the complement; fine since k is then near 1 and enters
    // only through k^2 = 1 - kprime2
    static Modulus from_kprime2(double kp2) {
        return Modulus(std::sqrt(std::max(0.0, 1.0 - kp2)), kp2);
    }
};

namespace detail {

struct AgmResult {
    double K;    // pi / (2 * agm)
    double csum; // sum 2^(n-1) c_n^2, for E
};

inline AgmResult agm_iterate(double k, double kprime) {
    double a = 1.0, b = kprime, c = k;
    double csum = 0.5 * c * c;
    double pow2 = 0.5;
    int n = 0;
    for (; n < 40; ++n) {
        if (std::abs(c) <= 1e-15 * a) break;
        const double an = 0.5 * (a + b);
        c = 0.5 * (a - b);
        b = std::sqrt(a * b);
        a = an;
        pow2 *= 2.0;
        csum += pow2 * c * c;
    }
    if (n == 40)
        throw std::runtime_error("agm_iterate: no convergence in 40 iterations");
    return {std::numbers::pi / (2.0 * a), csum};
}

} // namespace detail

// K(k), relative error <= 1e-13
inline double ellipK(const Modulus& m) {
    if (m.k >= 1.0) throw std::domain_error("ellipK: k >= 1");
    return detail::agm_iterate(m.k, std::sqrt(m.kprime2)).K;
}

// E(k), relative error <= 1e-13; E(1) = 1 exactly
inline double ellipE(const Modulus& m) {
    if (m.k == 1.0 || m.kprime2 == 0.0) return 1.0;
    const auto r = detail::agm_iterate(m.k, std::sqrt(m.kprime2));
    return r.K * (1.0 - r.csum);
}

// Neck-size a in (0, 1/2].  a = 0 degenerates to spheres, a = 1/2 is the
// cylinder.  gamma = a(1-a).
struct NeckSize {
    double a;

    explicit NeckSize(double a_) : a(a_) {
        if (!(a > 0.0) || !(a <= 0.5))
            throw std::domain_error("NeckSize: a outside (0, 1/2], got " + std::to_string(a_));
    }

    double gamma() const { return a * (1.0 - a); }

    // modulus governing the conformal period: complement 4a(1-a) is exact
    Modulus period_modulus() const { return Modulus(1.0 - 2.0 * a, 4.0 * a * (1.0 - a)); }

    // modulus of the profile itself, complement (a/(1-a))^2 exact
    Modulus profile_modulus() const {
        const double r = a / (1.0 - a);
        return Modulus::from_kprime2(r * r);
    }
};

// half-period tau of the conformal unduloid profile
inline double period_tau(const NeckSize& a) { return 2.0 * ellipK(a.period_modulus()); }

// half-height h = z(tau); increases from 1 (spheres) to pi/2 (cylinder)
inline double height_h(const NeckSize& a) { return ellipE(a.period_modulus()); }

} // namespace tori
