#pragma once

// Doubly periodic scalar fields on the (t, theta) parameter torus.
//
// Grid convention used everywhere downstream: row i holds t_i = -tau + i*dt
// for i = 0..N_t-1 (the closing sample t = +tau is identified with row 0),
// column j holds theta_j = -pi + j*dtheta for j = 0..N_theta-1.
//
// The symmetry class of interest is even in t together with the reflection
// theta -> pi - theta (index map j -> N_theta/2 - j); fields produced by
// symmetric data carry the flags, everything else leaves them false.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace tori {

struct SymField {
    int N_t = 0;
    int N_theta = 0;
    bool even_t = false;
    bool theta_mirror = false;
    std::vector<double> v; // row-major, size N_t * N_theta

    SymField() = default;
    SymField(int nt, int nth, double init = 0.0)
        : N_t(nt), N_theta(nth), v(static_cast<size_t>(nt) * nth, init) {
        if (nt <= 0 || nth <= 0) throw std::invalid_argument("SymField: empty grid");
    }

    static int wrap(int i, int n) {
        i %= n;
        return i < 0 ? i + n : i;
    }

    double& operator()(int i, int j) { return v[static_cast<size_t>(i) * N_theta + j]; }
    double operator()(int i, int j) const { return v[static_cast<size_t>(i) * N_theta + j]; }

    double& at(int i, int j) { return (*this)(wrap(i, N_t), wrap(j, N_theta)); }
    double at(int i, int j) const { return (*this)(wrap(i, N_t), wrap(j, N_theta)); }

    bool same_shape(const SymField& o) const { return N_t == o.N_t && N_theta == o.N_theta; }
};

// largest violation of v(i,j) = v(-i mod N_t, j)
inline double deviation_even_t(const SymField& f) {
    double worst = 0.0;
    for (int i = 0; i < f.N_t; ++i) {
        const int im = SymField::wrap(f.N_t - i, f.N_t);
        for (int j = 0; j < f.N_theta; ++j)
            worst = std::max(worst, std::abs(f(i, j) - f(im, j)));
    }
    return worst;
}

// largest violation of v(i,j) = v(i, (N_theta/2 - j) mod N_theta)
inline double deviation_theta_mirror(const SymField& f) {
    double worst = 0.0;
    for (int i = 0; i < f.N_t; ++i)
        for (int j = 0; j < f.N_theta; ++j) {
            const int jm = SymField::wrap(f.N_theta / 2 - j, f.N_theta);
            worst = std::max(worst, std::abs(f(i, j) - f(i, jm)));
        }
    return worst;
}

// measure both symmetries and set the flags accordingly
inline void measure_flags(SymField& f, double tol = 1e-12) {
    f.even_t = deviation_even_t(f) <= tol;
    f.theta_mirror = deviation_theta_mirror(f) <= tol;
}

inline double sup_norm(const SymField& f) {
    double worst = 0.0;
    for (double x : f.v) worst = std::max(worst, std::abs(x));
    return worst;
}

// plain lattice sum times the cell area; exact trapezoid for periodic data
inline double inner_l2(const SymField& f, const SymField& g, double dt, double dtheta) {
    if (!f.same_shape(g)) throw std::invalid_argument("inner_l2: shape mismatch");
    double s = 0.0;
    for (size_t m = 0; m < f.v.size(); ++m) s += f.v[m] * g.v[m];
    return s * dt * dtheta;
}

inline double norm_l2(const SymField& f, double dt, double dtheta) {
    return std::sqrt(inner_l2(f, f, dt, dtheta));
}

// periodic central differences; order 2 or 4
inline SymField diff_t(const SymField& f, double dt, int order = 4) {
    SymField out(f.N_t, f.N_theta);
    for (int i = 0; i < f.N_t; ++i)
        for (int j = 0; j < f.N_theta; ++j) {
            if (order == 4)
                out(i, j) = (-f.at(i + 2, j) + 8.0 * f.at(i + 1, j) - 8.0 * f.at(i - 1, j) +
                             f.at(i - 2, j)) /
                            (12.0 * dt);
            else
                out(i, j) = (f.at(i + 1, j) - f.at(i - 1, j)) / (2.0 * dt);
        }
    return out;
}

inline SymField diff_theta(const SymField& f, double dtheta, int order = 4) {
    SymField out(f.N_t, f.N_theta);
    for (int i = 0; i < f.N_t; ++i)
        for (int j = 0; j < f.N_theta; ++j) {
            if (order == 4)
                out(i, j) = (-f.at(i, j + 2) + 8.0 * f.at(i, j + 1) - 8.0 * f.at(i, j - 1) +
                             f.at(i, j - 2)) /
                            (12.0 * dtheta);
            else
                out(i, j) = (f.at(i, j + 1) - f.at(i, j - 1)) / (2.0 * dtheta);
        }
    return out;
}

inline SymField diff2_t(const SymField& f, double dt, int order = 4) {
    SymField out(f.N_t, f.N_theta);
    for (int i = 0; i < f.N_t; ++i)
        for (int j = 0; j < f.N_theta; ++j) {
            if (order == 4)
                out(i, j) = (-f.at(i + 2, j) + 16.0 * f.at(i + 1, j) - 30.0 * f(i, j) +
                             16.0 * f.at(i - 1, j) - f.at(i - 2, j)) /
                            (12.0 * dt * dt);
            else
                out(i, j) = (f.at(i + 1, j) - 2.0 * f(i, j) + f.at(i - 1, j)) / (dt * dt);
        }
    return out;
}

inline SymField diff2_theta(const SymField& f, double dtheta, int order = 4) {
    SymField out(f.N_t, f.N_theta);
    for (int i = 0; i < f.N_t; ++i)
        for (int j = 0; j < f.N_theta; ++j) {
            if (order == 4)
                out(i, j) = (-f.at(i, j + 2) + 16.0 * f.at(i, j + 1) - 30.0 * f(i, j) +
                             16.0 * f.at(i, j - 1) - f.at(i, j - 2)) /
                            (12.0 * dtheta * dtheta);
            else
                out(i, j) = (f.at(i, j + 1) - 2.0 * f(i, j) + f.at(i, j - 1)) / (dtheta * dtheta);
        }
    return out;
}

} // namespace tori
