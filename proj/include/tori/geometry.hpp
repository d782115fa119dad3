#pragma once

// Surface jets for the straight unduloid, the bent torus, and normal
// perturbations, with fundamental forms and curvatures.
//
// Everything about the base surfaces is analytic.  A point of the bent
// torus is X = R(eps*z(t)) P(t,theta) with R a rotation about the x1-axis
// and P the body-frame position [x cos(theta), 1/eps + x sin(theta), 0];
// the straight case uses P = [x cos(theta), x sin(theta), z] and R = I.
// Derivatives pass through R by
//   F_t   = R(eps z' J P + P_t)
//   F_tt  = R(eps z'' J P + (eps z')^2 J J P + 2 eps z' J P_t + P_tt)
//   F_tth = R(eps z' J P_th + P_tth),   F_th = R P_th,  F_thth = R P_thth
// where J u = (0, -u3, u2) generates the rotation.  The same rules applied
// to the body-frame unit normal give the full second-order jet of the
// Gauss map, so perturbed surfaces Y = X + phi N need finite differences
// for phi only.
//
// The normal points toward the profile axis; with it the unduloid has
// mean curvature +1.

#include <tori/profile.hpp>
#include <tori/symfield.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace tori {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// value and partial derivatives through second order in (t, theta)
struct Jet2 {
    double v = 0, dt = 0, dq = 0, dtt = 0, dtq = 0, dqq = 0;

    static Jet2 c(double val) { return {val, 0, 0, 0, 0, 0}; }
};

inline Jet2 operator+(const Jet2& a, const Jet2& b) {
    return {a.v + b.v, a.dt + b.dt, a.dq + b.dq, a.dtt + b.dtt, a.dtq + b.dtq, a.dqq + b.dqq};
}
inline Jet2 operator-(const Jet2& a, const Jet2& b) {
    return {a.v - b.v, a.dt - b.dt, a.dq - b.dq, a.dtt - b.dtt, a.dtq - b.dtq, a.dqq - b.dqq};
}
inline Jet2 operator*(const Jet2& a, const Jet2& b) {
    return {a.v * b.v,
            a.dt * b.v + a.v * b.dt,
            a.dq * b.v + a.v * b.dq,
            a.dtt * b.v + 2.0 * a.dt * b.dt + a.v * b.dtt,
            a.dtq * b.v + a.dt * b.dq + a.dq * b.dt + a.v * b.dtq,
            a.dqq * b.v + 2.0 * a.dq * b.dq + a.v * b.dqq};
}
inline Jet2 operator*(double c, const Jet2& a) {
    return {c * a.v, c * a.dt, c * a.dq, c * a.dtt, c * a.dtq, c * a.dqq};
}
inline Jet2 operator-(const Jet2& a) { return -1.0 * a; }

inline Jet2 recip(const Jet2& u) {
    const double w = u.v, w2 = w * w, w3 = w2 * w;
    return {1.0 / w,
            -u.dt / w2,
            -u.dq / w2,
            (2.0 * u.dt * u.dt - w * u.dtt) / w3,
            (2.0 * u.dt * u.dq - w * u.dtq) / w3,
            (2.0 * u.dq * u.dq - w * u.dqq) / w3};
}

inline Jet2 sqrtj(const Jet2& u) {
    const double s = std::sqrt(u.v), s3 = s * s * s;
    return {s,
            u.dt / (2.0 * s),
            u.dq / (2.0 * s),
            u.dtt / (2.0 * s) - u.dt * u.dt / (4.0 * s3),
            u.dtq / (2.0 * s) - u.dt * u.dq / (4.0 * s3),
            u.dqq / (2.0 * s) - u.dq * u.dq / (4.0 * s3)};
}

// rotation about the x1-axis
inline Mat3 rotation(double sigma) {
    const double c = std::cos(sigma), s = std::sin(sigma);
    Mat3 R;
    R << 1, 0, 0, 0, c, -s, 0, s, c;
    return R;
}

struct TorusGrid {
    const ProfileTable* tbl;
    int N_theta;
    double eps; // 0 selects the straight unduloid
    int n;      // 0 when no discrete symmetry is attached

    TorusGrid(const ProfileTable& t, int N_theta_, double eps_)
        : tbl(&t), N_theta(N_theta_), eps(eps_), n(0) {
        validate();
    }

    // bent torus closing up after n period cells: eps = pi/(n h)
    static TorusGrid bent(const ProfileTable& t, int N_theta_, int n_) {
        if (n_ < 4) throw std::invalid_argument("TorusGrid: n < 4");
        TorusGrid g(t, N_theta_, std::numbers::pi / (n_ * t.h));
        g.n = n_;
        return g;
    }

    double dtheta() const { return 2.0 * std::numbers::pi / N_theta; }
    double theta(int j) const { return -std::numbers::pi + j * dtheta(); }

  private:
    void validate() const {
        if (N_theta < 16 || (N_theta & (N_theta - 1)) != 0)
            throw std::invalid_argument("TorusGrid: N_theta must be a power of two >= 16");
        if (eps < 0.0) throw std::invalid_argument("TorusGrid: eps < 0");
    }
};

struct PointJet {
    Vec3 X, Xt, Xth, Xtt, Xtth, Xthth;
    Vec3 Nvec, Nt, Nth, Ntt, Ntth, Nthth;
    double EE, FF, GG;       // first fundamental form
    double LL, MM, NN;       // second fundamental form
    double areaElem;         // |Xt ^ Xth|
};

struct SurfaceJet {
    int N_t, N_theta;
    double eps, tau, dt, dtheta;
    int n;
    std::vector<PointJet> pts; // row-major N_t x N_theta

    PointJet& at(int i, int j) { return pts[static_cast<size_t>(i) * N_theta + j]; }
    const PointJet& at(int i, int j) const { return pts[static_cast<size_t>(i) * N_theta + j]; }
};

namespace detail {

inline Vec3 rotgen(const Vec3& u) { return {0.0, -u[2], u[1]}; }           // J u
inline Vec3 rotgen2(const Vec3& u) { return {0.0, -u[1], -u[2]}; }         // J J u

struct JetVec {
    Jet2 c[3];
    Vec3 val() const { return {c[0].v, c[1].v, c[2].v}; }
    Vec3 d_t() const { return {c[0].dt, c[1].dt, c[2].dt}; }
    Vec3 d_q() const { return {c[0].dq, c[1].dq, c[2].dq}; }
    Vec3 d_tt() const { return {c[0].dtt, c[1].dtt, c[2].dtt}; }
    Vec3 d_tq() const { return {c[0].dtq, c[1].dtq, c[2].dtq}; }
    Vec3 d_qq() const { return {c[0].dqq, c[1].dqq, c[2].dqq}; }
};

// push a body-frame jet through X = R(eps z) P
inline void world(const Mat3& R, double eps, double zp, double zpp, const JetVec& P, Vec3& F,
                  Vec3& Ft, Vec3& Fq, Vec3& Ftt, Vec3& Ftq, Vec3& Fqq) {
    const Vec3 P0 = P.val();
    const double ezp = eps * zp;
    F = R * P0;
    Ft = R * (ezp * rotgen(P0) + P.d_t());
    Fq = R * P.d_q();
    Ftt = R * (eps * zpp * rotgen(P0) + ezp * ezp * rotgen2(P0) + 2.0 * ezp * rotgen(P.d_t()) +
               P.d_tt());
    Ftq = R * (ezp * rotgen(P.d_q()) + P.d_tq());
    Fqq = R * P.d_qq();
}

inline SurfaceJet assemble(const TorusGrid& g) {
    const ProfileTable& tbl = *g.tbl;
    const bool straight = g.eps == 0.0;
    const double eps = g.eps;

    if (!straight) {
        double xmax = 0.0;
        for (double xv : tbl.x) xmax = std::max(xmax, xv);
        if (eps * xmax >= 1.0)
            throw std::domain_error("jet_torus: eps*max(x) >= 1, tube reaches the axis");
    }

    SurfaceJet out{tbl.N_t, g.N_theta, eps, tbl.tau, tbl.dt(), g.dtheta(), g.n, {}};
    out.pts.resize(static_cast<size_t>(tbl.N_t) * g.N_theta);

    const double gamma = tbl.gamma_a;
    for (int i = 0; i < tbl.N_t; ++i) {
        const double x = tbl.x[i], xp = tbl.xp[i], z = tbl.z[i], zp = tbl.zp[i];
        const double xpp = (1.0 - 2.0 * gamma) * x - 2.0 * x * x * x;
        const double x3p = (1.0 - 2.0 * gamma) * xp - 6.0 * x * x * xp;
        const double zpp = 2.0 * x * xp;
        const double z3p = 2.0 * xp * xp + 2.0 * x * xpp;

        const Jet2 Jx{x, xp, 0, xpp, 0, 0};
        const Jet2 Jxp{xp, xpp, 0, x3p, 0, 0};
        const Jet2 Jzp{zp, zpp, 0, z3p, 0, 0};
        const Jet2 Jz{z, zp, 0, zpp, 0, 0};

        const Mat3 R = straight ? Mat3(Mat3::Identity()) : rotation(eps * z);

        for (int j = 0; j < g.N_theta; ++j) {
            const double th = g.theta(j);
            const Jet2 Jsin{std::sin(th), 0, std::cos(th), 0, 0, -std::sin(th)};
            const Jet2 Jcos{std::cos(th), 0, -std::sin(th), 0, 0, -std::cos(th)};

            JetVec P, M;
            if (straight) {
                P.c[0] = Jx * Jcos;
                P.c[1] = Jx * Jsin;
                P.c[2] = Jz;
                // unit normal (-z' cos, -z' sin, x')/x, unit by conformality
                const Jet2 s = recip(Jx);
                M.c[0] = -(Jzp * Jcos * s);
                M.c[1] = -(Jzp * Jsin * s);
                M.c[2] = Jxp * s;
            } else {
                const Jet2 phi = Jx * Jsin;
                if (1.0 + eps * phi.v <= 0.0)
                    throw std::domain_error("jet_torus: 1 + eps*x*sin(theta) <= 0");
                P.c[0] = Jx * Jcos;
                P.c[1] = Jet2::c(1.0 / eps) + Jx * Jsin;
                P.c[2] = Jet2::c(0.0);
                const Jet2 w = Jzp * recip(Jx);
                const Jet2 psi = (2.0 * (phi * w * w)) + eps * (phi * phi * w * w);
                const Jet2 one_ephi = Jet2::c(1.0) + eps * phi;
                const Jet2 s = recip(Jx * sqrtj(Jet2::c(1.0) + eps * psi));
                M.c[0] = -(Jzp * one_ephi * Jcos * s);
                M.c[1] = -(Jzp * one_ephi * Jsin * s);
                M.c[2] = Jxp * s;
            }

            PointJet& pt = out.at(i, j);
            world(R, eps, zp, zpp, P, pt.X, pt.Xt, pt.Xth, pt.Xtt, pt.Xtth, pt.Xthth);
            world(R, eps, zp, zpp, M, pt.Nvec, pt.Nt, pt.Nth, pt.Ntt, pt.Ntth, pt.Nthth);

            pt.EE = pt.Xt.squaredNorm();
            pt.FF = pt.Xt.dot(pt.Xth);
            pt.GG = pt.Xth.squaredNorm();
            pt.LL = pt.Xtt.dot(pt.Nvec);
            pt.MM = pt.Xtth.dot(pt.Nvec);
            pt.NN = pt.Xthth.dot(pt.Nvec);
            pt.areaElem = pt.Xt.cross(pt.Xth).norm();
            if (pt.EE * pt.GG - pt.FF * pt.FF <= 0.0) {
                std::ostringstream msg;
                msg << "jet assembly: immersion fails at (i=" << i << ", j=" << j << ")";
                throw std::runtime_error(msg.str());
            }
        }
    }
    return out;
}

} // namespace detail

inline SurfaceJet jet_unduloid(const TorusGrid& g) {
    if (g.eps != 0.0) throw std::invalid_argument("jet_unduloid: grid has eps != 0");
    return detail::assemble(g);
}

inline SurfaceJet jet_torus(const TorusGrid& g) { return detail::assemble(g); }

// Y = X + phi N.  The base jets are analytic; phi is differentiated with
// fourth-order periodic central stencils.  Derivatives of the new normal
// are likewise numerical (the only consumers are diagnostics).
inline SurfaceJet jet_perturbed(const SurfaceJet& base, const SymField& phi) {
    if (phi.N_t != base.N_t || phi.N_theta != base.N_theta)
        throw std::invalid_argument("jet_perturbed: field/grid mismatch");
    const double dt = base.dt, dq = base.dtheta;
    const SymField ft = diff_t(phi, dt), fq = diff_theta(phi, dq);
    const SymField ftt = diff2_t(phi, dt), fqq = diff2_theta(phi, dq);
    const SymField ftq = diff_theta(ft, dq);

    SurfaceJet out = base;
    for (int i = 0; i < base.N_t; ++i)
        for (int j = 0; j < base.N_theta; ++j) {
            const PointJet& b = base.at(i, j);
            PointJet& pt = out.at(i, j);
            const double p = phi(i, j);
            pt.X = b.X + p * b.Nvec;
            pt.Xt = b.Xt + ft(i, j) * b.Nvec + p * b.Nt;
            pt.Xth = b.Xth + fq(i, j) * b.Nvec + p * b.Nth;
            pt.Xtt = b.Xtt + ftt(i, j) * b.Nvec + 2.0 * ft(i, j) * b.Nt + p * b.Ntt;
            pt.Xtth = b.Xtth + ftq(i, j) * b.Nvec + ft(i, j) * b.Nth + fq(i, j) * b.Nt + p * b.Ntth;
            pt.Xthth = b.Xthth + fqq(i, j) * b.Nvec + 2.0 * fq(i, j) * b.Nth + p * b.Nthth;

            const Vec3 cr = pt.Xt.cross(pt.Xth);
            pt.areaElem = cr.norm();
            pt.EE = pt.Xt.squaredNorm();
            pt.FF = pt.Xt.dot(pt.Xth);
            pt.GG = pt.Xth.squaredNorm();
            if (pt.EE * pt.GG - pt.FF * pt.FF <= 0.0 || pt.areaElem == 0.0) {
                std::ostringstream msg;
                msg << "jet_perturbed: immersion fails at (i=" << i << ", j=" << j << ")";
                throw std::runtime_error(msg.str());
            }
            pt.Nvec = cr / pt.areaElem;
            pt.LL = pt.Xtt.dot(pt.Nvec);
            pt.MM = pt.Xtth.dot(pt.Nvec);
            pt.NN = pt.Xthth.dot(pt.Nvec);
        }

    // numerical first/second derivatives of the perturbed normal
    for (int comp = 0; comp < 3; ++comp) {
        SymField nc(base.N_t, base.N_theta);
        for (int i = 0; i < base.N_t; ++i)
            for (int j = 0; j < base.N_theta; ++j) nc(i, j) = out.at(i, j).Nvec[comp];
        const SymField nt = diff_t(nc, dt), nq = diff_theta(nc, dq);
        const SymField ntt = diff2_t(nc, dt), nqq = diff2_theta(nc, dq);
        const SymField ntq = diff_theta(nt, dq);
        for (int i = 0; i < base.N_t; ++i)
            for (int j = 0; j < base.N_theta; ++j) {
                PointJet& pt = out.at(i, j);
                pt.Nt[comp] = nt(i, j);
                pt.Nth[comp] = nq(i, j);
                pt.Ntt[comp] = ntt(i, j);
                pt.Ntth[comp] = ntq(i, j);
                pt.Nthth[comp] = nqq(i, j);
            }
    }
    return out;
}

inline SymField mean_curvature(const SurfaceJet& jet) {
    SymField out(jet.N_t, jet.N_theta);
    for (int i = 0; i < jet.N_t; ++i)
        for (int j = 0; j < jet.N_theta; ++j) {
            const PointJet& p = jet.at(i, j);
            const double det = p.EE * p.GG - p.FF * p.FF;
            if (det < 1e-14) throw std::runtime_error("mean_curvature: degenerate first form");
            out(i, j) = (p.EE * p.NN - 2.0 * p.FF * p.MM + p.GG * p.LL) / (2.0 * det);
        }
    measure_flags(out);
    return out;
}

inline SymField gauss_curvature(const SurfaceJet& jet) {
    SymField out(jet.N_t, jet.N_theta);
    for (int i = 0; i < jet.N_t; ++i)
        for (int j = 0; j < jet.N_theta; ++j) {
            const PointJet& p = jet.at(i, j);
            const double det = p.EE * p.GG - p.FF * p.FF;
            if (det < 1e-14) throw std::runtime_error("gauss_curvature: degenerate first form");
            out(i, j) = (p.LL * p.NN - p.MM * p.MM) / det;
        }
    measure_flags(out);
    return out;
}

} // namespace tori
