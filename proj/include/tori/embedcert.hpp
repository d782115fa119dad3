#pragma once

// Embeddedness certificate for normal graphs over the bent tori.
//
// A tubular neighborhood of the base torus is foliated by the leaves
// X + r x N, |r| < r0. Along the area-vector direction the cross-section
// of a leaf at fixed t is, up to translation and dilation, the planar
// radial curve (r1 + r2 sin theta) e^{i theta} with
//   r1 = 1 - r x z'   and   r2 = -eps r x^2 z' ,
// which is a simple star-shaped Jordan curve iff |r2/r1| < 1. A graph
// Y = X + phi N with |phi| < r0 x stays inside the neighborhood, and
// positivity of N . Yt ^ Yth makes it meet each normal segment exactly
// once. Together the three margins certify an embedded torus; each can
// fail independently and the certificate reports all of them.

#include <tori/geometry.hpp>
#include <tori/reduction.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tori {

struct EmbeddingCertificate {
    double r0_used = 0.0;
    double star_shape_margin = 0.0;  // min over rows of 1 - |r2/r1|, worse sign of +-r0
    double normal_proj_min = 0.0;    // min of N . Yt ^ Yth / (|Xt||Xth|), graph and leaves
    double containment_margin = 0.0; // min of r0 - |phi|/x
    bool passed = false;             // all three margins positive
};

// Simplicity margin of the leaf cross-sections at radius r. The row-wise
// ratio r2/r1 is independent of theta; eps = 0 (straight grid) gives
// circular sections and margin 1.
inline double leaf_star_shape(const TorusGrid& grid, double r) {
    const ProfileTable& tbl = *grid.tbl;
    double margin = 1.0;
    for (int i = 0; i < tbl.N_t; ++i) {
        const double xzp = tbl.x[i] * tbl.zp[i];
        const double r1 = 1.0 - r * xzp;
        if (r1 <= 0.0)
            throw std::domain_error("leaf_star_shape: cross-section radius 1 - r x z' <= 0");
        const double r2 = -grid.eps * r * tbl.x[i] * xzp;
        margin = std::min(margin, 1.0 - std::abs(r2 / r1));
    }
    return margin;
}

// Minimum of N . Yt ^ Yth / (|Xt||Xth|) over the leaf Y = X + r x N.
// The derivatives are assembled from the analytic normal jet, so the
// value is exact for any r; a nonpositive minimum means the leaf fails
// to be an immersion with the base orientation.
inline double leaf_immersion(const TorusGrid& grid, double r) {
    const ProfileTable& tbl = *grid.tbl;
    const SurfaceJet base = jet_torus(grid);
    double mn = std::numeric_limits<double>::infinity();
    for (int i = 0; i < base.N_t; ++i) {
        const double x = tbl.x[i], xp = tbl.xp[i];
        for (int j = 0; j < base.N_theta; ++j) {
            const PointJet& b = base.at(i, j);
            const Vec3 Yt = b.Xt + r * xp * b.Nvec + r * x * b.Nt;
            const Vec3 Yth = b.Xth + r * x * b.Nth;
            mn = std::min(mn, b.Nvec.dot(Yt.cross(Yth)) / std::sqrt(b.EE * b.GG));
        }
    }
    return mn;
}

// Full certificate for the graph carried by a reduction result. An empty
// phi is read as the unperturbed torus. Leaf failures (including a radius
// past the star-shape pole) are reported as margin -1, never thrown.
inline EmbeddingCertificate certify(const TorusGrid& grid, const ReductionResult& result,
                                    double r0 = 0.3) {
    if (!(r0 > 0.0)) throw std::invalid_argument("certify: r0 must be positive");
    const ProfileTable& tbl = *grid.tbl;
    const bool has_phi = result.phi.N_t > 0;
    if (has_phi && result.phi.N_t != tbl.N_t)
        throw std::invalid_argument("certify: phi/grid mismatch");

    EmbeddingCertificate cert;
    cert.r0_used = r0;

    cert.containment_margin = r0;
    if (has_phi)
        for (int i = 0; i < result.phi.N_t; ++i)
            for (int j = 0; j < result.phi.N_theta; ++j)
                cert.containment_margin = std::min(
                    cert.containment_margin, r0 - std::abs(result.phi(i, j)) / tbl.x[i]);

    try {
        cert.star_shape_margin =
            std::min(leaf_star_shape(grid, r0), leaf_star_shape(grid, -r0));
    } catch (const std::exception&) {
        cert.star_shape_margin = -1.0;
    }

    try {
        double proj = std::min(leaf_immersion(grid, r0), leaf_immersion(grid, -r0));
        if (has_phi) {
            const SurfaceJet base = jet_torus(grid);
            const SurfaceJet graph = jet_perturbed(base, result.phi);
            for (int i = 0; i < base.N_t; ++i)
                for (int j = 0; j < base.N_theta; ++j) {
                    const PointJet& b = base.at(i, j);
                    const PointJet& p = graph.at(i, j);
                    proj = std::min(proj,
                                    b.Nvec.dot(p.Xt.cross(p.Xth)) / std::sqrt(b.EE * b.GG));
                }
        }
        cert.normal_proj_min = proj;
    } catch (const std::exception&) {
        cert.normal_proj_min = -1.0;
    }

    cert.passed = cert.star_shape_margin > 0.0 && cert.normal_proj_min > 0.0 &&
                  cert.containment_margin > 0.0;
    return cert;
}

} // namespace tori
