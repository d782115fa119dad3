#include <catch2/catch_amalgamated.hpp>

#include <tori/embedcert.hpp>
#include <tori/matching.hpp>

#include <array>
#include <vector>

using namespace tori;
using std::numbers::pi;

namespace {

// Plain O(m^2) segment-crossing check on the closed polygon
// (r1 + r2 sin theta) e^{i theta}, theta on a uniform m-gon.  Adjacent
// edges share a vertex and are skipped; everything else is tested for a
// proper crossing.  Independent of the margin formula under test.
bool cross_section_self_intersects(double r1, double r2, int m) {
    auto orient = [](const std::array<double, 2>& a, const std::array<double, 2>& b,
                     const std::array<double, 2>& c) {
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    };
    std::vector<std::array<double, 2>> pts(m);
    for (int k = 0; k < m; ++k) {
        const double th = -pi + 2.0 * pi * k / m;
        const double rho = r1 + r2 * std::sin(th);
        pts[k] = {rho * std::cos(th), rho * std::sin(th)};
    }
    for (int e = 0; e < m; ++e)
        for (int f = e + 2; f < m; ++f) {
            if (e == 0 && f == m - 1) continue;
            const auto& p = pts[e];
            const auto& q = pts[(e + 1) % m];
            const auto& r = pts[f];
            const auto& s = pts[(f + 1) % m];
            const double o1 = orient(p, q, r), o2 = orient(p, q, s);
            const double o3 = orient(r, s, p), o4 = orient(r, s, q);
            if (o1 * o2 < 0.0 && o3 * o4 < 0.0) return true;
        }
    return false;
}

// Cross-section coefficients of the worst row for a given leaf offset.
std::array<double, 2> worst_row_coeffs(const TorusGrid& grid, double r) {
    const ProfileTable& tbl = *grid.tbl;
    double worst = 2.0, wr1 = 0.0, wr2 = 0.0;
    for (int i = 0; i < tbl.N_t; ++i) {
        const double xzp = tbl.x[i] * tbl.zp[i];
        const double r1 = 1.0 - r * xzp;
        const double r2 = -grid.eps * r * tbl.x[i] * xzp;
        const double m = 1.0 - std::abs(r2 / r1);
        if (m < worst) {
            worst = m;
            wr1 = r1;
            wr2 = r2;
        }
    }
    return {wr1, wr2};
}

}  // namespace

TEST_CASE("zero offset gives the identity margins", "[embedcert]") {
    ProfileTable tbl = solve_profile(NeckSize(0.15), 256);
    TorusGrid grid = TorusGrid::bent(tbl, 16, 16);
    CHECK(leaf_star_shape(grid, 0.0) == 1.0);
    CHECK(std::abs(leaf_immersion(grid, 0.0) - 1.0) < 1e-12);
}

TEST_CASE("star-shape margin separates simple and crossed cross-sections", "[embedcert]") {
    ProfileTable tbl = solve_profile(NeckSize(0.1), 512);
    TorusGrid grid = TorusGrid::bent(tbl, 32, 32);

    SECTION("small offset: positive margin, polygon is simple") {
        const double m = leaf_star_shape(grid, 0.2);
        CHECK(m > 0.98);
        CHECK(m < 0.99);
        auto c = worst_row_coeffs(grid, 0.2);
        CHECK_FALSE(cross_section_self_intersects(c[0], c[1], 512));
    }
    SECTION("large offset: negative margin, polygon crosses itself") {
        const double m = leaf_star_shape(grid, 1.2);
        CHECK(m < -1.3);
        CHECK(m > -1.5);
        auto c = worst_row_coeffs(grid, 1.2);
        CHECK(c[0] > 0.0);  // still short of the pole
        CHECK(cross_section_self_intersects(c[0], c[1], 512));
    }
    SECTION("offset past the pole throws") {
        // max x z' = (1-2a)^... attains 0.81 here, so 1/0.81 < 1.3
        CHECK_THROWS_MATCHES(leaf_star_shape(grid, 1.3), std::domain_error,
                             Catch::Matchers::MessageMatches(
                                 Catch::Matchers::ContainsSubstring("cross-section radius")));
    }
    SECTION("margin decreases with the offset") {
        double prev = 2.0;
        for (int k = 0; k <= 10; ++k) {
            const double m = leaf_star_shape(grid, 0.05 * k);
            CHECK(m <= prev + 1e-15);
            prev = m;
        }
    }
}

TEST_CASE("leaf immersion expands through the scalar mean curvature", "[embedcert]") {
    ProfileTable tbl = solve_profile(NeckSize(0.1), 512);
    TorusGrid grid = TorusGrid::bent(tbl, 32, 32);

    SECTION("small-offset slope is twice the weighted mean curvature") {
        SymField M = mean_curvature(jet_torus(grid));
        double xm_max = 0.0;
        for (int i = 0; i < M.N_t; ++i)
            for (int j = 0; j < M.N_theta; ++j) xm_max = std::max(xm_max, tbl.x[i] * M(i, j));
        auto slope = [&](double r) { return (1.0 - leaf_immersion(grid, r)) / r; };
        // the deficit is an exact quadratic in r, so one Richardson step
        // removes the r^2 term entirely
        const double rich = 2.0 * slope(0.01) - slope(0.02);
        CHECK(std::abs(rich - 2.0 * xm_max) < 1e-10);
    }
    SECTION("agrees with a stencil-differentiated normal graph") {
        SurfaceJet base = jet_torus(grid);
        SymField phi(tbl.N_t, grid.N_theta);
        for (int i = 0; i < phi.N_t; ++i)
            for (int j = 0; j < phi.N_theta; ++j) phi(i, j) = 0.25 * tbl.x[i];
        SurfaceJet pert = jet_perturbed(base, phi);
        double mn = std::numeric_limits<double>::max();
        for (int i = 0; i < base.N_t; ++i)
            for (int j = 0; j < base.N_theta; ++j) {
                const PointJet& b = base.at(i, j);
                const PointJet& p = pert.at(i, j);
                mn = std::min(mn, b.Nvec.dot(p.Xt.cross(p.Xth)) / std::sqrt(b.EE * b.GG));
            }
        CHECK(std::abs(leaf_immersion(grid, 0.25) - mn) < 1e-8);
    }
}

TEST_CASE("normal derivative triple product obeys the curvature identity", "[embedcert]") {
    SECTION("profile grid: pointwise x^2 - gamma^2/x^2") {
        ProfileTable tbl = solve_profile(NeckSize(0.1), 512);
        TorusGrid grid(tbl, 32, 0.0);
        SurfaceJet jet = jet_torus(grid);
        const double ga = tbl.gamma_a;
        double worst = 0.0;
        for (int i = 0; i < jet.N_t; ++i)
            for (int j = 0; j < jet.N_theta; ++j) {
                const PointJet& p = jet.at(i, j);
                const double x = tbl.x[i];
                worst = std::max(worst, std::abs((p.LL * p.NN - p.MM * p.MM) / p.areaElem -
                                                 (x * x - ga * ga / (x * x))));
            }
        CHECK(worst < 1e-10);
    }
    SECTION("profile grid: extreme value 1 - 2a") {
        for (double a : {0.001, 0.01, 0.1, 0.3, 0.5}) {
            ProfileTable tbl = solve_profile(NeckSize(a), 512);
            TorusGrid grid(tbl, 32, 0.0);
            SurfaceJet jet = jet_torus(grid);
            double mx = 0.0;
            for (int i = 0; i < jet.N_t; ++i)
                for (int j = 0; j < jet.N_theta; ++j) {
                    const PointJet& p = jet.at(i, j);
                    mx = std::max(mx, std::abs((p.LL * p.NN - p.MM * p.MM) / p.areaElem));
                }
            CHECK(std::abs(mx - (1.0 - 2.0 * a)) < 1e-8);
        }
    }
    SECTION("bent grid: bounded by the profile value plus a bending term") {
        for (double a : {0.001, 0.01, 0.1, 0.3, 0.5}) {
            ProfileTable tbl = solve_profile(NeckSize(a), 512);
            const int n = std::max(4, (int)std::ceil(pi / (0.1 * tbl.h)));
            TorusGrid grid = TorusGrid::bent(tbl, 32, n);
            SurfaceJet jet = jet_torus(grid);
            double mx = 0.0;
            for (int i = 0; i < jet.N_t; ++i)
                for (int j = 0; j < jet.N_theta; ++j) {
                    const PointJet& p = jet.at(i, j);
                    mx = std::max(mx, std::abs((p.LL * p.NN - p.MM * p.MM) / p.areaElem));
                }
            CHECK(mx <= (1.0 - 2.0 * a) + 0.7 * grid.eps);
        }
    }
}

TEST_CASE("leaf immersion reaches the principal-curvature focal radius", "[embedcert]") {
    // On the profile torus the offset leaves X + r x N degenerate exactly at
    // r = 1: the weighted principal curvatures x(1 +- gamma/x^2) both reach 1
    // at the neck and at the bulge.
    ProfileTable tbl = solve_profile(NeckSize(0.2), 512);
    TorusGrid grid(tbl, 32, 0.0);
    const double ga = tbl.gamma_a;

    SECTION("matches the offset product of principal curvatures") {
        for (double r : {0.3, 0.5, 0.9, 1.05}) {
            double cf = std::numeric_limits<double>::max();
            for (int i = 0; i <= tbl.N_t; ++i) {
                const double x = tbl.x[i];
                cf = std::min(cf, (1.0 - r * (x + ga / x)) * (1.0 - r * (x - ga / x)));
            }
            CHECK(std::abs(leaf_immersion(grid, r) - cf) < 1e-12);
        }
    }
    SECTION("sign flips across r = 1") {
        CHECK(leaf_immersion(grid, 0.9) > 0.04);
        CHECK(leaf_immersion(grid, 0.98) > 0.0);
        CHECK(leaf_immersion(grid, 1.05) < -0.05);
    }
}

TEST_CASE("certificate passes for the unperturbed bent torus", "[embedcert]") {
    ProfileTable tbl = solve_profile(NeckSize(0.2), 256);
    TorusGrid grid = TorusGrid::bent(tbl, 16, 32);
    PrescribedCurvature H(-1.0, 1.0);

    ReductionResult zero_filled = frozen_multipliers(grid, H);
    EmbeddingCertificate cz = certify(grid, zero_filled, 0.3);
    CHECK(cz.passed);
    CHECK(cz.r0_used == 0.3);
    CHECK(cz.containment_margin == 0.3);  // graph sits on the torus itself
    CHECK(cz.star_shape_margin > 0.9);
    CHECK(cz.normal_proj_min > 0.5);

    // an empty result is read as the unperturbed torus and must certify
    // identically
    ReductionResult empty;
    EmbeddingCertificate ce = certify(grid, empty, 0.3);
    CHECK(ce.passed);
    CHECK(ce.containment_margin == cz.containment_margin);
    CHECK(ce.star_shape_margin == cz.star_shape_margin);
    CHECK(ce.normal_proj_min == cz.normal_proj_min);
}

TEST_CASE("certificate tracks a solved graph", "[embedcert]") {
    ProfileTable tbl = solve_profile(NeckSize(0.2), 256);
    TorusGrid grid = TorusGrid::bent(tbl, 16, 32);
    PrescribedCurvature H(-1.0, 1.0);
    ReductionResult sol = fixed_point(grid, H, ReductionOptions{});

    double sup_ratio = 0.0;
    for (int i = 0; i < sol.phi.N_t; ++i)
        for (int j = 0; j < sol.phi.N_theta; ++j)
            sup_ratio = std::max(sup_ratio, std::abs(sol.phi(i, j)) / tbl.x[i]);
    REQUIRE(sup_ratio < 0.3);

    EmbeddingCertificate c = certify(grid, sol, 0.3);
    CHECK(c.passed);
    CHECK(std::abs(c.containment_margin - (0.3 - sup_ratio)) < 1e-12);
    CHECK(c.star_shape_margin > 0.9);
    CHECK(c.normal_proj_min > 0.5);
    CHECK(c.normal_proj_min < 0.65);
}

TEST_CASE("containment breach fails the certificate", "[embedcert]") {
    ProfileTable tbl = solve_profile(NeckSize(0.2), 256);
    TorusGrid grid = TorusGrid::bent(tbl, 16, 32);

    ReductionResult fat;
    fat.phi = SymField(tbl.N_t, grid.N_theta);
    for (int i = 0; i < fat.phi.N_t; ++i)
        for (int j = 0; j < fat.phi.N_theta; ++j) fat.phi(i, j) = 1.5 * 0.3 * tbl.x[i];

    EmbeddingCertificate c = certify(grid, fat, 0.3);
    CHECK_FALSE(c.passed);
    CHECK(std::abs(c.containment_margin - (-0.15)) < 1e-12);
    // the other two margins are still reported, and still healthy
    CHECK(c.star_shape_margin > 0.9);
    CHECK(c.normal_proj_min > 0.0);
}

TEST_CASE("certificate rejects bad arguments", "[embedcert]") {
    ProfileTable tbl = solve_profile(NeckSize(0.2), 256);
    TorusGrid grid = TorusGrid::bent(tbl, 16, 32);
    ReductionResult empty;
    CHECK_THROWS_AS(certify(grid, empty, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(certify(grid, empty, -0.1), std::invalid_argument);

    ReductionResult mis;
    mis.phi = SymField(64, grid.N_theta);
    CHECK_THROWS_AS(certify(grid, mis, 0.3), std::invalid_argument);
}

TEST_CASE("largest certified offset sits near the focal bound", "[embedcert]") {
    ProfileTable tbl = solve_profile(NeckSize(0.2), 256);
    ReductionResult empty;
    for (int n : {8, 32}) {
        TorusGrid grid = TorusGrid::bent(tbl, 16, n);
        double best = 0.0;
        bool contiguous = true, seen_fail = false;
        for (int k = 1; k <= 24; ++k) {
            EmbeddingCertificate c = certify(grid, empty, 0.05 * k);
            if (c.passed) {
                if (seen_fail) contiguous = false;
                best = 0.05 * k;
            } else {
                seen_fail = true;
            }
        }
        CHECK(contiguous);
        CHECK(best >= 0.85);
        CHECK(best < 1.0);
    }
}
