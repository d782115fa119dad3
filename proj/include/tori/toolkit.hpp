#pragma once

// Run configuration, mesh assembly and export, profile caching, and JSON
// reports.  Everything the command-line front end needs that is not geometry.
//
// Meshes are quad grids.  One fundamental cell covers a single profile
// period; the closed torus is the cell repeated under rotation by 2 pi/n
// about the x1-axis, which is exactly the map that continues the immersion
// past t = tau.  Vertex (k, i, j) is cell row i, ring angle j, copy k, so
// the closed mesh has n*N_t*N_theta vertices and equally many quads, and
// Euler characteristic 0 by construction; mesh_topology re-derives that
// from the face lists alone as a check on the index arithmetic.

#include <tori/embedcert.hpp>
#include <tori/matching.hpp>

#include <json.hpp>

#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace tori {

using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// run configuration

struct RunConfig {
    double A = -1.0;     // curvature deviation amplitude
    double gamma = 1.0;  // decay exponent, in (0, 2)
    double beta = 0.0;   // reserved shape exponent, echoed into reports
    int n = 0;           // wave number of the bent torus; 0 = straight profile
    double a = 0.0;      // neck size; 0 means "not set"
    bool auto_match = false;  // pick the neck size from the multiplier root
    int N_t = 512;
    int N_theta = 32;
    double tol_fp = 1e-10;
    double tol_match = 1e-6;
    double mu = 1.5;      // weight exponent of the norms, in (1, 2)
    double delta = 1.0;   // weighted-norm window half-width
    double r0 = 0.3;      // tubular radius of the embeddedness certificate
    std::uint64_t seed = 0;
    std::string multipliers = "auto";  // auto | frozen | reduced
    std::string mesh_format = "obj";   // obj | ply
    std::string out_mesh, out_report, out_solution;
    std::string cache_dir;  // empty disables the profile cache

    void validate(bool needs_neck) const {
        if (!(gamma > 0.0 && gamma < 2.0))
            throw std::invalid_argument("RunConfig: gamma outside (0, 2)");
        if (N_t < 32 || N_t % 4 != 0)
            throw std::invalid_argument("RunConfig: N_t must be a multiple of 4, at least 32");
        if (N_theta < 16 || (N_theta & (N_theta - 1)) != 0)
            throw std::invalid_argument("RunConfig: N_theta must be a power of two, at least 16");
        if (multipliers != "auto" && multipliers != "frozen" && multipliers != "reduced")
            throw std::invalid_argument("RunConfig: multipliers must be auto, frozen or reduced");
        if (mesh_format != "obj" && mesh_format != "ply")
            throw std::invalid_argument("RunConfig: mesh_format must be obj or ply");
        if (needs_neck && (a > 0.0) == auto_match)
            throw std::invalid_argument("RunConfig: set exactly one of a > 0 and auto_match");
        if (a < 0.0 || a > 0.5) throw std::invalid_argument("RunConfig: a outside [0, 1/2]");
    }
};

inline ordered_json config_to_json(const RunConfig& c) {
    ordered_json j;
    j["A"] = c.A;
    j["gamma"] = c.gamma;
    j["beta"] = c.beta;
    j["n"] = c.n;
    j["a"] = c.a;
    j["auto_match"] = c.auto_match;
    j["N_t"] = c.N_t;
    j["N_theta"] = c.N_theta;
    j["tol_fp"] = c.tol_fp;
    j["tol_match"] = c.tol_match;
    j["mu"] = c.mu;
    j["delta"] = c.delta;
    j["r0"] = c.r0;
    j["seed"] = c.seed;
    j["multipliers"] = c.multipliers;
    j["mesh_format"] = c.mesh_format;
    j["out_mesh"] = c.out_mesh;
    j["out_report"] = c.out_report;
    j["out_solution"] = c.out_solution;
    j["cache_dir"] = c.cache_dir;
    return j;
}

inline RunConfig config_from_json(const ordered_json& j) {
    RunConfig c;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& k = it.key();
        const auto& v = it.value();
        if (k == "A")
            c.A = v.get<double>();
        else if (k == "gamma")
            c.gamma = v.get<double>();
        else if (k == "beta")
            c.beta = v.get<double>();
        else if (k == "n")
            c.n = v.get<int>();
        else if (k == "a")
            c.a = v.get<double>();
        else if (k == "auto_match")
            c.auto_match = v.get<bool>();
        else if (k == "N_t")
            c.N_t = v.get<int>();
        else if (k == "N_theta")
            c.N_theta = v.get<int>();
        else if (k == "tol_fp")
            c.tol_fp = v.get<double>();
        else if (k == "tol_match")
            c.tol_match = v.get<double>();
        else if (k == "mu")
            c.mu = v.get<double>();
        else if (k == "delta")
            c.delta = v.get<double>();
        else if (k == "r0")
            c.r0 = v.get<double>();
        else if (k == "seed")
            c.seed = v.get<std::uint64_t>();
        else if (k == "multipliers")
            c.multipliers = v.get<std::string>();
        else if (k == "mesh_format")
            c.mesh_format = v.get<std::string>();
        else if (k == "out_mesh")
            c.out_mesh = v.get<std::string>();
        else if (k == "out_report")
            c.out_report = v.get<std::string>();
        else if (k == "out_solution")
            c.out_solution = v.get<std::string>();
        else if (k == "cache_dir")
            c.cache_dir = v.get<std::string>();
        else
            throw std::invalid_argument("RunConfig: unknown key '" + k + "'");
    }
    return c;
}

// ---------------------------------------------------------------------------
// meshes

struct MeshOut {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 4>> quads;
};

// One profile period as an open tube: N_t * N_theta vertices,
// (N_t - 1) * N_theta quads.  phi may be empty for the unperturbed surface.
inline MeshOut build_mesh_cell(const TorusGrid& grid, const SymField& phi = {}) {
    const ProfileTable& tbl = *grid.tbl;
    const bool has_phi = phi.N_t > 0;
    if (has_phi && (phi.N_t != tbl.N_t || phi.N_theta != grid.N_theta))
        throw std::invalid_argument("build_mesh_cell: graph field does not fit the grid");
    SurfaceJet jet = jet_torus(grid);
    MeshOut m;
    m.vertices.reserve(static_cast<size_t>(jet.N_t) * jet.N_theta);
    for (int i = 0; i < jet.N_t; ++i)
        for (int j = 0; j < jet.N_theta; ++j) {
            const PointJet& p = jet.at(i, j);
            m.vertices.push_back(has_phi ? Vec3(p.X + phi(i, j) * p.Nvec) : p.X);
        }
    auto idx = [&](int i, int j) { return i * jet.N_theta + SymField::wrap(j, jet.N_theta); };
    for (int i = 0; i + 1 < jet.N_t; ++i)
        for (int j = 0; j < jet.N_theta; ++j)
            m.quads.push_back({idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)});
    return m;
}

// The closed torus: the cell repeated under rotation by 2 pi/n.  Quad
// orientation follows (t, theta), so the right-hand normal of every face
// agrees with the surface normal used everywhere else.
inline MeshOut build_mesh(const TorusGrid& grid, const SymField& phi = {}) {
    if (grid.n < 4) throw std::invalid_argument("build_mesh: closed mesh needs a bent grid");
    MeshOut cell = build_mesh_cell(grid, phi);
    const int rows = grid.tbl->N_t, N = grid.N_theta, n = grid.n;
    MeshOut m;
    m.vertices.reserve(static_cast<size_t>(n) * rows * N);
    for (int k = 0; k < n; ++k) {
        const Mat3 R = rotation(2.0 * std::numbers::pi * k / n);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < N; ++j)
                m.vertices.push_back(R * cell.vertices[static_cast<size_t>(i) * N + j]);
    }
    auto idx = [&](int k, int i, int j) {
        if (i == rows) {
            k = (k + 1) % n;  // the next copy continues the profile past +tau
            i = 0;
        }
        return (k * rows + i) * N + SymField::wrap(j, N);
    };
    m.quads.reserve(static_cast<size_t>(n) * rows * N);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < N; ++j)
                m.quads.push_back(
                    {idx(k, i, j), idx(k, i + 1, j), idx(k, i + 1, j + 1), idx(k, i, j + 1)});
    return m;
}

struct MeshTopology {
    int V = 0, E = 0, F = 0;
    int chi = 0;
    bool closed = false;    // every edge borders exactly two faces
    bool oriented = false;  // each edge is traversed once per direction
};

inline MeshTopology mesh_topology(const MeshOut& m) {
    MeshTopology t;
    t.V = static_cast<int>(m.vertices.size());
    t.F = static_cast<int>(m.quads.size());
    std::map<std::pair<int, int>, std::pair<int, int>> edges;  // undirected -> (count, signed)
    for (const auto& q : m.quads)
        for (int e = 0; e < 4; ++e) {
            const int u = q[e], v = q[(e + 1) % 4];
            auto key = std::minmax(u, v);
            auto& rec = edges[{key.first, key.second}];
            rec.first += 1;
            rec.second += u < v ? 1 : -1;
        }
    t.E = static_cast<int>(edges.size());
    t.chi = t.V - t.E + t.F;
    t.closed = t.oriented = !edges.empty();
    for (const auto& [k, rec] : edges) {
        if (rec.first != 2) t.closed = false;
        if (rec.second != 0) t.oriented = false;
    }
    return t;
}

inline void export_mesh(const MeshOut& m, const std::string& path, const std::string& format) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("export_mesh: cannot open " + path);
    if (format == "obj") {
        for (const Vec3& v : m.vertices)
            std::fprintf(f, "v %.17g %.17g %.17g\n", v[0], v[1], v[2]);
        for (const auto& q : m.quads)
            std::fprintf(f, "f %d %d %d %d\n", q[0] + 1, q[1] + 1, q[2] + 1, q[3] + 1);
    } else if (format == "ply") {
        std::fprintf(f,
                     "ply\nformat ascii 1.0\nelement vertex %zu\n"
                     "property double x\nproperty double y\nproperty double z\n"
                     "element face %zu\nproperty list uchar int vertex_index\nend_header\n",
                     m.vertices.size(), m.quads.size());
        for (const Vec3& v : m.vertices)
            std::fprintf(f, "%.17g %.17g %.17g\n", v[0], v[1], v[2]);
        for (const auto& q : m.quads) std::fprintf(f, "4 %d %d %d %d\n", q[0], q[1], q[2], q[3]);
    } else {
        std::fclose(f);
        throw std::invalid_argument("export_mesh: format must be obj or ply");
    }
    std::fclose(f);
}

// ---------------------------------------------------------------------------
// triangle-triangle self-intersection screen
//
// Quads are split along the (0,2) diagonal; pairs of triangles sharing a
// vertex index are adjacent on the surface and skipped.  Broad phase is a
// sweep over x-sorted bounding boxes, narrow phase the usual two-plane
// interval test.

namespace detail {

inline bool tri_tri_overlap(const Vec3& a0, const Vec3& a1, const Vec3& a2, const Vec3& b0,
                            const Vec3& b1, const Vec3& b2) {
    const Vec3 n1 = (a1 - a0).cross(a2 - a0);
    double db0 = n1.dot(b0 - a0), db1 = n1.dot(b1 - a0), db2 = n1.dot(b2 - a0);
    if ((db0 > 0 && db1 > 0 && db2 > 0) || (db0 < 0 && db1 < 0 && db2 < 0)) return false;
    const Vec3 n2 = (b1 - b0).cross(b2 - b0);
    double da0 = n2.dot(a0 - b0), da1 = n2.dot(a1 - b0), da2 = n2.dot(a2 - b0);
    if ((da0 > 0 && da1 > 0 && da2 > 0) || (da0 < 0 && da1 < 0 && da2 < 0)) return false;

    const Vec3 dir = n1.cross(n2);
    const double eps = 1e-13 * (n1.norm() + n2.norm());
    if (dir.norm() <= eps * eps) {
        // near-coplanar: project on the dominant axis pair and run a 2D
        // segment/containment test
        int drop = 0;
        Vec3 an = n1.cwiseAbs();
        if (an[1] > an[0]) drop = 1;
        if (an[2] > an[drop]) drop = 2;
        const int u = (drop + 1) % 3, v = (drop + 2) % 3;
        std::array<std::array<double, 2>, 3> A{{{a0[u], a0[v]}, {a1[u], a1[v]}, {a2[u], a2[v]}}};
        std::array<std::array<double, 2>, 3> B{{{b0[u], b0[v]}, {b1[u], b1[v]}, {b2[u], b2[v]}}};
        auto orient = [](const std::array<double, 2>& p, const std::array<double, 2>& q,
                         const std::array<double, 2>& r) {
            return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]);
        };
        for (int e = 0; e < 3; ++e)
            for (int g = 0; g < 3; ++g) {
                const auto &p = A[e], &q = A[(e + 1) % 3], &r = B[g], &s = B[(g + 1) % 3];
                const double o1 = orient(p, q, r), o2 = orient(p, q, s);
                const double o3 = orient(r, s, p), o4 = orient(r, s, q);
                if (o1 * o2 < 0 && o3 * o4 < 0) return true;
            }
        auto inside = [&](const std::array<std::array<double, 2>, 3>& T,
                          const std::array<double, 2>& p) {
            const double s1 = orient(T[0], T[1], p), s2 = orient(T[1], T[2], p),
                         s3 = orient(T[2], T[0], p);
            return (s1 > 0 && s2 > 0 && s3 > 0) || (s1 < 0 && s2 < 0 && s3 < 0);
        };
        return inside(A, B[0]) || inside(B, A[0]);
    }

    // interval of each triangle along the intersection line of the planes
    auto interval = [&](const Vec3& v0, const Vec3& v1, const Vec3& v2, double d0, double d1,
                        double d2, double& lo, double& hi) {
        // order so that v0, v1 sit on one side of the other plane and v2 on
        // the other (or on it)
        Vec3 p0 = v0, p1 = v1, p2 = v2;
        double q0 = d0, q1 = d1, q2 = d2;
        if ((q0 > 0) == (q2 > 0) && (q1 > 0) != (q2 > 0)) {
            std::swap(p1, p2);
            std::swap(q1, q2);
        } else if ((q1 > 0) == (q2 > 0) && (q0 > 0) != (q2 > 0)) {
            std::swap(p0, p2);
            std::swap(q0, q2);
        }
        const double t0 = dir.dot(p0), t1 = dir.dot(p1), t2 = dir.dot(p2);
        const double s0 = t0 + (t2 - t0) * (q0 / (q0 - q2 + (q0 == q2 ? 1e-300 : 0.0)));
        const double s1 = t1 + (t2 - t1) * (q1 / (q1 - q2 + (q1 == q2 ? 1e-300 : 0.0)));
        lo = std::min(s0, s1);
        hi = std::max(s0, s1);
    };
    double alo, ahi, blo, bhi;
    interval(a0, a1, a2, da0, da1, da2, alo, ahi);
    interval(b0, b1, b2, db0, db1, db2, blo, bhi);
    // the projections carry a factor |dir|; demand a geometric overlap
    // length visibly above roundoff so grazing contact between triangles of
    // neighbouring non-planar quads does not count as interpenetration
    double diam2 = 0.0;
    for (const Vec3& e : {Vec3(a1 - a0), Vec3(a2 - a0), Vec3(a2 - a1), Vec3(b1 - b0),
                          Vec3(b2 - b0), Vec3(b2 - b1)})
        diam2 = std::max(diam2, e.squaredNorm());
    return std::min(ahi, bhi) - std::max(alo, blo) > 1e-9 * std::sqrt(diam2) * dir.norm();
}

}  // namespace detail

inline bool mesh_self_intersects(const MeshOut& m) {
    struct Tri {
        std::array<int, 3> v;
        Vec3 lo, hi;
    };
    std::vector<Tri> tris;
    tris.reserve(2 * m.quads.size());
    for (const auto& q : m.quads)
        for (const auto& t :
             {std::array<int, 3>{q[0], q[1], q[2]}, std::array<int, 3>{q[0], q[2], q[3]}}) {
            Tri tr;
            tr.v = t;
            tr.lo = tr.hi = m.vertices[t[0]];
            for (int s = 1; s < 3; ++s) {
                tr.lo = tr.lo.cwiseMin(m.vertices[t[s]]);
                tr.hi = tr.hi.cwiseMax(m.vertices[t[s]]);
            }
            tris.push_back(tr);
        }
    std::vector<int> order(tris.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(),
              [&](int p, int q) { return tris[p].lo[0] < tris[q].lo[0]; });
    for (size_t oi = 0; oi < order.size(); ++oi) {
        const Tri& A = tris[order[oi]];
        for (size_t oj = oi + 1; oj < order.size(); ++oj) {
            const Tri& B = tris[order[oj]];
            if (B.lo[0] > A.hi[0]) break;  // sweep window closed
            if (B.lo[1] > A.hi[1] || B.hi[1] < A.lo[1] || B.lo[2] > A.hi[2] ||
                B.hi[2] < A.lo[2])
                continue;
            bool shares = false;
            for (int s = 0; s < 3 && !shares; ++s)
                for (int r = 0; r < 3; ++r)
                    if (A.v[s] == B.v[r]) {
                        shares = true;
                        break;
                    }
            if (shares) continue;
            if (detail::tri_tri_overlap(m.vertices[A.v[0]], m.vertices[A.v[1]],
                                        m.vertices[A.v[2]], m.vertices[B.v[0]],
                                        m.vertices[B.v[1]], m.vertices[B.v[2]]))
                return true;
        }
    }
    return false;
}

// ---------------------------------------------------------------------------
// profile cache

inline std::uint64_t fnv1a(const void* data, size_t bytes, std::uint64_t seed = 1469598103934665603ull) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (size_t i = 0; i < bytes; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t table_hash(const ProfileTable& tbl) {
    std::uint64_t h = fnv1a(&tbl.gamma_a, sizeof(double));
    h = fnv1a(&tbl.tau, sizeof(double), h);
    h = fnv1a(&tbl.h, sizeof(double), h);
    for (const std::vector<double>* arr : {&tbl.t_grid, &tbl.x, &tbl.xp, &tbl.z, &tbl.zp, &tbl.w0,
                                           &tbl.y0p, &tbl.w1})
        h = fnv1a(arr->data(), arr->size() * sizeof(double), h);
    h = fnv1a(tbl.w0_ghost.data(), 2 * sizeof(double), h);
    return h;
}

inline ordered_json table_to_json(const ProfileTable& tbl) {
    ordered_json j;
    j["schema"] = "tori-profile-1";
    j["integrator"] = "rkf78-1e-12";
    j["a"] = tbl.a.a;
    j["gamma_a"] = tbl.gamma_a;
    j["tau"] = tbl.tau;
    j["h"] = tbl.h;
    j["N_t"] = tbl.N_t;
    j["t_grid"] = tbl.t_grid;
    j["x"] = tbl.x;
    j["xp"] = tbl.xp;
    j["z"] = tbl.z;
    j["zp"] = tbl.zp;
    j["w0"] = tbl.w0;
    j["y0p"] = tbl.y0p;
    j["w1"] = tbl.w1;
    j["w0_ghost"] = std::vector<double>(tbl.w0_ghost.begin(), tbl.w0_ghost.end());
    char hex[20];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(table_hash(tbl)));
    j["hash"] = hex;
    return j;
}

inline ProfileTable table_from_json(const ordered_json& j) {
    if (j.value("schema", "") != "tori-profile-1")
        throw std::runtime_error("table_from_json: unknown schema");
    ProfileTable tbl{NeckSize(j.at("a").get<double>()),
                     j.at("gamma_a").get<double>(),
                     j.at("tau").get<double>(),
                     j.at("h").get<double>(),
                     j.at("N_t").get<int>(),
                     j.at("t_grid").get<std::vector<double>>(),
                     j.at("x").get<std::vector<double>>(),
                     j.at("xp").get<std::vector<double>>(),
                     j.at("z").get<std::vector<double>>(),
                     j.at("zp").get<std::vector<double>>(),
                     j.at("w0").get<std::vector<double>>(),
                     j.at("y0p").get<std::vector<double>>(),
                     j.at("w1").get<std::vector<double>>(),
                     {}};
    const auto ghost = j.at("w0_ghost").get<std::vector<double>>();
    if (ghost.size() != 2) throw std::runtime_error("table_from_json: bad ghost record");
    tbl.w0_ghost = {ghost[0], ghost[1]};
    char hex[20];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(table_hash(tbl)));
    if (j.value("hash", "") != hex)
        throw std::runtime_error("table_from_json: content hash mismatch");
    return tbl;
}

inline std::string default_cache_dir() {
    const char* env = std::getenv("TORI_CACHE_DIR");
    return env ? env : "";
}

// Transparent profile cache.  An unusable cache entry (missing, stale
// schema, hash mismatch) falls back to solving and rewrites the file.
inline ProfileTable cached_profile(NeckSize a, int N_t, const std::string& cache_dir) {
    if (cache_dir.empty()) return solve_profile(a, N_t);
    char name[80];
    std::snprintf(name, sizeof name, "profile_%016llx_%d.json",
                  static_cast<unsigned long long>(std::bit_cast<std::uint64_t>(a.a)), N_t);
    const std::string path = cache_dir + "/" + name;
    {
        std::ifstream in(path);
        if (in) {
            try {
                ordered_json j = ordered_json::parse(in);
                ProfileTable tbl = table_from_json(j);
                if (tbl.a.a == a.a && tbl.N_t == N_t) return tbl;
            } catch (const std::exception&) {
                // fall through to a fresh solve
            }
        }
    }
    ProfileTable tbl = solve_profile(a, N_t);
    std::ofstream out(path);
    if (out) out << table_to_json(tbl).dump(2) << "\n";
    return tbl;
}

// ---------------------------------------------------------------------------
// reports and solution files

inline ordered_json report_skeleton(const RunConfig& cfg) {
    ordered_json j;
    j["schema"] = "tori-report-1";
    j["config"] = config_to_json(cfg);
    j["diagnostics"] = ordered_json::object();
    j["caches"] = ordered_json::array();
    j["timing"] = ordered_json::object();
    return j;
}

inline void write_json(const ordered_json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_json: cannot open " + path);
    out << j.dump(2) << "\n";
    if (!out) throw std::runtime_error("write_json: write failed on " + path);
}

inline ordered_json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_json: cannot open " + path);
    return ordered_json::parse(in);
}

struct SolutionState {
    double a = 0.0;
    int n = 0;
    int N_t = 0, N_theta = 0;
    double A = 0.0, gamma = 0.0, floor_radius = 1.0;
    ReductionResult result;
};

inline ordered_json solution_to_json(const SolutionState& s) {
    ordered_json j;
    j["schema"] = "tori-solution-1";
    j["a"] = s.a;
    j["n"] = s.n;
    j["N_t"] = s.N_t;
    j["N_theta"] = s.N_theta;
    j["A"] = s.A;
    j["gamma"] = s.gamma;
    j["floor_radius"] = s.floor_radius;
    j["lambda0"] = s.result.lambda0;
    j["lambda1"] = s.result.lambda1;
    j["iterations"] = s.result.iterations;
    j["residual_orth"] = s.result.residual_orth;
    j["residual_full"] = s.result.residual_full;
    j["phi_norm_weighted"] = s.result.phi_norm_weighted;
    j["phi"] = s.result.phi.v;
    return j;
}

inline SolutionState solution_from_json(const ordered_json& j) {
    if (j.value("schema", "") != "tori-solution-1")
        throw std::runtime_error("solution_from_json: unknown schema");
    SolutionState s;
    s.a = j.at("a").get<double>();
    s.n = j.at("n").get<int>();
    s.N_t = j.at("N_t").get<int>();
    s.N_theta = j.at("N_theta").get<int>();
    s.A = j.at("A").get<double>();
    s.gamma = j.at("gamma").get<double>();
    s.floor_radius = j.value("floor_radius", 1.0);
    s.result.lambda0 = j.at("lambda0").get<double>();
    s.result.lambda1 = j.at("lambda1").get<double>();
    s.result.iterations = j.at("iterations").get<int>();
    s.result.residual_orth = j.at("residual_orth").get<double>();
    s.result.residual_full = j.at("residual_full").get<double>();
    s.result.phi_norm_weighted = j.at("phi_norm_weighted").get<double>();
    s.result.phi = SymField(s.N_t, s.N_theta);
    const auto vals = j.at("phi").get<std::vector<double>>();
    if (vals.size() != s.result.phi.v.size())
        throw std::runtime_error("solution_from_json: graph field has the wrong size");
    s.result.phi.v = vals;
    s.result.phi.even_t = s.result.phi.theta_mirror = true;
    return s;
}

}  // namespace tori
