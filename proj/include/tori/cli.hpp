#pragma once

// Command-line front end. Subcommands mirror the pipeline: profile, surface,
// solve, match, certify, export, selftest. Every run can echo its full
// configuration, diagnostics and profile-cache provenance into a JSON report;
// failures exit nonzero with a machine-readable error record on stderr. A
// computed negative result (a certificate that fails) is not a command
// failure and exits zero with passed = false in the output.
//
// A --config file loads first and explicit flags override it, because the
// flags are bound directly into the same RunConfig the file fills.

#include <tori/selftest.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

namespace tori {

namespace cli_detail {

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double elapsed() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

inline std::string resolve_cache(const RunConfig& cfg) {
    return cfg.cache_dir.empty() ? default_cache_dir() : cfg.cache_dir;
}

// every profile load is recorded with its content hash, for the report
struct CacheLog {
    std::vector<ordered_json> entries;

    ProfileTable load(NeckSize a, int N_t, const RunConfig& cfg) {
        ProfileTable tbl = cached_profile(a, N_t, resolve_cache(cfg));
        char hex[17];
        std::snprintf(hex, sizeof hex, "%016llx",
                      static_cast<unsigned long long>(table_hash(tbl)));
        entries.push_back(ordered_json{{"a", a.a}, {"N_t", N_t}, {"hash", hex}});
        return tbl;
    }
};

inline void finish_report(ordered_json rep, const CacheLog& log, const Timer& t,
                          const std::string& path) {
    if (path.empty()) return;
    rep["caches"] = log.entries;
    rep["timing"]["wall_s"] = t.elapsed();
    write_json(rep, path);
}

inline MultiplierMode mode_of(const std::string& s) {
    if (s == "reduced") return MultiplierMode::reduced;
    if (s == "frozen") return MultiplierMode::frozen;
    return MultiplierMode::automatic;
}

inline void require_wave_number(const RunConfig& cfg, const char* cmd) {
    if (cfg.n < 4)
        throw std::invalid_argument(std::string(cmd) + ": wave number n must be at least 4");
}

inline ordered_json certificate_json(const EmbeddingCertificate& c) {
    return ordered_json{{"r0", c.r0_used},
                        {"star_shape_margin", c.star_shape_margin},
                        {"normal_proj_min", c.normal_proj_min},
                        {"containment_margin", c.containment_margin},
                        {"passed", c.passed}};
}

inline void print_certificate(const EmbeddingCertificate& c) {
    std::printf("certificate r0 = %g: star %.6f, projection %.6f, containment %.6f -> %s\n",
                c.r0_used, c.star_shape_margin, c.normal_proj_min, c.containment_margin,
                c.passed ? "passed" : "FAILED");
}

inline int run_profile(const RunConfig& cfg, const std::string& table_out) {
    cfg.validate(true);
    if (cfg.auto_match)
        throw std::invalid_argument("profile: needs an explicit --a, not auto-match");
    Timer t;
    CacheLog log;
    ProfileTable tbl = log.load(NeckSize(cfg.a), cfg.N_t, cfg);
    double conf = 0.0, min_w = 1e300;
    for (int i = 0; i <= tbl.N_t; ++i) {
        const double x = tbl.x[i], xp = tbl.xp[i], zp = tbl.zp[i];
        conf = std::max(conf, std::abs(xp * xp + zp * zp - x * x));
        min_w = std::min(min_w, zp / x);
    }
    const double r0 = kernel_residual_w0(tbl), r1 = kernel_residual_w1(tbl);
    std::printf("a = %.17g\n", cfg.a);
    std::printf("gamma = %.17g\n", tbl.gamma_a);
    std::printf("tau = %.17g\n", tbl.tau);
    std::printf("h = %.17g\n", tbl.h);
    std::printf("conformality deviation = %.3e\n", conf);
    std::printf("min z'/x = %.12g (2 sqrt(gamma) = %.12g)\n", min_w,
                2.0 * std::sqrt(tbl.gamma_a));
    std::printf("kernel residuals: w0 %.3e, w1 %.3e\n", r0, r1);
    if (!table_out.empty()) write_json(table_to_json(tbl), table_out);
    ordered_json rep = report_skeleton(cfg);
    rep["diagnostics"] = ordered_json{{"tau", tbl.tau},
                                      {"h", tbl.h},
                                      {"gamma", tbl.gamma_a},
                                      {"conformality", conf},
                                      {"min_w", min_w},
                                      {"kernel_residual_w0", r0},
                                      {"kernel_residual_w1", r1}};
    finish_report(std::move(rep), log, t, cfg.out_report);
    return 0;
}

inline int run_surface(const RunConfig& cfg, bool cell) {
    cfg.validate(true);
    if (cfg.auto_match)
        throw std::invalid_argument("surface: needs an explicit --a, not auto-match");
    require_wave_number(cfg, "surface");
    Timer t;
    CacheLog log;
    ProfileTable tbl = log.load(NeckSize(cfg.a), cfg.N_t, cfg);
    TorusGrid grid = TorusGrid::bent(tbl, cfg.N_theta, cfg.n);
    SymField M = mean_curvature(jet_torus(grid));
    double dev = 0.0;
    for (double v : M.v) dev = std::max(dev, std::abs(v - 1.0));
    MeshOut mesh = cell ? build_mesh_cell(grid) : build_mesh(grid);
    MeshTopology top = mesh_topology(mesh);
    if (!cell && !(top.closed && top.oriented && top.chi == 0))
        throw std::runtime_error("surface: assembled mesh is not a closed oriented torus");
    if (!cfg.out_mesh.empty()) export_mesh(mesh, cfg.out_mesh, cfg.mesh_format);
    std::printf("eps = %.12g\n", grid.eps);
    std::printf("max |M - 1| = %.6e\n", dev);
    std::printf("mesh: V %d, E %d, F %d, chi %d%s\n", top.V, top.E, top.F, top.chi,
                cell ? " (open cell)" : "");
    ordered_json rep = report_skeleton(cfg);
    rep["diagnostics"] =
        ordered_json{{"eps", grid.eps},
                     {"max_mean_curvature_dev", dev},
                     {"mesh", ordered_json{{"V", top.V},
                                           {"E", top.E},
                                           {"F", top.F},
                                           {"chi", top.chi},
                                           {"closed", top.closed},
                                           {"oriented", top.oriented}}}};
    finish_report(std::move(rep), log, t, cfg.out_report);
    return 0;
}

inline int run_solve(const RunConfig& cfg) {
    cfg.validate(true);
    if (cfg.auto_match)
        throw std::invalid_argument("solve: needs an explicit --a; use match for auto-match");
    require_wave_number(cfg, "solve");
    Timer t;
    CacheLog log;
    ProfileTable tbl = log.load(NeckSize(cfg.a), cfg.N_t, cfg);
    TorusGrid grid = TorusGrid::bent(tbl, cfg.N_theta, cfg.n);
    PrescribedCurvature H(cfg.A, cfg.gamma);
    ReductionOptions opts;
    opts.tol_fp = cfg.tol_fp;
    opts.norm_spec = WeightedNormSpec(cfg.mu, cfg.delta);
    ReductionResult res = fixed_point(grid, H, opts);
    std::printf("iterations = %d\n", res.iterations);
    std::printf("lambda0 = %.12e\n", res.lambda0);
    std::printf("lambda1 = %.12e\n", res.lambda1);
    std::printf("residual_orth = %.3e\n", res.residual_orth);
    std::printf("residual_full = %.3e\n", res.residual_full);
    std::printf("phi_norm_weighted = %.12e\n", res.phi_norm_weighted);
    if (!cfg.out_solution.empty()) {
        SolutionState st{cfg.a, cfg.n, cfg.N_t, cfg.N_theta, cfg.A, cfg.gamma, H.floor_radius,
                         res};
        write_json(solution_to_json(st), cfg.out_solution);
    }
    if (!cfg.out_mesh.empty()) export_mesh(build_mesh(grid, res.phi), cfg.out_mesh,
                                           cfg.mesh_format);
    ordered_json rep = report_skeleton(cfg);
    ordered_json trace = ordered_json::array();
    for (const IterationRecord& r : res.trace)
        trace.push_back(ordered_json{{"iteration", r.iteration},
                                     {"increment", r.increment},
                                     {"residual_orth", r.residual_orth},
                                     {"lambda0", r.lambda0},
                                     {"lambda1", r.lambda1},
                                     {"phi_norm", r.phi_norm}});
    rep["diagnostics"] = ordered_json{{"eps", grid.eps},
                                      {"iterations", res.iterations},
                                      {"lambda0", res.lambda0},
                                      {"lambda1", res.lambda1},
                                      {"residual_orth", res.residual_orth},
                                      {"residual_full", res.residual_full},
                                      {"phi_norm_weighted", res.phi_norm_weighted},
                                      {"trace", trace}};
    finish_report(std::move(rep), log, t, cfg.out_report);
    return 0;
}

inline int run_match(const RunConfig& cfg) {
    cfg.validate(true);
    require_wave_number(cfg, "match");
    Timer t;
    CacheLog log;
    PrescribedCurvature H(cfg.A, cfg.gamma);
    MatchOptions mo;
    mo.N_t = cfg.N_t;
    mo.N_theta = cfg.N_theta;
    mo.mode = mode_of(cfg.multipliers);
    mo.tol_scale = cfg.tol_match;
    mo.reduction.tol_fp = cfg.tol_fp;
    mo.reduction.norm_spec = WeightedNormSpec(cfg.mu, cfg.delta);
    MatchResult mr = match_neck(cfg.n, H, mo);
    ProfileTable tbl = log.load(NeckSize(mr.a_n), cfg.N_t, cfg);
    TorusGrid grid = TorusGrid::bent(tbl, cfg.N_theta, cfg.n);
    EmbeddingCertificate cert = certify(grid, mr.reduction, cfg.r0);
    std::printf("a_n = %.12g (bracket [%.12g, %.12g])\n", mr.a_n, mr.a_lo, mr.a_hi);
    std::printf("b_n = a n log n = %.12g\n", mr.b_n);
    std::printf("lambda0 residual = %.3e\n", mr.lambda0_res);
    std::printf("lambda1 = %.6e\n", mr.lambda1_res);
    std::printf("multipliers = %s\n", mr.mode_used.c_str());
    print_certificate(cert);
    if (!cfg.out_solution.empty()) {
        SolutionState st{mr.a_n,  cfg.n,     cfg.N_t,         cfg.N_theta,
                         cfg.A,   cfg.gamma, H.floor_radius, mr.reduction};
        write_json(solution_to_json(st), cfg.out_solution);
    }
    if (!cfg.out_mesh.empty())
        export_mesh(build_mesh(grid, mr.reduction.phi), cfg.out_mesh, cfg.mesh_format);
    ordered_json rep = report_skeleton(cfg);
    rep["diagnostics"] = ordered_json{
        {"n", cfg.n},
        {"A", cfg.A},
        {"gamma", cfg.gamma},
        {"a_n", mr.a_n},
        {"b_n", mr.b_n},
        {"a_lo", mr.a_lo},
        {"a_hi", mr.a_hi},
        {"lambda0_res", mr.lambda0_res},
        {"lambda1", mr.lambda1_res},
        {"multiplier_mode", mr.mode_used},
        {"grid", ordered_json{{"N_t", cfg.N_t}, {"N_theta", cfg.N_theta}, {"eps", grid.eps}}},
        {"certificate", certificate_json(cert)}};
    finish_report(std::move(rep), log, t, cfg.out_report);
    return 0;
}

inline int run_certify(const RunConfig& cfg, const std::string& sol_path) {
    Timer t;
    CacheLog log;
    SolutionState s = solution_from_json(read_json(sol_path));
    ProfileTable tbl = log.load(NeckSize(s.a), s.N_t, cfg);
    TorusGrid grid = TorusGrid::bent(tbl, s.N_theta, s.n);
    EmbeddingCertificate cert = certify(grid, s.result, cfg.r0);
    print_certificate(cert);
    ordered_json rep = report_skeleton(cfg);
    rep["diagnostics"] = ordered_json{{"solution", sol_path},
                                      {"a", s.a},
                                      {"n", s.n},
                                      {"certificate", certificate_json(cert)}};
    finish_report(std::move(rep), log, t, cfg.out_report);
    return 0;
}

inline int run_export(const RunConfig& cfg, const std::string& sol_path, bool cell) {
    if (cfg.out_mesh.empty()) throw std::invalid_argument("export: --out is required");
    Timer t;
    CacheLog log;
    SolutionState s = solution_from_json(read_json(sol_path));
    ProfileTable tbl = log.load(NeckSize(s.a), s.N_t, cfg);
    TorusGrid grid = TorusGrid::bent(tbl, s.N_theta, s.n);
    MeshOut mesh = cell ? build_mesh_cell(grid, s.result.phi) : build_mesh(grid, s.result.phi);
    MeshTopology top = mesh_topology(mesh);
    if (!cell && !(top.closed && top.oriented && top.chi == 0))
        throw std::runtime_error("export: assembled mesh is not a closed oriented torus");
    export_mesh(mesh, cfg.out_mesh, cfg.mesh_format);
    std::printf("wrote %s: V %d, F %d (%s)\n", cfg.out_mesh.c_str(), top.V, top.F,
                cfg.mesh_format.c_str());
    ordered_json rep = report_skeleton(cfg);
    rep["diagnostics"] = ordered_json{
        {"solution", sol_path},
        {"mesh", ordered_json{{"V", top.V}, {"E", top.E}, {"F", top.F}, {"chi", top.chi}}}};
    finish_report(std::move(rep), log, t, cfg.out_report);
    return 0;
}

inline const char* classify(const std::exception& e) {
    if (dynamic_cast<const MatchError*>(&e)) return "match_error";
    if (dynamic_cast<const std::invalid_argument*>(&e)) return "invalid_argument";
    if (dynamic_cast<const std::domain_error*>(&e)) return "domain_error";
    if (dynamic_cast<const std::out_of_range*>(&e)) return "out_of_range";
    if (dynamic_cast<const std::runtime_error*>(&e)) return "runtime_error";
    return "exception";
}

inline void print_error_record(const std::exception& e) {
    ordered_json err;
    err["error"] = ordered_json{{"type", classify(e)}, {"what", e.what()}};
    if (const auto* me = dynamic_cast<const MatchError*>(&e)) {
        ordered_json scan = ordered_json::array();
        for (const MultiplierSample& s : me->scan)
            scan.push_back(ordered_json{
                {"a", s.a}, {"b", s.b}, {"balance_lambda0", s.balance_lambda0}});
        err["error"]["scan"] = scan;
    }
    std::cerr << err.dump() << "\n";
}

} // namespace cli_detail

inline int cli_dispatch(int argc, const char* const* argv) {
    using namespace cli_detail;
    RunConfig cfg;

    // load a config file before CLI11 applies the flags on top
    std::string config_path;
    for (int i = 1; i < argc; ++i) {
        const std::string_view tok = argv[i];
        if (tok == "--config" && i + 1 < argc) config_path = argv[i + 1];
        else if (tok.rfind("--config=", 0) == 0) config_path = std::string(tok.substr(9));
    }
    try {
        if (!config_path.empty()) cfg = config_from_json(read_json(config_path));
    } catch (const std::exception& e) {
        print_error_record(e);
        return 1;
    }

    CLI::App app{"prescribed mean curvature tori: unduloid profiles, bent surfaces, "
                 "matched necks, embedding certificates"};
    app.require_subcommand(1);
    int exit_code = 0;

    auto common = [&](CLI::App* cmd, bool with_grid) {
        cmd->add_option("--config", config_path, "JSON config file; explicit flags override it");
        cmd->add_option("--cache-dir", cfg.cache_dir,
                        "profile cache directory (default: TORI_CACHE_DIR)");
        cmd->add_option("--out-report", cfg.out_report, "write a JSON run report");
        if (with_grid) {
            cmd->add_option("--N_t", cfg.N_t, "profile samples per period, multiple of 4");
            cmd->add_option("--N_theta", cfg.N_theta, "angular samples, power of two");
        }
    };

    CLI::App* profile =
        app.add_subcommand("profile", "solve one unduloid profile and report its invariants");
    std::string table_out;
    profile->add_option("--a", cfg.a, "neck size in (0, 1/2]");
    profile->add_option("--out", table_out, "write the profile table as JSON");
    common(profile, true);
    profile->callback([&] { exit_code = run_profile(cfg, table_out); });

    CLI::App* surface =
        app.add_subcommand("surface", "assemble a bent torus and export its mesh");
    bool surface_cell = false;
    surface->add_option("--a", cfg.a, "neck size in (0, 1/2]");
    surface->add_option("--n", cfg.n, "wave number of the bent torus");
    surface->add_option("--out", cfg.out_mesh, "mesh output path");
    surface->add_option("--format", cfg.mesh_format, "obj or ply");
    surface->add_flag("--cell", surface_cell, "export the open one-period cell");
    common(surface, true);
    surface->callback([&] { exit_code = run_surface(cfg, surface_cell); });

    CLI::App* solve = app.add_subcommand(
        "solve", "run the nonlinear reduction at a fixed neck size and wave number");
    solve->add_option("--a", cfg.a, "neck size in (0, 1/2]");
    solve->add_option("--n", cfg.n, "wave number of the bent torus");
    solve->add_option("--A", cfg.A, "curvature deviation amplitude");
    solve->add_option("--gamma", cfg.gamma, "decay exponent in (0, 2)");
    solve->add_option("--tol-fp", cfg.tol_fp, "fixed-point tolerance");
    solve->add_option("--mu", cfg.mu, "weight exponent of the norms");
    solve->add_option("--delta", cfg.delta, "weighted-norm window half-width");
    solve->add_option("--out", cfg.out_solution, "write the solution state as JSON");
    solve->add_option("--out-mesh", cfg.out_mesh, "export the perturbed mesh");
    solve->add_option("--format", cfg.mesh_format, "obj or ply");
    common(solve, true);
    solve->callback([&] { exit_code = run_solve(cfg); });

    CLI::App* match = app.add_subcommand(
        "match", "root-find the neck size from the multiplier balance, then certify");
    match->add_option("--n", cfg.n, "wave number of the bent torus");
    match->add_option("--A", cfg.A, "curvature deviation amplitude");
    match->add_option("--gamma", cfg.gamma, "decay exponent in (0, 2)");
    match->add_option("--multipliers", cfg.multipliers, "auto, frozen or reduced");
    match->add_option("--tol-match", cfg.tol_match, "bracket width target, relative");
    match->add_option("--tol-fp", cfg.tol_fp, "fixed-point tolerance");
    match->add_option("--r0", cfg.r0, "tube radius of the certificate");
    match->add_option("--out-solution", cfg.out_solution, "write the solution state as JSON");
    match->add_option("--out-mesh", cfg.out_mesh, "export the matched mesh");
    match->add_option("--format", cfg.mesh_format, "obj or ply");
    common(match, true);
    match->callback([&] {
        cfg.auto_match = true;
        exit_code = run_match(cfg);
    });

    CLI::App* certify_cmd =
        app.add_subcommand("certify", "re-run the embedding certificate on a saved solution");
    std::string sol_path;
    certify_cmd->add_option("--solution", sol_path, "solution JSON path")->required();
    certify_cmd->add_option("--r0", cfg.r0, "tube radius of the certificate");
    common(certify_cmd, false);
    certify_cmd->callback([&] { exit_code = run_certify(cfg, sol_path); });

    CLI::App* export_cmd =
        app.add_subcommand("export", "rebuild the mesh of a saved solution and write it");
    bool export_cell = false;
    export_cmd->add_option("--solution", sol_path, "solution JSON path")->required();
    export_cmd->add_option("--out", cfg.out_mesh, "mesh output path")->required();
    export_cmd->add_option("--format", cfg.mesh_format, "obj or ply");
    export_cmd->add_flag("--cell", export_cell, "export the open one-period cell");
    common(export_cmd, false);
    export_cmd->callback([&] { exit_code = run_export(cfg, sol_path, export_cell); });

    CLI::App* selftest =
        app.add_subcommand("selftest", "run the twelve-criterion acceptance battery");
    std::vector<int> criteria;
    bool expect_documented = false;
    selftest->add_option("--criterion", criteria, "criterion ids to run (default: all)");
    selftest->add_flag("--expect-documented", expect_documented,
                       "exit zero only when every outcome matches its documented expectation");
    selftest->add_option("--seed", cfg.seed, "seed of the randomized criteria");
    selftest->callback([&] {
        exit_code = selftest_main(criteria, expect_documented,
                                  cfg.seed ? cfg.seed : 20260822ull);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        if (code != 0) {
            ordered_json err;
            err["error"] = ordered_json{{"type", "parse_error"}, {"what", e.what()}};
            std::cerr << err.dump() << "\n";
        }
        return code;
    } catch (const std::exception& e) {
        print_error_record(e);
        return 1;
    }
    return exit_code;
}

} // namespace tori
