// Command-line laboratory for the unfolding toolkit: parameter scans,
// tangency continuation, sink certification and the symbolic/measure checks.

#include <chrono>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "unfold/ce.hpp"
#include "unfold/critical_orbit.hpp"
#include "unfold/errors.hpp"
#include "unfold/manifolds.hpp"
#include "unfold/measures.hpp"
#include "unfold/model_config.hpp"
#include "unfold/partition.hpp"
#include "unfold/report.hpp"
#include "unfold/sinks.hpp"
#include "unfold/symbolic.hpp"
#include "unfold/tangency.hpp"
#include "unfold/theta.hpp"

namespace fs = std::filesystem;
using namespace unfold;

namespace {

struct Cli {
    std::string config_path;
    std::string out_dir{"out"};
    std::uint64_t seed{0};
    int threads{1};
    bool seed_set{false};
};

RunConfig load_config(const Cli& cli) {
    RunConfig cfg = cli.config_path.empty() ? RunConfig{} : RunConfig::load(cli.config_path);
    if (cli.seed_set) cfg.seed = cli.seed;
    return cfg;
}

std::string out_path(const Cli& cli, const std::string& name) {
    fs::create_directories(cli.out_dir);
    return (fs::path(cli.out_dir) / name).string();
}

int run_theta_select(const Cli& cli) {
    const RunConfig cfg = load_config(cli);
    const ModelPtr model = build_model(cfg);
    const ThetaSelection sel = select_theta(*model, cfg.theta_grid);
    const ThetaChecks checks = theta_checks(*model, sel.theta);
    std::ostringstream os;
    os.precision(17);
    os << "{\"theta\":" << sel.theta << ",\"alpha\":" << sel.alpha
       << ",\"theta0\":" << sel.theta0 << ",\"theta1\":" << sel.theta1
       << ",\"lower_spectral\":" << checks.lower_spectral
       << ",\"upper_spectral\":" << checks.upper_spectral << "}\n";
    write_text_file(out_path(cli, "theta.json"), os.str());
    std::cout << os.str();
    return 0;
}

int run_return_curve(const Cli& cli, int n) {
    const RunConfig cfg = load_config(cli);
    const ModelPtr model = build_model(cfg);
    const ReturnCurve curve(model, n);
    const double t0 = model->window().t0;
    std::vector<double> ts, as, ds, rs;
    for (int i = 0; i <= 64; ++i) {
        const double t = -t0 + 2.0 * t0 * i / 64.0;
        ts.push_back(t);
        as.push_back(curve.eval(t));
        ds.push_back(curve.deriv(t));
        rs.push_back(curve.residual(t));
    }
    write_csv(out_path(cli, "return_curve_n" + std::to_string(n) + ".csv"),
              {"t", "a_n", "da_dt", "residual"}, {ts, as, ds, rs});
    std::cout << "a_" << n << "(0) = " << curve.eval(0.0) << "\n";
    return 0;
}

int run_tangency_scan(const Cli& cli, int n, double t_start) {
    const RunConfig cfg = load_config(cli);
    const ModelPtr model = build_model(cfg);
    const ThetaSelection theta = select_theta(*model, cfg.theta_grid);
    const double a = solve_return_a(*model, n, t_start);
    const LoopTrace tr = trace_loop(*model, theta, Params{t_start, a}, n, cfg.seed_scale);
    const TangencyStrip strip =
        make_strip(model, theta, n, tr.n0, cfg.eps_strip, cfg.big_t_strip);
    const TangencyCertificate cert =
        find_secondary_tangency(model, theta, strip, t_start, cfg.kappa);
    std::ostringstream os;
    os.precision(17);
    os << "{\"n\":" << n << ",\"t_star\":" << cert.t_star << ",\"a_star\":" << cert.a_star
       << ",\"n0\":" << cert.n0 << ",\"residual\":" << cert.residual
       << ",\"dg_dt\":" << cert.dg_dt << ",\"curvature\":" << cert.curvature << "}\n";
    write_text_file(out_path(cli, "tangency_n" + std::to_string(n) + ".json"), os.str());
    std::cout << os.str();
    return 0;
}

int run_continue(const Cli& cli, int n, double t_start) {
    const RunConfig cfg = load_config(cli);
    const ModelPtr model = build_model(cfg);
    const ThetaSelection theta = select_theta(*model, cfg.theta_grid);
    const double a = solve_return_a(*model, n, t_start);
    const LoopTrace tr = trace_loop(*model, theta, Params{t_start, a}, n, cfg.seed_scale);
    const TangencyStrip strip =
        make_strip(model, theta, n, tr.n0, cfg.eps_strip, cfg.big_t_strip);
    const TangencyCertificate cert = find_nearest_tangency(model, theta, strip, t_start);
    const TangencyCurveB curve = continue_tangency_curve(model, theta, cert, strip);
    std::vector<double> lower, upper, an;
    for (double t : curve.ts) {
        lower.push_back(strip.lower(t));
        upper.push_back(strip.upper(t));
        an.push_back(solve_return_a(*model, n, t));
    }
    write_csv(out_path(cli, "b_curve_n" + std::to_string(n) + ".csv"),
              {"t", "lower", "a_n", "b", "upper"}, {curve.ts, lower, an, curve.as, upper});
    std::cout << "continued " << curve.ts.size() << " samples, type n0 = " << curve.n0
              << (curve.complete ? "" : " (partial)") << "\n";
    return 0;
}

int run_strips(const Cli& cli, int n, int budget) {
    const RunConfig cfg = load_config(cli);
    const ModelPtr model = build_model(cfg);
    const ThetaSelection theta = select_theta(*model, cfg.theta_grid);
    const double a = solve_return_a(*model, n, 0.0);
    const LoopTrace tr = trace_loop(*model, theta, Params{0.0, a}, n, cfg.seed_scale);
    const TangencyStrip strip =
        make_strip(model, theta, n, tr.n0, cfg.eps_strip, cfg.big_t_strip);
    const TangencyCertificate cert = find_nearest_tangency(model, theta, strip, 0.0);
    const TangencyCurveB curve = continue_tangency_curve(model, theta, cert, strip);
    const StripRecursion rec = strip_recursion(model, theta, curve, budget);
    std::ostringstream os;
    os.precision(17);
    os << "{\"parent_n\":" << n << ",\"children\":[";
    for (std::size_t i = 0; i < rec.children.size(); ++i) {
        const auto& c = rec.children[i];
        if (i) os << ",";
        os << "{\"n\":" << c.curve.n << ",\"n0\":" << c.curve.n0
           << ",\"winding\":[" << c.winding.l_low << "," << c.winding.theta_n << ","
           << c.winding.n << "," << c.winding.slot << "," << c.winding.l_up << "]}";
    }
    os << "]}\n";
    write_text_file(out_path(cli, "strips_n" + std::to_string(n) + ".json"), os.str());
    std::cout << os.str();
    return 0;
}

int run_sink_scan(const Cli& cli, int n_lo, int n_hi) {
    const RunConfig cfg = load_config(cli);
    const ModelPtr model = build_model(cfg);
    const ThetaSelection theta = select_theta(*model, cfg.theta_grid);
    std::vector<double> ns, periods, radii, margins;
    for (int n = n_lo; n <= n_hi; ++n) {
        const double a = solve_return_a(*model, n, 0.0);
        const SinkCertificate cert = certify_sink(model, theta, Params{0.0, a}, n);
        ns.push_back(n);
        periods.push_back(cert.period);
        radii.push_back(cert.spectral_radius);
        margins.push_back(cert.boundary_margin);
        std::cout << "n=" << n << " period=" << cert.period
                  << " spectral_radius=" << cert.spectral_radius << "\n";
    }
    write_csv(out_path(cli, "sinks.csv"), {"n", "period", "spectral_radius", "margin"},
              {ns, periods, radii, margins});
    return 0;
}

int run_newhouse(const Cli& cli, int generations, int n_lo, int n_hi) {
    const RunConfig cfg = load_config(cli);
    const ModelPtr model = build_model(cfg);
    const ThetaSelection theta = select_theta(*model, cfg.theta_grid);
    NewhouseOptions opt;
    opt.n_lo = n_lo;
    opt.n_hi = n_hi;
    const std::vector<NewhouseBox> boxes = newhouse_recursion(model, theta, generations, opt);
    std::ostringstream os;
    os.precision(17);
    os << "{\"boxes\":[";
    std::function<void(const NewhouseBox&)> emit = [&](const NewhouseBox& b) {
        os << "{\"generation\":" << b.generation << ",\"t_lo\":" << b.t_lo
           << ",\"t_hi\":" << b.t_hi << ",\"certificates\":[";
        for (std::size_t i = 0; i < b.certificates.size(); ++i)
            os << (i ? "," : "") << b.certificates[i].period;
        os << "],\"children\":" << b.children.size() << "}";
    };
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        if (i) os << ",";
        emit(boxes[i]);
    }
    os << "]}\n";
    write_text_file(out_path(cli, "newhouse.json"), os.str());
    std::cout << boxes.size() << " generation-1 boxes\n";
    return 0;
}

int run_nh_dimension(const Cli& cli, int n_lo, int n_hi) {
    const RunConfig cfg = load_config(cli);
    const ModelPtr model = build_model(cfg);
    const ThetaSelection theta = select_theta(*model, cfg.theta_grid);
    NewhouseOptions opt;
    opt.n_lo = n_lo;
    opt.n_hi = n_hi;
    const std::vector<NewhouseBox> boxes = newhouse_recursion(model, theta, 1, opt);
    const DimensionReport rep = nh_box_dimension(model, theta, boxes);
    write_csv(out_path(cli, "nh_dimension.csv"), {"log_inv_eps", "log_count"},
              {rep.log_inv_eps, rep.log_count});
    std::cout << "slope = " << rep.fit.slope
              << " (theoretical bound " << rep.theoretical_slope << ")\n";
    return 0;
}

int run_symbolic(const Cli& cli, int depth) {
    const RunConfig cfg = load_config(cli);
    const ModelPtr model = build_model(cfg);
    const ThetaSelection theta = select_theta(*model, cfg.theta_grid);
    const int n = 14;
    const double a = solve_return_a(*model, n, 0.0);
    const LoopTrace tr = trace_loop(*model, theta, Params{0.0, a}, n, cfg.seed_scale);
    const TangencyStrip strip =
        make_strip(model, theta, n, tr.n0, cfg.eps_strip, cfg.big_t_strip);
    const TangencyCertificate cert = find_nearest_tangency(model, theta, strip, 0.0);
    const Params on_curve{cert.t_star, cert.a_star};
    const PartitionRealization base = realize_base_partition(*model, on_curve);
    const ChildPartition child = realize_child_partition(*model, theta, on_curve, n);
    const ConjugacyReport rep = verify_conjugacy(*model, theta, base, child, on_curve);
    SymbolicTower tower;
    tower.graphs = {base.graph, child.partition.graph};
    tower.morphisms = {child.morphism};
    write_text_file(out_path(cli, "symbolic.json"), tower_to_json(tower) + "\n");
    std::cout << "depth " << depth << ": pieces=" << rep.pieces_checked
              << " projection_ok=" << rep.projection_ok << " diagram_ok=" << rep.diagram_ok
              << "\n";
    if (!rep.projection_ok || !rep.diagram_ok) throw PropertyError("conjugacy check failed");
    return 0;
}

int run_measure_converge(const Cli& cli, int levels, int trials) {
    const RunConfig cfg = load_config(cli);
    Rng rng(cfg.seed);
    const auto chain = make_dims_chain(levels, 3, 3, 32);
    const ContractionReport rep = verify_contraction(chain, trials, rng);
    std::vector<double> lvl, worst, dist;
    for (std::size_t g = 0; g < rep.levels.size(); ++g) {
        lvl.push_back(static_cast<double>(g));
        worst.push_back(rep.levels[g].worst_factor);
        dist.push_back(rep.levels[g].max_distance);
    }
    write_csv(out_path(cli, "measure_convergence.csv"),
              {"level", "worst_factor", "max_distance"}, {lvl, worst, dist});
    std::cout << "contracting=" << rep.all_contracting
              << " distance_law=" << rep.distance_law_ok << "\n";
    if (!rep.all_contracting || !rep.distance_law_ok)
        throw PropertyError("measure contraction failed");
    return 0;
}

int run_ce_verify(const Cli& cli, int t_horizon, double angle, double rho, double c_const) {
    const RunConfig cfg = load_config(cli);
    const ModelPtr model = build_model(cfg);
    const ThetaSelection theta = select_theta(*model, cfg.theta_grid);
    ConeSpec cone{angle, c_const, rho};
    cone.validate(*model, theta);
    const int n = 14;
    const double a = solve_return_a(*model, n, 0.0);
    const LoopTrace tr = trace_loop(*model, theta, Params{0.0, a}, n, cfg.seed_scale);
    const Params p{0.0, a};
    const Vec2 x = tr.waypoints[3];  // start of the certified climb
    const int horizon = t_horizon > 0 ? t_horizon : n + 2 + tr.climb;
    const CEReport rep = verify_tce(*model, theta, cone, p, x, horizon);
    std::ostringstream os;
    os.precision(17);
    os << "{\"T\":" << rep.T << ",\"worst_margin\":" << rep.worst_margin
       << ",\"worst_step\":" << rep.worst_step << ",\"cone_return\":" << rep.cone_return
       << "}\n";
    write_text_file(out_path(cli, "ce_report.json"), os.str());
    std::cout << os.str();
    return rep.valid() ? 0 : 4;
}

int run_pipeline(const Cli& cli) {
    const RunConfig cfg = load_config(cli);
    const auto start = std::chrono::steady_clock::now();
    RunManifest manifest;
    manifest.tool_version = tool_version();
    manifest.config_hash = cfg.hash();
    manifest.seed = cfg.seed;

    auto stage = [&](const std::string& name, auto&& fn) {
        try {
            fn();
            manifest.add_stage(name, "ok");
            return true;
        } catch (const std::exception& e) {
            manifest.add_stage(name, std::string("failed: ") + e.what());
            return false;
        }
    };

    bool all_ok = true;
    all_ok &= stage("theta-select", [&] { run_theta_select(cli); });
    all_ok &= stage("return-curve", [&] { run_return_curve(cli, 12); });
    bool scan_ok = stage("tangency-scan", [&] { run_tangency_scan(cli, 12, 0.0); });
    all_ok &= scan_ok;
    if (scan_ok) {
        all_ok &= stage("continue", [&] { run_continue(cli, 12, 0.0); });
        all_ok &= stage("strips", [&] { run_strips(cli, 14, 1); });
        all_ok &= stage("sinks", [&] { run_sink_scan(cli, 10, 12); });
        all_ok &= stage("newhouse", [&] { run_newhouse(cli, 1, 12, 14); });
        all_ok &= stage("symbolic", [&] { run_symbolic(cli, 2); });
    } else {
        manifest.add_stage("continue", "skipped: tangency-scan failed");
    }
    all_ok &= stage("measures", [&] { run_measure_converge(cli, 5, 200); });
    all_ok &= stage("ce", [&] { run_ce_verify(cli, 0, 0.2, 1.05, 0.01); });

    for (const auto& entry : fs::directory_iterator(cli.out_dir))
        manifest.add_artifact(entry.path().filename().string());
    std::sort(manifest.artifacts.begin(), manifest.artifacts.end());
    manifest.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    manifest.write(out_path(cli, "manifest.json"));
    std::cout << "pipeline " << (all_ok ? "ok" : "had failures") << "\n";
    return all_ok ? 0 : 3;
}

int run_emit_plot(const Cli& cli, const std::string& artifact, const std::string& kind) {
    if (kind != "strip" && kind != "curve" && kind != "boxes" && kind != "dimension" &&
        kind != "convergence")
        throw ValidationError("emit-plot: unknown kind " + kind);
    // The pipeline CSV artifacts are already flat; re-emit with a .plot.csv name.
    std::ifstream is(artifact);
    if (!is) throw ValidationError("emit-plot: artifact missing: " + artifact);
    std::stringstream ss;
    ss << is.rdbuf();
    const std::string out = out_path(cli, fs::path(artifact).stem().string() + ".plot.csv");
    write_text_file(out, ss.str());
    std::cout << out << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"unfold-lab: tangency continuation and symbolic model toolkit"};
    app.require_subcommand(1);

    Cli cli;
    app.add_option("--config", cli.config_path, "JSON configuration file");
    app.add_option("--out", cli.out_dir, "output directory");
    auto* seed_opt = app.add_option("--seed", cli.seed, "override the RNG seed");
    app.add_option("--threads", cli.threads, "worker threads (stages are sequential)");

    int n = 12, n_lo = 10, n_hi = 14, budget = 1, generations = 1, depth = 2;
    int levels = 5, trials = 1000, t_horizon = 0;
    double t_start = 0.0, angle = 0.2, rho = 1.05, c_const = 0.01;
    std::string artifact, kind;

    auto* s_theta = app.add_subcommand("theta-select", "pick theta and alpha");
    auto* s_ret = app.add_subcommand("return-curve", "tabulate a_n(t)");
    s_ret->add_option("--n", n);
    auto* s_scan = app.add_subcommand("tangency-scan", "locate a secondary tangency");
    s_scan->add_option("--n", n);
    s_scan->add_option("--t-start", t_start);
    auto* s_cont = app.add_subcommand("continue", "continue a tangency curve");
    s_cont->add_option("--n", n);
    s_cont->add_option("--t-start", t_start);
    auto* s_strips = app.add_subcommand("strips", "one induction step of child strips");
    s_strips->add_option("--n", n);
    s_strips->add_option("--depth-budget", budget);
    auto* s_sink = app.add_subcommand("sink-scan", "certify sinks over a depth range");
    s_sink->add_option("--n-lo", n_lo);
    s_sink->add_option("--n-hi", n_hi);
    auto* s_nh = app.add_subcommand("newhouse", "build Newhouse boxes");
    s_nh->add_option("--generations", generations);
    s_nh->add_option("--n-lo", n_lo);
    s_nh->add_option("--n-hi", n_hi);
    auto* s_dim = app.add_subcommand("nh-dimension", "box-counting trend");
    s_dim->add_option("--n-lo", n_lo);
    s_dim->add_option("--n-hi", n_hi);
    auto* s_sym = app.add_subcommand("symbolic", "realize partitions and verify diagrams");
    s_sym->add_option("--depth", depth);
    auto* s_meas = app.add_subcommand("measure-converge", "simplex contraction check");
    s_meas->add_option("--levels", levels);
    s_meas->add_option("--trials", trials);
    auto* s_ce = app.add_subcommand("ce-verify", "finite derivative-growth certificate");
    s_ce->add_option("--T", t_horizon);
    s_ce->add_option("--cone-angle", angle);
    s_ce->add_option("--rho", rho);
    s_ce->add_option("--C", c_const);
    auto* s_pipe = app.add_subcommand("pipeline", "run every stage in order");
    auto* s_plot = app.add_subcommand("emit-plot", "flatten an artifact for plotting");
    s_plot->add_option("--artifact", artifact)->required();
    s_plot->add_option("--kind", kind)->required();

    CLI11_PARSE(app, argc, argv);
    cli.seed_set = seed_opt->count() > 0;

    try {
        if (s_theta->parsed()) return run_theta_select(cli);
        if (s_ret->parsed()) return run_return_curve(cli, n);
        if (s_scan->parsed()) return run_tangency_scan(cli, n, t_start);
        if (s_cont->parsed()) return run_continue(cli, n, t_start);
        if (s_strips->parsed()) return run_strips(cli, n, budget);
        if (s_sink->parsed()) return run_sink_scan(cli, n_lo, n_hi);
        if (s_nh->parsed()) return run_newhouse(cli, generations, n_lo, n_hi);
        if (s_dim->parsed()) return run_nh_dimension(cli, n_lo, n_hi);
        if (s_sym->parsed()) return run_symbolic(cli, depth);
        if (s_meas->parsed()) return run_measure_converge(cli, levels, trials);
        if (s_ce->parsed()) return run_ce_verify(cli, t_horizon, angle, rho, c_const);
        if (s_pipe->parsed()) return run_pipeline(cli);
        if (s_plot->parsed()) return run_emit_plot(cli, artifact, kind);
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const PropertyError& e) {
        std::cerr << "property violation: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
