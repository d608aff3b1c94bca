// Command-line front end: stability, simulation, sweeps, contour dumps, boundary value solves, validation.
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "retrial/elliptic.hpp"
#include "retrial/io.hpp"
#include "retrial/sim.hpp"
#include "retrial/solver.hpp"

namespace fs = std::filesystem;
using namespace retrial;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kUnstable = 2, kNumerical = 3 };

struct Globals {
    std::string config;
    std::string out;
    std::uint64_t seed = 1;
    bool quiet = false;
};

struct Axis {
    std::string name;
    double lo = 0, hi = 0;
    int count = 0;
    double at(int i) const { return count == 1 ? lo : lo + (hi - lo) * i / (count - 1); }
};

Axis parse_axis(const std::string& s) {
    const auto parts = detail::split(s, ':');
    if (parts.size() != 4) throw ConfigError("axis must be name:lo:hi:count, got '" + s + "'");
    Axis a{parts[0], detail::parse_number(parts[1]), detail::parse_number(parts[2]), static_cast<int>(detail::parse_number(parts[3]))};
    if (a.name != "lambda" && a.name != "theta" && a.name != "mu") throw ConfigError("axis name must be lambda, theta or mu");
    if (a.count < 1 || !(a.hi >= a.lo)) throw ConfigError("axis range must satisfy lo <= hi and count >= 1");
    return a;
}

ServiceDist with_rate(const ServiceDist& d, double mu) {
    switch (d.kind()) {
    case DistKind::Exponential: return ServiceDist::exponential(mu);
    case DistKind::Erlang: return ServiceDist::erlang(d.shape(), mu);
    default: throw ConfigError("mu axis needs exponential or Erlang service laws");
    }
}

SystemParams apply_axis(SystemParams p, const Axis& a, double v) {
    if (a.name == "lambda") p.lambda1 = p.lambda2 = v / 2;
    else if (a.name == "theta") p.theta1 = p.theta2 = v / 2;
    else {
        p.b1 = with_rate(p.b1, v);
        p.b2 = with_rate(p.b2, v);
        p.b3 = with_rate(p.b3, v);
    }
    return p;
}

class App {
public:
    Globals g;
    RunManifest manifest;
    SystemParams params;
    fs::path out_dir;

    void prepare(const std::string& sub, bool needs_config = true) {
        manifest.subcommand = sub;
        manifest.config_path = g.config;
        if (needs_config) {
            if (g.config.empty()) throw ConfigError("--config is required");
            params = load_config(g.config);
            manifest.params = params_json(params);
        }
        std::string dir = g.out;
        if (dir.empty()) {
            const char* env = std::getenv("RETRIAL_OUT_DIR");
            dir = env ? env : ".";
        }
        out_dir = dir;
        fs::create_directories(out_dir);
        manifest.output_dir = out_dir;
        manifest.options["seed"] = g.seed;
    }

    fs::path file(const std::string& name) {
        manifest.files.push_back(name);
        return out_dir / name;
    }

    void say(const std::string& s) const {
        if (!g.quiet) std::cout << s << '\n';
    }
};

std::string num(double v) { return fmt17(v); }

int cmd_stability(App& app) {
    app.prepare("stability");
    const auto& p = app.params;
    const double r1 = rho_hat(p, 1), r2 = rho_hat(p, 2);
    const bool stable = is_stable(p);
    json j{{"rho_hat1", r1}, {"rho_hat2", r2}, {"regime", to_string(classify(p))}, {"stable", stable}};
    std::ofstream(app.file("stability.json")) << j.dump(2) << '\n';
    app.manifest.write();
    app.say("rho_hat1 = " + num(r1));
    app.say("rho_hat2 = " + num(r2));
    app.say(std::string("regime = ") + to_string(classify(p)));
    app.say(stable ? "verdict = stable" : "verdict = unstable");
    return stable ? kOk : kUnstable;
}

struct SimOptions {
    std::uint64_t departures = 1'000'000;
    std::uint32_t reps = 30;
    unsigned threads = 0;
};

void write_sim_csv(const fs::path& path, const SimEstimates& e) {
    CsvWriter w(path, {"row", "replication", "mean_orbit1_dep", "mean_orbit2_dep", "mean_orbit1_time", "mean_orbit2_time", "pi00", "pi10",
                       "pi01", "mean_delay1", "mean_delay2", "mean_sojourn1", "mean_sojourn2", "slope_total"});
    for (std::size_t i = 0; i < e.replications.size(); ++i) {
        const auto& r = e.replications[i];
        w.row_strings({"replication", std::to_string(i), num(r.mean_orbit1_dep), num(r.mean_orbit2_dep), num(r.mean_orbit1_time),
                       num(r.mean_orbit2_time), num(r.pi00), num(r.pi10), num(r.pi01), num(r.mean_delay1), num(r.mean_delay2),
                       num(r.mean_sojourn1), num(r.mean_sojourn2), num(r.slope_total)});
    }
    w.row_strings({"mean", "", num(e.mean_orbit1_dep.mean), num(e.mean_orbit2_dep.mean), num(e.mean_orbit1_time.mean),
                   num(e.mean_orbit2_time.mean), num(e.pi00.mean), num(e.pi10.mean), num(e.pi01.mean), num(e.mean_delay1.mean),
                   num(e.mean_delay2.mean), num(e.mean_sojourn1.mean), num(e.mean_sojourn2.mean), num(e.slope_total.mean)});
    w.row_strings({"ci95", "", num(e.mean_orbit1_dep.ci_halfwidth), num(e.mean_orbit2_dep.ci_halfwidth), num(e.mean_orbit1_time.ci_halfwidth),
                   num(e.mean_orbit2_time.ci_halfwidth), num(e.pi00.ci_halfwidth), num(e.pi10.ci_halfwidth), num(e.pi01.ci_halfwidth),
                   num(e.mean_delay1.ci_halfwidth), num(e.mean_delay2.ci_halfwidth), num(e.mean_sojourn1.ci_halfwidth),
                   num(e.mean_sojourn2.ci_halfwidth), num(e.slope_total.ci_halfwidth)});
}

int cmd_simulate(App& app, const SimOptions& o) {
    app.prepare("simulate");
    app.manifest.options["departures"] = o.departures;
    app.manifest.options["reps"] = o.reps;
    SimConfig cfg;
    cfg.params = app.params;
    cfg.seed = app.g.seed;
    cfg.measured_departures = o.departures;
    cfg.replications = o.reps;
    cfg.threads = o.threads;
    const auto e = run(cfg);
    write_sim_csv(app.file("simulate.csv"), e);
    app.manifest.write();
    auto line = [&](const char* name, const Estimate& s) { app.say(std::string(name) + " = " + num(s.mean) + " +- " + num(s.ci_halfwidth)); };
    line("mean_orbit1_dep", e.mean_orbit1_dep);
    line("mean_orbit2_dep", e.mean_orbit2_dep);
    line("mean_orbit1_time", e.mean_orbit1_time);
    line("mean_orbit2_time", e.mean_orbit2_time);
    line("pi00", e.pi00);
    line("pi10", e.pi10);
    line("pi01", e.pi01);
    line("mean_delay", e.mean_delay);
    line("mean_sojourn", e.mean_sojourn);
    line("slope_total", e.slope_total);
    if (!is_stable(app.params)) app.say("note: parameters are unstable; see slope_total for the drift");
    return kOk;
}

int cmd_sweep(App& app, const std::string& a1s, const std::string& a2s, const std::string& metric, const SimOptions& o) {
    app.prepare("sweep");
    const Axis a1 = parse_axis(a1s), a2 = parse_axis(a2s);
    if (metric != "ED-closed-form" && metric != "simulated" && metric != "simulated-sojourn")
        throw ConfigError("metric must be ED-closed-form, simulated or simulated-sojourn");
    if (metric == "ED-closed-form") require_completely_symmetric(app.params);
    app.manifest.options["axis1"] = a1s;
    app.manifest.options["axis2"] = a2s;
    app.manifest.options["metric"] = metric;
    CsvWriter w(app.file("sweep.csv"), {a1.name, a2.name, metric, "flag"});
    for (int i = 0; i < a1.count; ++i)
        for (int j = 0; j < a2.count; ++j) {
            const SystemParams p = apply_axis(apply_axis(app.params, a1, a1.at(i)), a2, a2.at(j));
            std::string value, flag = "ok";
            try {
                if (!is_stable(p)) throw InstabilityError("unstable");
                if (metric == "ED-closed-form") {
                    value = num(symmetric_expected_delay(p));
                } else {
                    SimConfig cfg;
                    cfg.params = p;
                    cfg.seed = RandomStream::mix(app.g.seed ^ RandomStream::mix((static_cast<std::uint64_t>(i) << 32) | static_cast<std::uint64_t>(j)));
                    cfg.measured_departures = o.departures;
                    cfg.replications = o.reps;
                    cfg.threads = o.threads;
                    const auto e = run(cfg);
                    value = num(metric == "simulated" ? e.mean_delay.mean : e.mean_sojourn.mean);
                }
            } catch (const InstabilityError&) {
                flag = "unstable";
            }
            w.row_strings({num(a1.at(i)), num(a2.at(j)), value, flag});
        }
    app.manifest.write();
    app.say("wrote " + (app.out_dir / "sweep.csv").string());
    return kOk;
}

int cmd_contour_dump(App& app, std::size_t n) {
    app.prepare("contour dump");
    app.manifest.options["grid_n"] = n;
    const auto c = build_contours(app.params, n);
    CsvWriter w(app.file("contour.csv"), {"phi", "delta", "re_w1", "im_w1", "re_w2", "im_w2"});
    for (std::size_t j = 0; j < c.size(); ++j) w.row({c.phi[j], c.delta[j], c.w1[j].real(), c.w1[j].imag(), c.w2[j].real(), c.w2[j].imag()});
    app.manifest.write();
    app.say("max kernel residual = " + num(max_kernel_residual(c)));
    return kOk;
}

json boundary_report(const BoundarySolution& s) {
    const auto m = mean_orbit_sizes(s);
    json j;
    j["origin"] = to_string(s.origin);
    j["pi00"] = s.pi00;
    j["pi10"] = s.pi10;
    j["pi01"] = s.pi01;
    j["ratio_source"] = s.ratio_source;
    j["relation_residual"] = {s.relation_residual[0], s.relation_residual[1]};
    j["total_mass"] = reconstructed_total_mass(s);
    j["mean_orbit1"] = m.ex1;
    j["mean_orbit2"] = m.ex2;
    j["dpi1_at_1"] = m.dpi1;
    j["dpi2_at_1"] = m.dpi2;
    j["sojourn_from_means"] = m.expected_delay;
    return j;
}

void write_boundary_csv(const fs::path& path, const ContourSet& c, const BoundarySolution& s) {
    CsvWriter w(path, {"phi", "re_z1", "im_z1", "re_pi1", "im_pi1", "re_z2", "im_z2", "re_pi2", "im_pi2"});
    for (std::size_t j = 0; j < c.size(); ++j) {
        const cplx a = s.pi00 * s.hat1[j], b = s.pi00 * s.hat2[j];
        w.row({c.phi[j], c.z1[j].real(), c.z1[j].imag(), a.real(), a.imag(), c.z2[j].real(), c.z2[j].imag(), b.real(), b.imag()});
    }
}

int cmd_bvp(App& app, const std::string& sub, std::size_t n, double tol, const std::string& method) {
    app.prepare(sub);
    if (!is_stable(app.params)) throw InstabilityError("parameters are unstable (max rho_hat >= 1)");
    if (method != "riemann" && method != "fredholm" && method != "both") throw ConfigError("--method must be riemann, fredholm or both");
    app.manifest.options["grid_n"] = n;
    app.manifest.options["tol"] = tol;
    app.manifest.options["method"] = method;
    const auto c = build_contours(app.params, n);
    const auto pos = classify_position(app.params);
    json rep;
    rep["grid_n"] = n;
    rep["regime"] = to_string(c.regime);
    rep["position"] = to_string(pos.position);
    rep["relabeled"] = pos.relabeled;
    rep["max_kernel_residual"] = max_kernel_residual(c);
    std::optional<BvpSolution> rs;
    std::optional<FredholmSolution> fs_;
    const std::string stem = sub == "fredholm solve" ? "fredholm" : "bvp";
    if (method != "fredholm") {
        const auto maps = solve_psi(c, tol);
        rs = riemann_solve(c, maps);
        json r = boundary_report(*rs);
        r["chi"] = rs->chi;
        r["welding_iterations"] = maps.iterations;
        r["welding_change"] = maps.last_change;
        r["curve_modulus_deviation"] = maps.modulus_deviation;
        r["d_const"] = maps.d_const;
        r["c0"] = {rs->c0.real(), rs->c0.imag()};
        r["constant_source"] = rs->constant_source;
        rep["riemann"] = r;
        write_boundary_csv(app.file(stem + "_riemann.csv"), c, *rs);
    }
    if (method != "riemann") {
        fs_ = fredholm_solve(c);
        json r = boundary_report(*fs_);
        r["condition"] = fs_->condition;
        r["index_z1T"] = fs_->index_z1T;
        r["omega1_at_origin"] = fs_->omega1_at_origin;
        rep["fredholm"] = r;
        write_boundary_csv(app.file(stem + "_fredholm.csv"), c, *fs_);
    }
    if (rs && fs_) {
        double d = 0.0;
        for (std::size_t j = 0; j < n; ++j) d = std::max(d, std::abs(rs->hat1[j] - fs_->hat1[j]));
        rep["sup_difference_pi1_hat"] = d;
    }
    std::ofstream(app.file(stem + "_report.json")) << rep.dump(2) << '\n';
    app.manifest.write();
    app.say(rep.dump(2));
    return kOk;
}

struct Check {
    std::string name;
    bool pass;
    std::string detail;
};

int cmd_validate(App& app, const SimOptions& o, std::size_t n) {
    app.prepare("validate");
    if (!is_stable(app.params)) throw InstabilityError("parameters are unstable (max rho_hat >= 1)");
    const auto& p = app.params;
    const RegimeTag regime = classify(p);
    SimConfig cfg;
    cfg.params = p;
    cfg.seed = app.g.seed;
    cfg.measured_departures = o.departures;
    cfg.replications = o.reps;
    cfg.threads = o.threads;
    const auto e = run(cfg);
    write_sim_csv(app.file("validate_sim.csv"), e);
    std::vector<Check> checks;
    auto within = [](const Estimate& s, double v, double k = 1.0) { return std::abs(s.mean - v) <= k * s.ci_halfwidth; };
    auto show = [](const Estimate& s, double v) { return "sim " + num(s.mean) + " +- " + num(s.ci_halfwidth) + " vs " + num(v); };

    const auto res = boundary_relations_residual(p, e.pi10.mean, e.pi01.mean, e.pi00.mean);
    std::vector<double> r0, r1;
    for (const auto& r : e.replications) {
        const auto rr = boundary_relations_residual(p, r.pi10, r.pi01, r.pi00);
        r0.push_back(rr[0]);
        r1.push_back(rr[1]);
    }
    const auto e0 = summarize(r0), e1 = summarize(r1);
    checks.push_back({"linear relations vs simulation", std::abs(res[0]) <= 3 * e0.ci_halfwidth && std::abs(res[1]) <= 3 * e1.ci_halfwidth,
                      "residuals " + num(res[0]) + ", " + num(res[1])});

    if (regime == RegimeTag::CompletelySymmetric) {
        const double m = symmetric_mean_orbit(p), d = symmetric_expected_delay(p);
        checks.push_back({"closed-form E(X1) vs simulation", within(e.mean_orbit1_dep, m), show(e.mean_orbit1_dep, m)});
        checks.push_back({"closed-form E(D) vs simulated sojourn", within(e.mean_sojourn, d), show(e.mean_sojourn, d)});
        app.say("info: simulated orbit delay " + num(e.mean_delay.mean) + " +- " + num(e.mean_delay.ci_halfwidth) +
                " (closed form counts service time, see README)");
    }
    const auto c = build_contours(p, n);
    std::optional<BvpSolution> rs;
    try {
        rs = riemann_solve(c, solve_psi(c));
    } catch (const NumericalError& ex) {
        app.say(std::string("info: Riemann path unavailable: ") + ex.what());
    }
    const auto fr = fredholm_solve(c);
    for (const BoundarySolution* s : {static_cast<const BoundarySolution*>(rs ? &*rs : nullptr), static_cast<const BoundarySolution*>(&fr)}) {
        if (!s) continue;
        const std::string tag = s == &fr ? "fredholm" : "riemann";
        const auto m = mean_orbit_sizes(*s);
        checks.push_back({tag + " Pi(0,0) vs simulation", within(e.pi00, s->pi00), show(e.pi00, s->pi00)});
        checks.push_back({tag + " Pi(1,0) vs simulation", within(e.pi10, s->pi10), show(e.pi10, s->pi10)});
        checks.push_back({tag + " Pi(0,1) vs simulation", within(e.pi01, s->pi01), show(e.pi01, s->pi01)});
        checks.push_back({tag + " E(X1) vs simulation", within(e.mean_orbit1_dep, m.ex1), show(e.mean_orbit1_dep, m.ex1)});
        checks.push_back({tag + " E(X2) vs simulation", within(e.mean_orbit2_dep, m.ex2), show(e.mean_orbit2_dep, m.ex2)});
        if (is_symmetric(regime))
            checks.push_back({tag + " Pi(1,0) = Pi(0,1)", std::abs(s->pi10 - s->pi01) < 1e-6, num(s->pi10) + " vs " + num(s->pi01)});
    }
    if (rs) {
        double d = 0.0;
        for (std::size_t j = 0; j < n; ++j) d = std::max(d, std::abs(rs->hat1[j] - fr.hat1[j]));
        checks.push_back({"riemann vs fredholm boundary values", d < 1e-4, "sup difference " + num(d)});
    }
    bool all = true;
    json rep = json::array();
    for (const auto& ch : checks) {
        all = all && ch.pass;
        app.say(std::string(ch.pass ? "PASS " : "FAIL ") + ch.name + ": " + ch.detail);
        rep.push_back({{"check", ch.name}, {"pass", ch.pass}, {"detail", ch.detail}});
    }
    std::ofstream(app.file("validate_report.json")) << rep.dump(2) << '\n';
    app.manifest.write();
    return all ? kOk : kNumerical;
}

} // namespace

int main(int argc, char** argv) {
    App app;
    CLI::App cli{"Two-class retrial queue toolkit"};
    cli.require_subcommand(1);
    cli.option_defaults()->always_capture_default();
    cli.add_option("--config", app.g.config, "System configuration file (key = value)");
    cli.add_option("--out", app.g.out, "Output directory (default: $RETRIAL_OUT_DIR or .)");
    cli.add_option("--seed", app.g.seed, "Base random seed");
    cli.add_flag("--quiet", app.g.quiet, "Suppress console output");

    SimOptions so;
    std::size_t grid_n = 512;
    double tol = 1e-13;
    std::string method = "both";
    std::string axis1 = "lambda:0.2:1.2:6", axis2 = "theta:1:6:6", metric = "ED-closed-form";

    auto* stability = cli.add_subcommand("stability", "Stability verdict from rho_hat");
    auto* simulate = cli.add_subcommand("simulate", "Discrete-event simulation");
    simulate->add_option("--departures", so.departures, "Measured departures per replication");
    simulate->add_option("--reps", so.reps, "Replications");
    simulate->add_option("--threads", so.threads, "Worker threads (0 = all cores)");
    auto* sweep = cli.add_subcommand("sweep", "Two-axis parameter sweep to CSV");
    sweep->add_option("--axis1", axis1, "name:lo:hi:count with name in {lambda, theta, mu}");
    sweep->add_option("--axis2", axis2, "name:lo:hi:count");
    sweep->add_option("--metric", metric, "ED-closed-form | simulated | simulated-sojourn");
    sweep->add_option("--departures", so.departures, "Departures per point (simulated metrics)");
    sweep->add_option("--reps", so.reps, "Replications per point (simulated metrics)");
    sweep->add_option("--threads", so.threads, "Worker threads");
    auto* contour = cli.add_subcommand("contour", "Contour utilities");
    contour->require_subcommand(1);
    auto* dump = contour->add_subcommand("dump", "Write contour nodes as CSV");
    dump->add_option("--grid-n", grid_n, "Grid size (power of two >= 64)");
    auto* bvp = cli.add_subcommand("bvp", "Boundary value problem");
    bvp->require_subcommand(1);
    auto* bvp_solve = bvp->add_subcommand("solve", "Solve for the boundary functions");
    bvp_solve->add_option("--grid-n", grid_n, "Grid size (power of two >= 64)");
    bvp_solve->add_option("--tol", tol, "Welding iteration tolerance");
    bvp_solve->add_option("--method", method, "riemann | fredholm | both");
    auto* fred = cli.add_subcommand("fredholm", "Fredholm route");
    fred->require_subcommand(1);
    auto* fred_solve = fred->add_subcommand("solve", "Nystrom solve of the Fredholm equation");
    fred_solve->add_option("--grid-n", grid_n, "Grid size (power of two >= 64)");
    auto* validate = cli.add_subcommand("validate", "Cross-validate analytic paths against simulation");
    validate->add_option("--departures", so.departures, "Measured departures per replication");
    validate->add_option("--reps", so.reps, "Replications");
    validate->add_option("--threads", so.threads, "Worker threads");
    validate->add_option("--grid-n", grid_n, "Grid size for the boundary solvers");

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = cli.exit(e);
        return code == 0 ? kOk : kUsage;
    }
    try {
        if (*stability) return cmd_stability(app);
        if (*simulate) return cmd_simulate(app, so);
        if (*sweep) return cmd_sweep(app, axis1, axis2, metric, so);
        if (*dump) return cmd_contour_dump(app, grid_n);
        if (*bvp_solve) return cmd_bvp(app, "bvp solve", grid_n, tol, method);
        if (*fred_solve) return cmd_bvp(app, "fredholm solve", grid_n, tol, "fredholm");
        if (*validate) return cmd_validate(app, so, grid_n);
    } catch (const InstabilityError& e) {
        std::cerr << "unstable: " << e.what() << '\n';
        return kUnstable;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kUsage;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const RootError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumerical;
    }
    return kUsage;
}
