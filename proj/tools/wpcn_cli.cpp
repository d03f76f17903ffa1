// wpcn: solve, region, common and verify subcommands.
//
// Exit codes: 0 ok, 2 config or usage error, 3 convergence failure,
// 4 verification failure.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "wpcn/verify.hpp"
#include "wpcn/wpcn.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wpcn;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitConvergence = 3;
constexpr int kExitVerify = 4;

class Run {
public:
    Run(std::string command, const std::string& out_dir, const json& config, std::uint64_t seed)
        : dir_(out_dir), start_(std::chrono::steady_clock::now())
    {
        manifest_.command = std::move(command);
        manifest_.config_hash = config_hash(config);
        manifest_.seed = seed;
        manifest_.tool_version = kVersion;
        fs::create_directories(dir_);
    }

    std::string path(const std::string& name)
    {
        manifest_.outputs.push_back(name);
        return (dir_ / name).string();
    }

    void finish()
    {
        manifest_.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        manifest_.write((dir_ / "manifest.json").string());
    }

private:
    fs::path dir_;
    std::chrono::steady_clock::time_point start_;
    RunManifest manifest_;
};

json allocation_json(const Allocation& a)
{
    return {{"tau0", a.tau0}, {"tau1", a.tau1}, {"tau21", a.tau21},
            {"tau22", a.tau22}, {"t21", a.t21},  {"t22", a.t22}};
}

std::vector<double> allocation_row(const Allocation& a)
{
    return {a.tau0, a.tau1, a.tau21, a.tau22, a.t21, a.t22};
}

const std::vector<std::string> kAllocationColumns{"tau0", "tau1", "tau21", "tau22", "t21", "t22"};

std::vector<std::string> with_allocation(std::vector<std::string> head)
{
    head.insert(head.end(), kAllocationColumns.begin(), kAllocationColumns.end());
    return head;
}

std::string tag(double v) { return format_double(v); }

// ---- solve ---------------------------------------------------------------

struct SolveArgs {
    std::string config;
    std::optional<double> w1, w2;
    bool no_coop = false;
    bool csv = false;
    std::string out_dir = "out";
};

int cmd_solve(const SolveArgs& a)
{
    auto cfg = load_config(a.config);
    Weights w = cfg.weights;
    if (a.w1) w.w1 = *a.w1;
    if (a.w2) w.w2 = *a.w2;
    const auto params = cfg.scenario.resolve();
    const auto s = a.no_coop ? solve_nocoop(params, w, cfg.solver) : solve_wsr(params, w, cfg.solver);
    const double bw = params.bandwidth_hz;

    Run run("solve", a.out_dir, cfg.source, cfg.seed);
    if (a.csv) {
        CsvWriter csv({"key", "value"});
        auto put = [&](const std::string& k, double v) { csv.add_row_text({k, format_double(v)}); };
        csv.add_row_text({"status", to_string(s.status)});
        csv.add_row_text({"scheme", a.no_coop ? "nocoop" : "coop"});
        put("w1", w.w1);
        put("w2", w.w2);
        for (std::size_t i = 0; i < kAllocationColumns.size(); ++i)
            put(kAllocationColumns[i], allocation_row(s.allocation)[i]);
        put("p1_w", s.powers.p1);
        put("p21_w", s.powers.p21);
        put("p22_w", s.powers.p22);
        put("r1_bps", bw * user1_rate(s));
        put("r2_bps", bw * s.rates.r2);
        put("wsr_bps_hz", s.wsr);
        put("duality_gap", s.duality_gap);
        for (const auto& [k, v] : s.kkt_residuals) put("kkt_" + k, v);
        put("outer_iterations", double(s.outer_iterations));
        csv.write(run.path("solution.csv"));
        std::cout << csv.str();
    } else {
        json j;
        j["status"] = to_string(s.status);
        j["scheme"] = a.no_coop ? "nocoop" : "coop";
        j["weights"] = {{"w1", w.w1}, {"w2", w.w2}};
        j["allocation"] = allocation_json(s.allocation);
        j["powers_w"] = {{"p1", s.powers.p1}, {"p21", s.powers.p21}, {"p22", s.powers.p22}};
        j["rates_bps"] = {{"r1", bw * user1_rate(s)},         {"r2", bw * s.rates.r2},
                          {"r1_10", bw * s.rates.r1_10},       {"r1_12", bw * s.rates.r1_12},
                          {"r1_20", bw * s.rates.r1_20}};
        j["wsr_bps_hz"] = s.wsr;
        j["duality_gap"] = s.duality_gap;
        j["kkt_residuals"] = s.kkt_residuals;
        j["duals"] = {{"lambda1", s.duals.lambda1}, {"lambda2", s.duals.lambda2},
                      {"lambda3", s.duals.lambda3}, {"lambda4", s.duals.lambda4}};
        j["outer_iterations"] = s.outer_iterations;
        std::ofstream(run.path("solution.json"), std::ios::binary) << j.dump(2) << '\n';
        std::cout << j.dump(2) << '\n';
    }
    run.finish();
    return s.status == SolveStatus::Optimal ? kExitOk : kExitConvergence;
}

// ---- region --------------------------------------------------------------

struct RegionArgs {
    std::string config;
    int points = 50;
    std::vector<double> kappas;
    std::vector<double> alphas;
    std::string out_dir = "out";
};

int cmd_region(const RegionArgs& a)
{
    auto cfg = load_config(a.config);
    if (a.points < 2) throw ConfigError("--points must be at least 2");
    if (cfg.scenario.explicit_gains && (!a.kappas.empty() || !a.alphas.empty()))
        throw ConfigError("geometry sweeps need a geometry-based config, not explicit gains");
    const auto kappas = a.kappas.empty() ? std::vector<double>{cfg.scenario.geometry.kappa} : a.kappas;
    const auto alphas = a.alphas.empty() ? std::vector<double>{cfg.scenario.geometry.alpha} : a.alphas;

    Run run("region", a.out_dir, cfg.source, cfg.seed);
    CsvWriter delta({"alpha", "kappa", "r1max_wc_bps", "r1max_nc_bps", "delta"});
    bool all_ok = true;
    for (double alpha : alphas) {
        for (double kappa : kappas) {
            Scenario sc = cfg.scenario;
            sc.geometry.alpha = alpha;
            sc.geometry.kappa = kappa;
            try {
                sc.geometry.validate();
            } catch (const Error& e) {
                throw ConfigError(e.what());
            }
            const auto rho = sc.rho();
            const double bw = sc.params.bandwidth_hz;
            for (bool coop : {true, false}) {
                AnalysisOptions ao;
                ao.solver = cfg.solver;
                ao.cooperative = coop;
                const auto pts = throughput_region(rho, a.points, ao, bw);
                auto header = with_allocation({"w1", "w2", "r1_bps", "r2_bps"});
                header.push_back("status");
                CsvWriter csv(header);
                for (const auto& p : pts) {
                    std::vector<std::string> cells{format_double(p.weights.w1), format_double(p.weights.w2),
                                                   format_double(p.r1), format_double(p.r2)};
                    for (double v : allocation_row(p.allocation)) cells.push_back(format_double(v));
                    cells.push_back(to_string(p.status));
                    csv.add_row_text(cells);
                    if (!p.ok) {
                        all_ok = false;
                        std::cerr << "region point w1=" << p.weights.w1 << " failed: " << p.error << '\n';
                    }
                }
                csv.write(run.path("region_a" + tag(alpha) + "_k" + tag(kappa) +
                                   (coop ? "_coop.csv" : "_nocoop.csv")));
            }
            try {
                const auto g = far_user_gain(rho, cfg.solver);
                delta.add_row({alpha, kappa, bw * g.r1max_wc, bw * g.r1max_nc, g.delta});
            } catch (const Error& e) {
                all_ok = false;
                std::cerr << "far-user gain failed: " << e.what() << '\n';
            }
        }
    }
    delta.write(run.path("delta.csv"));
    std::cout << delta.str();
    run.finish();
    return all_ok ? kExitOk : kExitConvergence;
}

// ---- common --------------------------------------------------------------

struct CommonArgs {
    std::string config;
    std::vector<double> kappas;
    std::vector<double> p0_dbm;
    std::vector<double> alphas;
    std::optional<std::size_t> trials;
    std::optional<std::uint64_t> seed;
    std::string fading = "off";
    std::string out_dir = "out";
};

int cmd_common(const CommonArgs& a)
{
    auto cfg = load_config(a.config);
    if (!a.kappas.empty() && !a.p0_dbm.empty()) throw ConfigError("give --kappa or --p0-sweep, not both");
    if (cfg.scenario.explicit_gains) throw ConfigError("common needs a geometry-based config");

    McConfig mc;
    mc.base = cfg.scenario;
    mc.common.solver = cfg.solver;
    if (!a.kappas.empty()) {
        mc.sweep = SweepKind::Kappa;
        mc.values = a.kappas;
    } else if (!a.p0_dbm.empty()) {
        mc.sweep = SweepKind::P0Dbm;
        mc.values = a.p0_dbm;
    } else {
        mc.sweep = SweepKind::P0Dbm;
        mc.values = {watts_to_dbm(cfg.scenario.params.p0)};
    }
    mc.alphas = a.alphas.empty() ? std::vector<double>{cfg.scenario.geometry.alpha} : a.alphas;
    mc.fading = a.fading == "rayleigh";
    mc.trials = a.trials.value_or(cfg.trials);
    mc.seed = a.seed.value_or(cfg.seed);
    try {
        mc.validate();
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }

    Run run("common", a.out_dir, cfg.source, mc.seed);
    const auto res = average_common_throughput(mc);
    CsvWriter csv({"alpha", "sweep_value", "mean_coop", "mean_nocoop", "stderr_coop", "stderr_nocoop",
                   "trials", "mean_gain", "stderr_gain", "failures", "relay_declined"});
    for (const auto& p : res.points)
        csv.add_row({p.alpha, p.sweep_value, p.mean_coop, p.mean_nocoop, p.stderr_coop, p.stderr_nocoop,
                     double(p.trials), p.mean_gain, p.stderr_gain, double(p.failures),
                     double(p.relay_declined)});
    csv.write(run.path("common.csv"));
    std::cout << csv.str();

    if (!mc.fading) {
        // Optimal time allocation at the common-throughput point.
        CsvWriter alloc([] {
            std::vector<std::string> h{"alpha", "sweep_value", "scheme", "r_common_bps"};
            h.insert(h.end(), kAllocationColumns.begin(), kAllocationColumns.end());
            return h;
        }());
        for (double alpha : mc.alphas) {
            for (double v : mc.values) {
                const auto sc = detail::sweep_scenario(mc, alpha, v);
                const auto rho = sc.rho();
                for (bool coop : {true, false}) {
                    CommonOptions co = mc.common;
                    co.cooperative = coop;
                    const auto r = common_throughput(rho, co);
                    std::vector<std::string> cells{format_double(alpha), format_double(v),
                                                   coop ? "coop" : "nocoop",
                                                   format_double(sc.params.bandwidth_hz * r.r_common)};
                    for (double x : allocation_row(r.allocation)) cells.push_back(format_double(x));
                    alloc.add_row_text(cells);
                }
            }
        }
        alloc.write(run.path("common_allocation.csv"));
    }
    run.finish();
    if (res.total_failures() > 0) {
        std::cerr << res.total_failures() << " trial(s) failed\n";
        return kExitConvergence;
    }
    return kExitOk;
}

// ---- verify --------------------------------------------------------------

struct VerifyArgs {
    std::string config;
    std::size_t random = 0;
    std::uint64_t seed = 1;
    bool corrupt_tolerance = false;
    std::string out_dir = "out";
};

int cmd_verify(const VerifyArgs& a)
{
    VerifyOptions opts;
    opts.seed = a.seed;
    json source = json::object();
    std::vector<VerifyCase> cases;
    if (!a.config.empty()) {
        const auto cfg = load_config(a.config);
        source = cfg.source;
        opts.solver = cfg.solver;
        cases.push_back({"config", cfg.scenario.rho(), cfg.weights});
    }
    if (a.random > 0) {
        const auto r = random_cases(a.random, a.seed);
        cases.insert(cases.end(), r.begin(), r.end());
    }
    if (cases.empty()) cases.push_back({"reference", reference_scenario().rho(), Weights{}});
    // Test hook: a solver that accepts anything after one outer step. The
    // suite's own thresholds must catch it.
    if (a.corrupt_tolerance) {
        opts.solver.max_outer_iters = 1;
        opts.solver.outer_tol = 1e3;
        opts.solver.kkt_tol = 1e3;
    }

    Run run("verify", a.out_dir, json{{"config", source}, {"random", a.random}}, a.seed);
    const auto report = run_verification(cases, opts);
    CsvWriter csv({"scenario", "check", "passed", "value", "limit"});
    for (const auto& c : report.checks) {
        csv.add_row_text({c.scenario, c.name, c.passed ? "1" : "0", format_double(c.value),
                          format_double(c.limit)});
        if (!c.passed)
            std::cerr << "FAIL " << c.scenario << ' ' << c.name << " value=" << c.value
                      << " limit=" << c.limit << '\n';
    }
    csv.write(run.path("verify.csv"));
    run.finish();
    std::cout << report.checks.size() - report.failures() << '/' << report.checks.size()
              << " checks passed over " << cases.size() << " scenario(s)\n";
    return report.passed() ? kExitOk : kExitVerify;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Wireless powered communication network with user cooperation"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    SolveArgs sa;
    auto* solve = app.add_subcommand("solve", "Weighted sum-rate allocation for one scenario");
    solve->add_option("config", sa.config, "Scenario JSON")->required();
    solve->add_option("--w1", sa.w1, "Weight of the far user");
    solve->add_option("--w2", sa.w2, "Weight of the near user");
    solve->add_flag("--no-coop", sa.no_coop, "Solve the baseline without cooperation");
    auto* as_json = solve->add_flag("--json", "JSON report (default)");
    solve->add_flag("--csv", sa.csv, "key,value report")->excludes(as_json);
    solve->add_option("--out-dir", sa.out_dir, "Output directory");

    RegionArgs ra;
    auto* region = app.add_subcommand("region", "Throughput regions with and without cooperation");
    region->add_option("config", ra.config, "Scenario JSON")->required();
    region->add_option("--points", ra.points, "Weight points per region")->check(CLI::Range(2, 100000));
    region->add_option("--kappa-sweep", ra.kappas, "Near-user positions")->delimiter(',');
    region->add_option("--alpha-sweep", ra.alphas, "Path-loss exponents")->delimiter(',');
    region->add_option("--out-dir", ra.out_dir, "Output directory");

    CommonArgs ca;
    auto* common = app.add_subcommand("common", "Max common throughput sweeps");
    common->add_option("config", ca.config, "Scenario JSON")->required();
    auto* kopt = common->add_option("--kappa", ca.kappas, "Near-user positions")->delimiter(',');
    common->add_option("--p0-sweep", ca.p0_dbm, "H-AP powers in dBm")->delimiter(',')->excludes(kopt);
    common->add_option("--alpha", ca.alphas, "Path-loss exponents")->delimiter(',');
    common->add_option("--trials", ca.trials, "Monte Carlo trials per point");
    common->add_option("--seed", ca.seed, "Random seed");
    common->add_option("--fading", ca.fading, "off or rayleigh")
        ->check(CLI::IsMember({"off", "rayleigh"}));
    common->add_option("--out-dir", ca.out_dir, "Output directory");

    VerifyArgs va;
    auto* verify = app.add_subcommand("verify", "Cross-check the solver against the oracles");
    verify->add_option("config", va.config, "Scenario JSON");
    verify->add_option("--random", va.random, "Number of random scenarios");
    verify->add_option("--seed", va.seed, "Seed for random scenarios");
    verify->add_flag("--corrupt-tolerance", va.corrupt_tolerance, "Starve the solver (tests the failure path)");
    verify->add_option("--out-dir", va.out_dir, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*solve) return cmd_solve(sa);
        if (*region) return cmd_region(ra);
        if (*common) return cmd_common(ca);
        if (*verify) return cmd_verify(va);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ConvergenceError& e) {
        std::cerr << "convergence failure: " << e.what() << '\n';
        return kExitConvergence;
    } catch (const InvalidParams& e) {
        std::cerr << "invalid parameters: " << e.what() << '\n';
        return kExitConfig;
    } catch (const InvalidGeometry& e) {
        std::cerr << "invalid geometry: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConvergence;
    }
    return kExitConfig;
}
