#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "growfrag/csv.hpp"
#include "growfrag/errors.hpp"
#include "growfrag/scenario.hpp"
#include "growfrag/suites.hpp"

using namespace growfrag;
namespace fs = std::filesystem;

namespace {

struct Common {
    std::string scenario;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> replicas;
    unsigned workers = 1;
    std::string out;
    std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--scenario", c.scenario, "scenario file (key = value)")->required();
    cmd->add_option("--seed", c.seed, "root seed, overrides run.seed");
    cmd->add_option("--replicas", c.replicas, "replica count, overrides run.replicas");
    cmd->add_option("--workers", c.workers, "worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--out", c.out, "output directory; GROWFRAG_OUT takes precedence");
    cmd->add_option("--set", c.sets, "extra key=value override, repeatable");
}

Scenario load(const Common& c) {
    std::vector<std::string> ov = c.sets;
    if (c.seed) ov.push_back("run.seed=" + std::to_string(*c.seed));
    if (c.replicas) ov.push_back("run.replicas=" + std::to_string(*c.replicas));
    if (!c.out.empty()) ov.push_back("run.out=" + c.out);
    if (const char* env = std::getenv("GROWFRAG_OUT"); env && *env) ov.push_back(std::string("run.out=") + env);
    try {
        return load_scenario(c.scenario, ov);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
}

fs::path out_file(const Scenario& sc, const std::string& name) {
    fs::create_directories(sc.out);
    return fs::path(sc.out) / name;
}

void write_json(const Scenario& sc, const std::string& name, const nlohmann::ordered_json& j) {
    std::ofstream os(out_file(sc, name), std::ios::binary);
    os << j.dump(2) << "\n";
}

int report_exit(const Report& r, bool pass, const fs::path& where) {
    std::cout << r.suite << ": " << (pass ? "PASS" : "FAIL") << " (" << r.failures() << " of " << r.tests.size()
              << " tests failed) -> " << where.string() << "\n";
    return pass ? 0 : 3;
}

int cmd_simulate(const Scenario& sc, unsigned workers) {
    const DislocationModel model = sc.model();
    std::vector<TraceRequest> req;
    for (double w : sc.resolved_omegas()) req.push_back({w, std::nullopt, 0});
    std::optional<BarrierSpec> barrier;
    if (!sc.barrier_a.empty()) {
        const double w0 = sc.resolved_omega();
        barrier = BarrierSpec{w0, cumulant_derivative(model, w0, sc.resolved_level()), sc.mesh, {1}};
        for (double a : sc.barrier_a) req.push_back({w0, a, 0});
    }
    auto rows = simulate_traces(sc, req, barrier, workers, sc.seed);
    {
        std::ofstream os(out_file(sc, "traces.csv"), std::ios::binary);
        csv::Writer w(os);
        w.row({"replica", "omega", "a", "time", "W", "dW", "dWa", "count", "max_pos"});
        for (std::size_t r = 0; r < rows.size(); ++r) {
            for (const auto& tr : rows[r]) {
                for (std::size_t k = 0; k < tr.times.size(); ++k) {
                    w.field(r).field(tr.omega);
                    if (tr.a) {
                        w.field(*tr.a);
                    } else {
                        w.field("");
                    }
                    w.field(tr.times[k]).field(tr.W[k]).field(tr.dW[k]);
                    if (tr.a) {
                        w.field(tr.dWa[k]);
                    } else {
                        w.field("");
                    }
                    w.field(tr.count[k]).field(tr.max_pos[k]).end_row();
                }
            }
        }
    }
    // Terminal snapshot of replica 0.
    PopulationConfig cfg;
    cfg.level = sc.resolved_level();
    cfg.cap = sc.cap;
    Population pop(model, cfg, derive_seed(sc.seed, 0, Domain::particles));
    pop.advance_to(sc.t_grid.back());
    std::ofstream os(out_file(sc, "snapshot.csv"), std::ios::binary);
    write_snapshot_csv(os, snapshot(pop));
    std::cout << "simulate: " << rows.size() << " replicas -> " << sc.out << "\n";
    return 0;
}

int cmd_kappa(const Scenario& sc) {
    const DislocationModel model = sc.model();
    std::ofstream os(out_file(sc, "kappa.csv"), std::ios::binary);
    csv::Writer w(os);
    w.row({"quantity", "q", "value"});
    for (double q : sc.q_grid) w.field("kappa").field(q).field(cumulant(model, q)).end_row();
    for (double q : sc.q_grid) {
        if (!model.in_interior(q) || std::isinf(cumulant(model, q))) continue;
        w.field("kappa_prime").field(q).field(cumulant_derivative(model, q)).end_row();
    }
    for (int n = 0; n <= model.ladder().max_index(); ++n) {
        std::string name = "kappa_b" + std::to_string(n);
        for (double q : sc.q_grid) w.field(name).field(q).field(cumulant(model, q, n)).end_row();
    }
    try {
        w.field("omega_bar").field("").field(omega_bar(model)).end_row();
    } catch (const NoCriticalPoint&) {
        w.field("omega_bar").field("").field("nan").end_row();
    }
    std::cout << "kappa -> " << (fs::path(sc.out) / "kappa.csv").string() << "\n";
    return 0;
}

void write_quantiles(csv::Writer& w, const std::string& series, const ConvergenceReport& r) {
    for (const auto& q : r.rows) {
        w.field(series).field(q.time).field(q.q05).field(q.q25).field(q.median).field(q.q75).field(q.q95)
            .field(q.mean).end_row();
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"growth-fragmentation simulator and verification suites"};
    app.require_subcommand(1);
    Common c;
    const std::pair<const char*, const char*> cmds[] = {
        {"simulate", "population and martingale traces to CSV"},
        {"verify-martingales", "unit-mean and zero-mean martingale checks"},
        {"verify-mto", "many-to-one panel"},
        {"verify-spine", "forward/backward spine law panel"},
        {"derivative", "derivative martingale convergence diagnostics"},
        {"kappa", "tabulate the cumulant"}};
    for (const auto& [name, help] : cmds) add_common(app.add_subcommand(name, help), c);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    const std::string cmd = app.get_subcommands().front()->get_name();
    try {
        Scenario sc = load(c);
        if (cmd == "simulate") return cmd_simulate(sc, c.workers);
        if (cmd == "kappa") return cmd_kappa(sc);
        if (cmd == "verify-martingales") {
            Report r = with_rerun_policy([&](std::uint64_t s) { return martingale_suite(sc, c.workers, s); }, sc.seed);
            write_json(sc, "martingales.json", to_json(r));
            return report_exit(r, policy_pass(r), fs::path(sc.out) / "martingales.json");
        }
        if (cmd == "verify-mto") {
            Report r = with_rerun_policy([&](std::uint64_t s) { return many_to_one_suite(sc, c.workers, s); }, sc.seed);
            write_json(sc, "mto.json", to_json(r));
            return report_exit(r, policy_pass(r), fs::path(sc.out) / "mto.json");
        }
        if (cmd == "verify-spine") {
            Report r = spine_suite(sc, c.workers, sc.seed);
            write_json(sc, "spine.json", to_json(r));
            return report_exit(r, policy_pass(r) && r.details["control_pass"].get<bool>(),
                               fs::path(sc.out) / "spine.json");
        }
        if (cmd == "derivative") {
            DerivativeRun d = derivative_suite(sc, c.workers, sc.seed);
            write_json(sc, "derivative.json", to_json(d.report));
            std::ofstream os(out_file(sc, "derivative_quantiles.csv"), std::ios::binary);
            csv::Writer w(os);
            w.row({"series", "time", "q05", "q25", "median", "q75", "q95", "mean"});
            write_quantiles(w, "W_omega_bar", d.w_bar);
            write_quantiles(w, "dW_omega_bar", d.dw_bar);
            write_quantiles(w, "dW_omega_hi", d.dw_hi);
            return report_exit(d.report, d.report.pass(), fs::path(sc.out) / "derivative.json");
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const PopulationCap& e) {
        std::cerr << "population cap hit at t = " << e.time << ": " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
