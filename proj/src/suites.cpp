#include "growfrag/suites.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "growfrag/csv.hpp"
#include "growfrag/spine.hpp"

namespace growfrag {

namespace {

std::string tag(const char* key, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return std::string(key) + "=" + buf;
}

SampleSet column(const std::vector<std::vector<MartingaleTrace>>& rows, std::size_t req, std::size_t k,
                 std::vector<double> MartingaleTrace::*field) {
    SampleSet s;
    for (const auto& r : rows) s.add((r[req].*field)[k]);
    return s;
}

TestResult flag(std::string name, bool ok, double estimate, double threshold, std::string note = {}) {
    TestResult t;
    t.name = std::move(name);
    t.kind = "exact";
    t.estimate = estimate;
    t.threshold = threshold;
    t.pass = ok;
    t.note = std::move(note);
    return t;
}

}  // namespace

bool policy_pass(const Report& r) {
    if (r.failures() == 0) return true;
    if (r.failures() > 1 || !r.details.contains("rerun")) return false;
    return r.details["rerun"]["failures"].get<std::size_t>() == 0;
}

Report with_rerun_policy(const std::function<Report(std::uint64_t)>& suite, std::uint64_t seed) {
    Report r = suite(seed);
    if (r.failures() == 1) {
        Report again = suite(derive_seed(seed, {static_cast<std::uint64_t>(Domain::rerun)}));
        r.details["rerun"] = to_json(again);
        r.details["rerun"]["failures"] = again.failures();
    }
    r.details["policy_pass"] = policy_pass(r);
    return r;
}

std::vector<std::vector<MartingaleTrace>> simulate_traces(const Scenario& sc, const std::vector<TraceRequest>& req,
                                                          const std::optional<BarrierSpec>& barrier, unsigned workers,
                                                          std::uint64_t seed) {
    const DislocationModel model = sc.model();
    PopulationConfig cfg;
    cfg.level = sc.resolved_level();
    cfg.cap = sc.cap;
    cfg.barrier = barrier;
    return run_replicas(sc.replicas, workers, [&](std::size_t r) {
        Population pop(model, cfg, derive_seed(seed, r, Domain::particles));
        return record_traces(pop, req, sc.t_grid);
    });
}

Report martingale_suite(const Scenario& sc, unsigned workers, std::uint64_t seed) {
    const DislocationModel model = sc.model();
    const int level = sc.resolved_level();
    const std::vector<double> omegas = sc.resolved_omegas();
    std::vector<TraceRequest> req;
    for (double w : omegas) req.push_back({w, std::nullopt, 0});

    std::optional<BarrierSpec> barrier;
    const double w0 = sc.resolved_omega();
    if (!sc.barrier_a.empty()) {
        // Strides 2 and 1 on a grid of h/2 give meshes h and h/2 on the same paths.
        Tilt tilt = Tilt::at(model, w0, level);
        barrier = BarrierSpec{w0, tilt.kappa_prime, sc.mesh / 2.0, {2, 1}};
        for (double a : sc.barrier_a) {
            req.push_back({w0, a, 0});
            req.push_back({w0, a, 1});
        }
        req.push_back({w0, std::nullopt, 0});
    }
    auto rows = simulate_traces(sc, req, barrier, workers, seed);

    Report rep;
    rep.suite = "martingales";
    rep.details["level"] = level;
    rep.details["replicas"] = sc.replicas;
    rep.details["seed"] = seed;
    for (std::size_t i = 0; i < omegas.size(); ++i) {
        for (std::size_t k = 0; k < sc.t_grid.size(); ++k) {
            std::string where = tag("omega", omegas[i]) + " " + tag("t", sc.t_grid[k]);
            rep.tests.push_back(z_result("W mean " + where, mean_se(column(rows, i, k, &MartingaleTrace::W)), 1.0));
            rep.tests.push_back(z_result("dW mean " + where, mean_se(column(rows, i, k, &MartingaleTrace::dW)), 0.0));
        }
    }
    for (std::size_t j = 0; j < sc.barrier_a.size(); ++j) {
        const double a = sc.barrier_a[j];
        const std::size_t coarse = omegas.size() + 2 * j, fine = coarse + 1;
        for (std::size_t k = 0; k < sc.t_grid.size(); ++k) {
            std::string where = tag("a", a) + " " + tag("t", sc.t_grid[k]);
            auto mc = mean_se(column(rows, coarse, k, &MartingaleTrace::dWa));
            auto mf = mean_se(column(rows, fine, k, &MartingaleTrace::dWa));
            rep.tests.push_back(z_result("dWa mean " + where + " " + tag("h", sc.mesh), mc, a));
            rep.tests.push_back(z_result("dWa mean " + where + " " + tag("h", sc.mesh / 2), mf, a));
            if (k + 1 == sc.t_grid.size()) {
                // a W - dW is the unstopped sum with mean a, so subtracting it
                // leaves only the crossed particles and isolates the bias.
                const std::size_t free = req.size() - 1;
                SampleSet sc_bias, sf_bias, gap;
                for (const auto& r : rows) {
                    double cv = a * r[free].W[k] - r[free].dW[k];
                    sc_bias.add(r[coarse].dWa[k] - cv);
                    sf_bias.add(r[fine].dWa[k] - cv);
                    gap.add(r[coarse].dWa[k] - r[fine].dWa[k]);
                }
                auto bc = mean_se(sc_bias), bf = mean_se(sf_bias);
                auto t = flag("dWa bias shrinks with mesh " + where, std::abs(bf.mean) < std::abs(bc.mean),
                              std::abs(bf.mean), std::abs(bc.mean),
                              "control-variate estimate |bias(h/2)|, threshold |bias(h)|");
                t.se = mean_se(gap).se;  // paired, the shared noise cancels
                rep.tests.push_back(t);
            }
        }
    }
    return rep;
}

Report many_to_one_suite(const Scenario& sc, unsigned workers, std::uint64_t seed) {
    const DislocationModel model = sc.model();
    const double omega = sc.resolved_omega();
    std::vector<TestFunction> fs;
    for (double q : sc.mto_q) fs.push_back(TestFunction::exponential(q));
    for (double c : sc.mto_thresholds) {
        fs.push_back(TestFunction::above(c));
        fs.push_back(TestFunction::below(c));
    }
    ReplicaOptions ro{sc.resolved_level(), sc.replicas, workers, sc.cap, sc.mesh};
    Report rep;
    rep.suite = "many_to_one";
    rep.details["omega"] = omega;
    rep.details["t"] = sc.mto_t;
    rep.details["replicas"] = sc.replicas;
    rep.details["seed"] = seed;
    rep.details["functions"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < fs.size(); ++i) {
        Report one = many_to_one_check(model, omega, fs[i], sc.mto_t, ro, derive_seed(seed, {i}));
        for (auto& t : one.tests) rep.tests.push_back(t);
        rep.details["functions"].push_back(one.details);
    }
    return rep;
}

Report spine_suite(const Scenario& sc, unsigned workers, std::uint64_t seed) {
    const DislocationModel model = sc.model();
    const double omega = sc.resolved_omega();
    SpineLawOptions opts;
    opts.replicas = ReplicaOptions{sc.resolved_level(), sc.replicas, workers, sc.cap, sc.mesh};
    Report rep = with_rerun_policy(
        [&](std::uint64_t s) { return spine_law_check(model, omega, sc.spine_t, opts, s); }, seed);
    rep.suite = "spine";
    rep.details["seed"] = seed;

    SpineLawOptions pert = opts;
    pert.drift_perturbation = sc.spine_perturbation;
    Report control = spine_law_check(model, omega, sc.spine_t, pert,
                                     derive_seed(seed, {static_cast<std::uint64_t>(Domain::forward), 1}));
    double min_p = 1.0;
    for (const auto& t : control.tests) min_p = std::min(min_p, t.p_value);
    TestResult c = flag("power control " + tag("drift", sc.spine_perturbation), min_p < opts.alpha, min_p, opts.alpha,
                        "estimate is the smallest p-value of the perturbed panel; pass means it rejects");
    c.p_value = min_p;
    c.kind = "control";
    rep.details["control_test"] = to_json(c);
    rep.details["control"] = to_json(control);
    rep.details["control_pass"] = c.pass;
    return rep;
}

DerivativeRun derivative_suite(const Scenario& sc, unsigned workers, std::uint64_t seed) {
    const DislocationModel model = sc.model();
    DerivativeRun out{};
    out.omega_bar = omega_bar(model);
    out.omega_hi = out.omega_bar + sc.derivative_offset;
    auto rows = simulate_traces(sc, {{out.omega_bar, std::nullopt, 0}, {out.omega_hi, std::nullopt, 0}},
                                std::nullopt, workers, seed);
    std::vector<MartingaleTrace> bar, hi;
    for (auto& r : rows) {
        bar.push_back(std::move(r[0]));
        hi.push_back(std::move(r[1]));
    }
    out.w_bar = convergence_report(bar, TraceKind::W);
    out.dw_bar = convergence_report(bar, TraceKind::dW);
    out.dw_hi = convergence_report(hi, TraceKind::dW);

    Report& rep = out.report;
    rep.suite = "derivative";
    rep.details["omega_bar"] = out.omega_bar;
    rep.details["omega_hi"] = out.omega_hi;
    rep.details["replicas"] = sc.replicas;
    rep.details["seed"] = seed;
    rep.tests.push_back(flag("W(omega_bar) median strictly decreasing", out.w_bar.median_strictly_decreasing,
                             out.w_bar.median_slope, 0.0, "estimate is the least-squares slope of the median"));
    rep.tests.push_back(flag("dW(omega_bar) terminal nonpositive fraction",
                             out.dw_bar.fraction_nonpositive_terminal >= 0.95,
                             out.dw_bar.fraction_nonpositive_terminal, 0.95));
    rep.tests.push_back(flag("dW(omega_hi) terminal |median| ratio", out.dw_hi.terminal_abs_median_ratio < 0.1,
                             out.dw_hi.terminal_abs_median_ratio, 0.1));
    TestResult tail = flag("-dW(omega_bar) running mean", true,
                           out.dw_bar.running_mean.empty() ? 0.0 : -out.dw_bar.running_mean.back(), 0.0,
                           "heavy-tail diagnostic, reported without a threshold");
    tail.kind = "info";
    rep.tests.push_back(tail);
    rep.details["w_bar"] = to_json(out.w_bar);
    rep.details["dw_bar"] = to_json(out.dw_bar);
    rep.details["dw_hi"] = to_json(out.dw_hi);
    return out;
}

}  // namespace growfrag
