#include "growfrag/spine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "growfrag/csv.hpp"
#include "growfrag/errors.hpp"
#include "growfrag/martingales.hpp"

namespace growfrag {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct SpineEvent {
    double time;
    SpineMark mark;
};

// Adds the explicit spine events to the motion path.
void merge_events(LevyPath& path, const std::vector<SpineEvent>& events) {
    std::size_t e = 0;
    double cum = 0.0;
    for (std::size_t k = 0; k < path.times.size(); ++k) {
        double before = cum;
        while (e < events.size() && events[e].time <= path.times[k]) {
            cum += std::log(events[e].mark.y);
            ++e;
        }
        path.left_values[k] += before;
        path.values[k] += cum;
    }
    for (const auto& ev : events) path.jumps.push_back({ev.time, std::log(ev.mark.y)});
    std::sort(path.jumps.begin(), path.jumps.end(),
              [](const JumpRecord& a, const JumpRecord& b) { return a.time < b.time; });
}

// Index of entry `target` (0-based, >= 1) among the surviving fragments of
// its level, by the sibling rule: positions nonincreasing in the index.
struct EventLabels {
    std::vector<int> level;  // per entry j >= 1
    std::vector<int> rank;
};

EventLabels event_labels(const MassPartition& q, const TruncationLadder& ladder) {
    EventLabels out;
    out.level.assign(q.size(), 0);
    out.rank.assign(q.size(), 0);
    int current = 0, rank = 0;
    for (std::size_t j = 1; j < q.size(); ++j) {
        int m = level_of(q[j], ladder);
        if (m != current) {
            current = m;
            rank = 0;
        }
        out.level[j] = m;
        out.rank[j] = ++rank;
    }
    return out;
}

double quantize(double v) {
    if (!std::isfinite(v)) return v;
    return std::round(v * 1e9) / 1e9;
}

}  // namespace

SpineOutcome forward_decorated(const DislocationModel& model, double omega, double t, const ForwardOptions& opts,
                               std::uint64_t seed) {
    if (!(t > 0.0)) throw std::invalid_argument("horizon must be positive");
    if (std::isinf(cumulant(model, omega))) throw DomainError("omega outside dom kappa");
    const int n = opts.level;
    const TruncationLadder& ladder = model.ladder();
    const double thr = ladder.threshold(n);
    const double bn = ladder.b(n);

    LevyExponentParams motion;
    double event_rate;
    double kappa_prime;
    if (opts.coupled_killing) {
        if (!model.finite_activity()) throw InfiniteActivity("coupled killing needs a finite dislocation rate");
        LevyExponentParams full = spine_levy_params(model, omega);
        full.cutoff = 0.0;
        motion.gaussian = model.sigma();
        motion.center = simulation_drift(full);
        event_rate = spine_event_rate(model, omega);
        kappa_prime = cumulant_derivative(model, omega);
    } else {
        motion = spine_motion_params(model, omega, n);
        event_rate = immigration_rate(model, omega, n);
        kappa_prime = cumulant_derivative(model, omega, n);
    }
    motion.center += opts.drift_perturbation;

    std::vector<SpineEvent> events;
    if (event_rate > 0.0) {
        Rng ev_rng(derive_seed(seed, {static_cast<std::uint64_t>(Domain::immigration)}));
        double s = ev_rng.exponential(event_rate);
        while (s <= t) {
            SpineMark mark = opts.coupled_killing ? spine_kernel(model, omega, ev_rng)
                                                  : spine_kernel(model, omega, ev_rng, n);
            events.push_back({s, std::move(mark)});
            s += ev_rng.exponential(event_rate);
        }
    }

    std::vector<double> trace_times = opts.trace_times.empty() ? std::vector<double>{t} : opts.trace_times;
    std::vector<double> extra = trace_times;
    for (const auto& e : events) extra.push_back(e.time);
    Rng spine_rng(derive_seed(seed, {static_cast<std::uint64_t>(Domain::spine)}));
    LevyPath xi = simulate_path(motion, t, opts.mesh, spine_rng, extra);
    merge_events(xi, events);

    PopulationConfig cfg;
    cfg.level = n;
    cfg.cap = opts.cap;
    Population pop(model, cfg, derive_seed(seed, {static_cast<std::uint64_t>(Domain::particles)}), Population::Empty{});

    SpineOutcome out{pop, Label{}, true, {}, trace_times, {}, {}, std::nullopt, kappa_prime};
    Label v;
    std::vector<int> kv(static_cast<std::size_t>(n), 0);
    int nv = 0;
    double v_birth = 0.0;
    bool alive = true;

    for (const auto& ev : events) {
        const double s = ev.time;
        pop.advance_to(s);
        if (!alive) continue;
        const SpineMark& mk = ev.mark;
        MassPartition q = truncate(mk.p, bn);
        const bool kill = mk.i >= 2 && mk.y <= thr;
        if (q.size() < 2 && !kill) continue;  // a plain spine jump

        const double pre = xi.left_value_at(s);
        EventLabels lab = event_labels(q, ladder);
        // The parent of this event is the particle currently labelled v.
        int last_level = 0;
        for (std::size_t j = 1; j < q.size(); ++j) {
            if (lab.level[j] != last_level) {
                last_level = lab.level[j];
                ++kv[static_cast<std::size_t>(last_level - 1)];
            }
        }
        auto child_label = [&](std::size_t j) {
            int m = lab.level[j];
            return child(v, m, kv[static_cast<std::size_t>(m - 1)], lab.rank[j]);
        };
        const int branches_after = nv + (q.size() >= 2 ? 1 : 0);
        const std::size_t followed = static_cast<std::size_t>(mk.i - 1);

        ImmigrationRecord rec{s, mk.y, mk.i, q, {}};
        for (std::size_t j = 0; j < q.size(); ++j) {
            if (j != followed) rec.offsets.push_back(std::log(q[j]));
        }
        out.immigration.push_back(std::move(rec));

        for (std::size_t j = 1; j < q.size(); ++j) {
            if (j == followed) continue;
            Particle g;
            g.label = child_label(j);
            g.birth_time = s;
            g.position = pre + std::log(q[j]);
            pop.insert(std::move(g));
        }
        if (followed == 0) {
            nv = branches_after;
            continue;
        }
        // The spine leaves its parent, which carries on as an ordinary particle.
        Particle parent;
        parent.label = v;
        parent.birth_time = v_birth;
        parent.position = pre + std::log(q[0]);
        parent.k_counters = kv;
        parent.branch_count = branches_after;
        pop.insert(std::move(parent));
        if (kill) {
            alive = false;
            out.kill_time = s;
            continue;
        }
        v = child_label(followed);
        kv.assign(static_cast<std::size_t>(n), 0);
        nv = 0;
        v_birth = s;
    }
    pop.advance_to(t);
    if (alive) {
        Particle sp;
        sp.label = v;
        sp.birth_time = v_birth;
        sp.position = xi.terminal();
        sp.k_counters = kv;
        sp.branch_count = nv;
        pop.insert(std::move(sp));
    }
    if (opts.report_kill_time && !opts.coupled_killing) {
        double theta = spine_kill_rate(model, omega, n);
        Rng kill_rng(derive_seed(seed, {static_cast<std::uint64_t>(Domain::killing)}));
        if (theta > 0.0) out.kill_time = kill_rng.exponential(theta);
    }

    for (double r : trace_times) out.lambda.push_back(opts.barrier_a + r * kappa_prime - xi.value_at(r));
    out.population = std::move(pop);
    out.spine_label = v;
    out.spine_alive = alive;
    out.xi = std::move(xi);
    return out;
}

void write_spine_csv(std::ostream& os, const SpineOutcome& out) {
    csv::Writer w(os);
    w.row({"time", "xi", "lambda"});
    for (std::size_t k = 0; k < out.trace_times.size(); ++k) {
        w.field(out.trace_times[k]).field(out.xi.value_at(out.trace_times[k])).field(out.lambda[k]).end_row();
    }
    os << "\r\n";
    w.row({"time", "y", "i", "partners"});
    for (const auto& r : out.immigration) {
        std::string partners;
        for (std::size_t j = 0; j < r.offsets.size(); ++j) {
            if (j) partners += ';';
            partners += csv::format_double(r.offsets[j]);
        }
        w.field(r.time).field(r.y).field(r.i).field(partners).end_row();
    }
    os << "\r\n";
    write_snapshot_csv(os, snapshot(out.population));
}

TiltedEstimates backward_tilted_estimate(const DislocationModel& model, double omega, double t,
                                         const SpineFunctional& g, const ReplicaOptions& opts, std::uint64_t seed) {
    if (opts.replicas < 2) throw TooFewSamples("need at least two replicas");
    const Tilt tilt = Tilt::at(model, omega, opts.level);
    auto rows = run_replicas(opts.replicas, opts.workers, [&](std::size_t r) {
        PopulationConfig cfg;
        cfg.level = opts.level;
        cfg.cap = opts.cap;
        Population pop(model, cfg, derive_seed(seed, r, Domain::particles));
        pop.advance_to(t);
        Snapshot s = snapshot(pop);
        std::vector<double> w(s.entries.size());
        double total = 0.0, full = 0.0;
        for (std::size_t u = 0; u < w.size(); ++u) {
            w[u] = std::exp(omega * s.entries[u].position - t * tilt.kappa);
            total += w[u];
            full += w[u] * g(s, u);
        }
        Rng pick_rng(derive_seed(seed, r, Domain::backward));
        double x = pick_rng.uniform() * total;
        std::size_t u = 0;
        while (u + 1 < w.size() && x >= w[u]) {
            x -= w[u];
            ++u;
        }
        return std::pair<double, double>{full, total * g(s, u)};
    });
    SampleSet a, b;
    for (const auto& [full, pick] : rows) {
        a.add(full);
        b.add(pick);
    }
    auto ma = mean_se(a), mb = mean_se(b);
    return {{ma.mean, ma.se, opts.replicas, omega, t}, {mb.mean, mb.se, opts.replicas, omega, t}};
}

double TestFunction::operator()(double x) const {
    switch (kind) {
        case Kind::exponential: return std::exp(q * x);
        case Kind::indicator_above: return x > threshold ? 1.0 : 0.0;
        case Kind::indicator_below: return x <= threshold ? 1.0 : 0.0;
        case Kind::poly_exponential: return std::pow(x, degree) * std::exp(q * x);
    }
    return 0.0;
}

std::string TestFunction::name() const {
    switch (kind) {
        case Kind::exponential: return "exp(" + csv::format_double(q) + "x)";
        case Kind::indicator_above: return "1{x>" + csv::format_double(threshold) + "}";
        case Kind::indicator_below: return "1{x<=" + csv::format_double(threshold) + "}";
        case Kind::poly_exponential:
            return "x^" + std::to_string(degree) + " exp(" + csv::format_double(q) + "x)";
    }
    return "?";
}

Report many_to_one_check(const DislocationModel& model, double omega, const TestFunction& f, double t,
                         const ReplicaOptions& opts, std::uint64_t seed) {
    const int n = opts.level;
    const double kappa_omega = cumulant(model, omega, n);
    auto lhs_rows = run_replicas(opts.replicas, opts.workers, [&](std::size_t r) {
        PopulationConfig cfg;
        cfg.level = n;
        cfg.cap = opts.cap;
        Population pop(model, cfg, derive_seed(seed, r, Domain::particles));
        pop.advance_to(t);
        double sum = 0.0;
        for (const auto& p : pop.particles()) sum += f(p.position);
        return sum;
    });
    auto lhs = mean_se(SampleSet(lhs_rows));

    Report rep;
    rep.suite = "many_to_one";
    rep.details["function"] = f.name();
    rep.details["omega"] = omega;
    rep.details["t"] = t;
    rep.details["lhs"] = {{"mean", lhs.mean}, {"se", lhs.se}};
    const LevyExponentParams spine = spine_levy_params(model, omega, n);
    if (f.closed_form()) {
        // e^{t kappa(omega)} E[e^{(q - omega) xi}] = e^{t (kappa(omega) + Ess kappa(q - omega))}
        double shift = f.q - omega;
        double ess = shift >= 0.0 ? laplace_exponent(spine, shift) : cumulant(model, f.q, n) - kappa_omega;
        double rhs = std::exp(t * (kappa_omega + ess));
        rep.details["rhs"] = {{"closed_form", rhs}};
        rep.tests.push_back(z_result("many_to_one " + f.name(), lhs, rhs));
        return rep;
    }
    auto rhs_rows = run_replicas(opts.replicas, opts.workers, [&](std::size_t r) {
        Rng rng(derive_seed(seed, r, Domain::levy));
        LevyPath path = simulate_path(spine, t, std::max(t, opts.mesh), rng);
        double x = path.terminal();
        return std::exp(t * kappa_omega - omega * x) * f(x);
    });
    auto rhs = mean_se(SampleSet(rhs_rows));
    rep.details["rhs"] = {{"mean", rhs.mean}, {"se", rhs.se}};
    rep.tests.push_back(z_result("many_to_one " + f.name() + " cross-validation", lhs, rhs));
    return rep;
}

Report spine_law_check(const DislocationModel& model, double omega, double t, const SpineLawOptions& opts,
                       std::uint64_t seed) {
    const ReplicaOptions& ro = opts.replicas;
    const Tilt tilt = Tilt::at(model, omega, ro.level);
    struct Features {
        double position, count, w, max, offset, weight;
    };

    const std::uint64_t back_seed = derive_seed(seed, {static_cast<std::uint64_t>(Domain::backward)});
    auto back = run_replicas(ro.replicas, ro.workers, [&](std::size_t r) {
        PopulationConfig cfg;
        cfg.level = ro.level;
        cfg.cap = ro.cap;
        Population pop(model, cfg, derive_seed(back_seed, r, Domain::particles));
        pop.advance_to(t);
        Snapshot s = snapshot(pop);
        std::vector<double> w(s.entries.size());
        double total = 0.0;
        for (std::size_t u = 0; u < w.size(); ++u) {
            w[u] = std::exp(omega * s.entries[u].position - t * tilt.kappa);
            total += w[u];
        }
        Rng pick_rng(derive_seed(back_seed, r, Domain::backward));
        double x = pick_rng.uniform() * total;
        std::size_t u = 0;
        while (u + 1 < w.size() && x >= w[u]) {
            x -= w[u];
            ++u;
        }
        double zu = s.entries[u].position;
        double other = kNegInf;
        for (std::size_t k = 0; k < s.entries.size(); ++k) {
            if (k != u) other = std::max(other, s.entries[k].position - zu);
        }
        return Features{zu, static_cast<double>(s.entries.size()), total, largest(s), other, total};
    });

    const std::uint64_t fwd_seed = derive_seed(seed, {static_cast<std::uint64_t>(Domain::forward)});
    ForwardOptions fo;
    fo.level = ro.level;
    fo.mesh = ro.mesh;
    fo.cap = ro.cap;
    fo.drift_perturbation = opts.drift_perturbation;
    auto fwd = run_replicas(ro.replicas, ro.workers, [&](std::size_t r) {
        SpineOutcome so = forward_decorated(model, omega, t, fo, derive_seed(fwd_seed, {r}));
        Snapshot s = snapshot(so.population);
        double xi = so.xi.terminal();
        double other = kNegInf;
        bool seen_spine = false;
        for (const auto& e : s.entries) {
            if (!seen_spine && e.label == so.spine_label) {
                seen_spine = true;
                continue;
            }
            other = std::max(other, e.position - xi);
        }
        return Features{xi, static_cast<double>(s.entries.size()), additive(s, tilt), largest(s), other, 1.0};
    });

    auto collect = [](const std::vector<Features>& rows, double Features::*field, bool weighted) {
        SampleSet s;
        for (const auto& r : rows) {
            if (weighted) {
                s.add(quantize(r.*field), r.weight);
            } else {
                s.add(quantize(r.*field));
            }
        }
        return s;
    };

    Report rep;
    rep.suite = "spine_law";
    rep.details["omega"] = omega;
    rep.details["t"] = t;
    rep.details["replicas_per_side"] = ro.replicas;
    rep.details["drift_perturbation"] = opts.drift_perturbation;

    auto bp = collect(back, &Features::position, true), fp = collect(fwd, &Features::position, false);
    rep.tests.push_back(ks_result("ks spine position", ks_two_sample(bp, fp), opts.alpha));
    const std::pair<const char*, double Features::*> moments[] = {{"z spine position", &Features::position},
                                                                   {"z particle count", &Features::count},
                                                                   {"z additive martingale", &Features::w},
                                                                   {"z max position", &Features::max}};
    for (const auto& [name, field] : moments) {
        auto mb = mean_se(collect(back, field, true));
        auto mf = mean_se(collect(fwd, field, false));
        rep.tests.push_back(z_result(name, mb, mf, opts.z_threshold));
    }
    auto bo = collect(back, &Features::offset, true), fo_set = collect(fwd, &Features::offset, false);
    rep.tests.push_back(ks_result("ks non-spine max offset", ks_two_sample(bo, fo_set), opts.alpha));
    return rep;
}

}  // namespace growfrag
