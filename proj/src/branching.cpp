#include "growfrag/branching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "growfrag/csv.hpp"
#include "growfrag/errors.hpp"

namespace growfrag {

namespace {

constexpr double kNever = std::numeric_limits<double>::infinity();

double resolve_cut(const DislocationModel& model, double x_cut) {
    double limit = model.default_cutoff();
    if (x_cut <= 0.0) return limit;
    if (x_cut > limit) throw std::invalid_argument("x_cut must not exceed e^{-b_max}");
    return x_cut;
}

}  // namespace

Population::Population(DislocationModel model, PopulationConfig config, std::uint64_t seed, Empty)
    : model_(std::move(model)), config_(std::move(config)), seed_(seed) {
    if (config_.level < 0 || config_.level > model_.ladder().max_index())
        throw std::out_of_range("population level outside the ladder");
    if (model_.binary()) config_.x_cut = resolve_cut(model_, config_.x_cut);
    events_ = explicit_events(model_, config_.x_cut);
}

Population::Population(DislocationModel model, PopulationConfig config, std::uint64_t seed)
    : Population(std::move(model), std::move(config), seed, Empty{}) {
    Particle eve;
    eve.k_counters.assign(static_cast<std::size_t>(config_.level), 0);
    if (config_.barrier) eve.barrier_sup.assign(config_.barrier->strides.size(), 0.0);
    add(std::move(eve), 0.0);
}

void Population::add(Particle p, double now) {
    Clock c{now, kNever, Rng(derive_seed(seed_, {p.label.hash()})), Rng(derive_seed(seed_, {p.label.hash(), 1}))};
    if (events_.rate > 0.0) c.next_event = now + c.rng.exponential(events_.rate);
    std::size_t idx = particles_.size();
    if (c.next_event < kNever) queue_.push({c.next_event, idx});
    particles_.push_back(std::move(p));
    clocks_.push_back(std::move(c));
}

void Population::insert(Particle p) {
    if (p.birth_time > time_) throw std::invalid_argument("inserted particle born in the future");
    p.k_counters.resize(static_cast<std::size_t>(config_.level), 0);
    if (config_.barrier && p.barrier_sup.size() != config_.barrier->strides.size())
        p.barrier_sup.assign(config_.barrier->strides.size(), p.position - time_ * config_.barrier->kappa_prime);
    add(std::move(p), time_);
    if (particles_.size() > config_.cap) throw PopulationCap("population cap exceeded", time_);
}

void Population::monitor(Particle& p, double s, long grid_index) {
    const auto& b = *config_.barrier;
    double v = p.position - s * b.kappa_prime;
    for (std::size_t j = 0; j < b.strides.size(); ++j) {
        if (grid_index < 0 || grid_index % b.strides[j] == 0) p.barrier_sup[j] = std::max(p.barrier_sup[j], v);
    }
}

void Population::move(std::size_t idx, double s) {
    Clock& c = clocks_[idx];
    Particle& p = particles_[idx];
    if (!(s > c.updated)) return;
    const double drift = events_.drift;
    const double sigma = model_.sigma();
    auto step = [&](double to) {
        double dt = to - c.updated;
        p.position += drift * dt;
        if (sigma > 0.0) p.position += sigma * std::sqrt(dt) * c.noise.normal();
        c.updated = to;
    };
    if (config_.barrier && sigma > 0.0) {
        const double h = config_.barrier->mesh;
        auto k = static_cast<long>(std::floor(c.updated / h));
        while (static_cast<double>(k) * h <= c.updated) ++k;
        for (; static_cast<double>(k) * h < s; ++k) {
            step(static_cast<double>(k) * h);
            monitor(p, c.updated, k);
        }
    }
    step(s);
    if (config_.barrier) monitor(p, s, -1);
}

void Population::fire(std::size_t idx, double s) {
    move(idx, s);
    MassPartition dp = sample_explicit_event(model_, events_, clocks_[idx].rng);
    const double thr = model_.ladder().threshold(config_.level);
    const double pre = particles_[idx].position;

    std::vector<Particle> born;
    int current_level = 0;
    int rank = 0;
    for (std::size_t j = 1; j < dp.size() && dp[j] > thr; ++j) {
        int m = level_of(dp[j], model_.ladder());
        Particle& parent = particles_[idx];
        if (m != current_level) {
            current_level = m;
            rank = 0;
            ++parent.k_counters[static_cast<std::size_t>(m - 1)];
        }
        ++rank;
        Particle ch;
        ch.label = child(parent.label, m, parent.k_counters[static_cast<std::size_t>(m - 1)], rank);
        ch.birth_time = s;
        ch.position = pre + std::log(dp[j]);
        ch.k_counters.assign(static_cast<std::size_t>(config_.level), 0);
        ch.barrier_sup = parent.barrier_sup;
        born.push_back(std::move(ch));
    }
    particles_[idx].position = pre + std::log(dp[0]);
    if (!born.empty()) {
        ++particles_[idx].branch_count;
        log_.push_back({s, particles_[idx].label, truncate(dp, model_.ladder().b(config_.level))});
    }

    Clock& c = clocks_[idx];
    c.next_event = s + c.rng.exponential(events_.rate);
    queue_.push({c.next_event, idx});
    for (auto& ch : born) add(std::move(ch), s);
    if (particles_.size() > config_.cap) throw PopulationCap("population cap exceeded", s);
}

void Population::advance_to(double t) {
    if (t < time_) throw std::invalid_argument("cannot advance backwards in time");
    while (!queue_.empty() && queue_.top().first <= t) {
        auto [s, idx] = queue_.top();
        queue_.pop();
        fire(idx, s);
    }
    for (std::size_t i = 0; i < particles_.size(); ++i) move(i, t);
    time_ = t;
}

Population Population::truncate_view(int m) const {
    if (m < 0 || m > config_.level) throw std::out_of_range("view level must not exceed the population level");
    PopulationConfig cfg = config_;
    cfg.level = m;
    Population out(model_, cfg, seed_, Empty{});
    out.time_ = time_;
    const double bm = model_.ladder().b(m);
    // Events left with a single fragment stop counting as branch events.
    std::map<Label, int> vanished;
    for (const auto& e : log_) {
        if (max_level(e.parent) > m) continue;
        MassPartition q = truncate(e.p, bm);
        if (q.size() < 2) {
            ++vanished[e.parent];
            continue;
        }
        out.log_.push_back({e.time, e.parent, q});
    }
    for (std::size_t i = 0; i < particles_.size(); ++i) {
        const Particle& p = particles_[i];
        if (max_level(p.label) > m) continue;
        Particle q = p;
        q.k_counters.resize(static_cast<std::size_t>(m));
        auto it = vanished.find(p.label);
        if (it != vanished.end()) q.branch_count -= it->second;
        std::size_t idx = out.particles_.size();
        out.particles_.push_back(std::move(q));
        out.clocks_.push_back(clocks_[i]);
        if (clocks_[i].next_event < kNever) out.queue_.push({clocks_[i].next_event, idx});
    }
    return out;
}

void advance(Population& pop, double t_target) { pop.advance_to(t_target); }

Population truncate_view(const Population& pop, int m) { return pop.truncate_view(m); }

Snapshot snapshot(const Population& pop) {
    Snapshot s;
    s.time = pop.time();
    s.level = pop.level();
    s.entries.reserve(pop.size());
    for (const auto& p : pop.particles()) s.entries.push_back({p.label, p.k_counters, p.position});
    std::sort(s.entries.begin(), s.entries.end(), [](const SnapshotEntry& a, const SnapshotEntry& b) {
        if (a.position != b.position) return a.position > b.position;
        return a.label < b.label;
    });
    return s;
}

void write_snapshot_csv(std::ostream& os, const Snapshot& s, bool header) {
    csv::Writer w(os);
    if (header) w.row({"time", "label", "position", "level_mask", "k_counters"});
    for (const auto& e : s.entries) {
        std::string k;
        for (std::size_t l = 0; l < e.k_counters.size(); ++l) {
            if (l) k += ';';
            k += std::to_string(l + 1) + ':' + std::to_string(e.k_counters[l]);
        }
        w.field(s.time).field(e.label.str()).field(e.position).field(s.level).field(k).end_row();
    }
}

}  // namespace growfrag
