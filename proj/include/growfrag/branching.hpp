#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <queue>
#include <vector>

#include "growfrag/dislocation.hpp"
#include "growfrag/genealogy.hpp"
#include "growfrag/rng.hpp"

namespace growfrag {

// Running supremum of Z(r) - r kappa'(omega) along each ancestral line.
// Monitor points are event times, advance targets and the grid k * mesh
// (the grid only matters when sigma > 0). Each stride s keeps its own
// supremum over the coarser grid k * s * mesh, so several meshes can be
// compared on the same paths.
struct BarrierSpec {
    double omega;
    double kappa_prime;
    double mesh = 0.01;
    std::vector<int> strides{1};
};

struct Particle {
    Label label;
    double birth_time = 0.0;
    double position = 0.0;
    std::vector<int> k_counters;  // entry l-1 holds K(t, l)
    int branch_count = 0;
    std::vector<double> barrier_sup;  // one per stride, empty when no barrier

    int k(int l) const { return l >= 1 && l <= static_cast<int>(k_counters.size()) ? k_counters[l - 1] : 0; }
    bool barrier_ok(double a, std::size_t stride = 0) const { return barrier_sup.at(stride) < a; }
    double path_max_drift_adjusted() const { return barrier_sup.at(0); }
};

struct BranchEvent {
    double time;
    Label parent;
    MassPartition p;  // truncated at the population's level
};

struct SnapshotEntry {
    Label label;
    std::vector<int> k_counters;
    double position;

    friend bool operator==(const SnapshotEntry&, const SnapshotEntry&) = default;
};

struct Snapshot {
    double time = 0.0;
    int level = 0;
    std::vector<SnapshotEntry> entries;
};

struct PopulationConfig {
    int level = 0;
    double x_cut = 0.0;  // 0 selects e^{-b_max}
    std::size_t cap = 1'000'000;
    std::optional<BarrierSpec> barrier;
};

class Population {
public:
    // Eve alone at the origin at time 0.
    Population(DislocationModel model, PopulationConfig config, std::uint64_t seed);

    struct Empty {};
    // No particles; used to graft copies in the forward spine construction.
    Population(DislocationModel model, PopulationConfig config, std::uint64_t seed, Empty);

    double time() const { return time_; }
    int level() const { return config_.level; }
    const DislocationModel& model() const { return model_; }
    const PopulationConfig& config() const { return config_; }
    const std::vector<Particle>& particles() const { return particles_; }
    const std::vector<BranchEvent>& event_log() const { return log_; }
    const ExplicitEvents& events() const { return events_; }
    std::size_t size() const { return particles_.size(); }

    void advance_to(double t);
    // Adds a particle alive at the current time, driven by its own label-keyed stream.
    void insert(Particle p);

    Population truncate_view(int m) const;

private:
    // Events and Gaussian noise use separate streams, so extra advance
    // targets change positions only through the noise increments.
    struct Clock {
        double updated;
        double next_event;
        Rng rng;
        Rng noise;
    };
    using QueueItem = std::pair<double, std::size_t>;

    void add(Particle p, double now);
    void move(std::size_t idx, double s);
    void fire(std::size_t idx, double s);
    void monitor(Particle& p, double s, long grid_index);

    DislocationModel model_;
    PopulationConfig config_;
    std::uint64_t seed_;
    double time_ = 0.0;
    ExplicitEvents events_;
    std::vector<Particle> particles_;
    std::vector<Clock> clocks_;
    std::priority_queue<QueueItem, std::vector<QueueItem>, std::greater<>> queue_;
    std::vector<BranchEvent> log_;
};

void advance(Population& pop, double t_target);
Population truncate_view(const Population& pop, int m);
// Sorted by decreasing position, then lexicographic label.
Snapshot snapshot(const Population& pop);

// Columns time,label,position,level_mask,k_counters; level_mask is the
// truncation level (the number of K entries), counters are serialized l:c;l:c.
void write_snapshot_csv(std::ostream& os, const Snapshot& s, bool header = true);

}  // namespace growfrag
