#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "growfrag/branching.hpp"
#include "growfrag/dislocation.hpp"
#include "growfrag/levy.hpp"
#include "growfrag/stats.hpp"

namespace growfrag {

struct ImmigrationRecord {
    double time;
    double y;
    int i;
    MassPartition p;              // after truncation
    std::vector<double> offsets;  // log p_j for the surviving j != i
};

struct ForwardOptions {
    int level = 0;
    double barrier_a = 0.0;            // lambda(t) = barrier_a + t kappa'(omega) - xi(t)
    std::vector<double> trace_times;   // lambda is recorded here; defaults to {t}
    double mesh = 0.01;
    // Drive the spine by the untruncated kernel and kill it at the first jump
    // onto a fragment removed by truncation (finite activity only). Runs at
    // different levels then nest pathwise.
    bool coupled_killing = false;
    // Draw an independent Exp(theta_{b_n}) time and report it.
    bool report_kill_time = false;
    double drift_perturbation = 0.0;
    std::size_t cap = 1'000'000;
};

struct SpineOutcome {
    Population population;
    Label spine_label;
    bool spine_alive = true;
    LevyPath xi;
    std::vector<double> trace_times;
    std::vector<double> lambda;
    std::vector<ImmigrationRecord> immigration;
    std::optional<double> kill_time;
    double kappa_prime = 0.0;
};

SpineOutcome forward_decorated(const DislocationModel& model, double omega, double t, const ForwardOptions& opts,
                               std::uint64_t seed);

// Spine trace, immigration log and terminal snapshot as three CSV sections
// separated by a blank line.
void write_spine_csv(std::ostream& os, const SpineOutcome& out);

struct ReplicaOptions {
    int level = 0;
    std::size_t replicas = 10000;
    unsigned workers = 1;
    std::size_t cap = 1'000'000;
    double mesh = 0.01;
};

// G(snapshot, index of the picked particle in snapshot.entries)
using SpineFunctional = std::function<double(const Snapshot&, std::size_t)>;

struct TiltedEstimate {
    double value;
    double std_error;
    std::size_t n;
    double omega;
    double t;
};

struct TiltedEstimates {
    TiltedEstimate full_sum;        // e^{-t kappa} sum_u G(u) e^{omega Z_u}
    TiltedEstimate size_biased_pick;  // W * G(U) with U picked proportional to e^{omega Z_u}
};

TiltedEstimates backward_tilted_estimate(const DislocationModel& model, double omega, double t,
                                         const SpineFunctional& g, const ReplicaOptions& opts, std::uint64_t seed);

// Test functions accepted by the many-to-one check.
struct TestFunction {
    enum class Kind { exponential, indicator_above, indicator_below, poly_exponential };
    Kind kind = Kind::exponential;
    double q = 0.0;          // exponent for exponential kinds
    double threshold = 0.0;  // half-line boundary for indicators
    int degree = 0;          // power of x for poly_exponential

    double operator()(double x) const;
    std::string name() const;
    bool closed_form() const { return kind == Kind::exponential; }

    static TestFunction exponential(double q) { return {Kind::exponential, q, 0.0, 0}; }
    static TestFunction above(double c) { return {Kind::indicator_above, 0.0, c, 0}; }
    static TestFunction below(double c) { return {Kind::indicator_below, 0.0, c, 0}; }
    static TestFunction poly_exp(int degree, double q) { return {Kind::poly_exponential, q, 0.0, degree}; }
};

Report many_to_one_check(const DislocationModel& model, double omega, const TestFunction& f, double t,
                         const ReplicaOptions& opts, std::uint64_t seed);

struct SpineLawOptions {
    ReplicaOptions replicas;
    double drift_perturbation = 0.0;
    double alpha = 0.01;
    double z_threshold = 3.0;
};

// Six comparisons of the backward (tilted, size-biased pick) and forward
// (decorated spine) constructions at the same truncation level.
Report spine_law_check(const DislocationModel& model, double omega, double t, const SpineLawOptions& opts,
                       std::uint64_t seed);

}  // namespace growfrag
