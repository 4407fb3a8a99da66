#pragma once

#include <optional>
#include <ostream>
#include <vector>

#include "growfrag/branching.hpp"
#include "growfrag/dislocation.hpp"

namespace growfrag {

// kappa and kappa' at omega for one truncation level, computed once.
struct Tilt {
    double omega;
    int level;
    double kappa;
    double kappa_prime;

    static Tilt at(const DislocationModel& model, double omega, int level);
};

// All functionals use the cumulant at the snapshot's truncation level.
double additive(const Snapshot& s, const Tilt& tilt);
double derivative(const Snapshot& s, const Tilt& tilt);
double additive(const Snapshot& s, const DislocationModel& model, double omega);
double derivative(const Snapshot& s, const DislocationModel& model, double omega);

// Requires the population to have been started with a barrier armed at omega.
double stopped_derivative(const Population& pop, const Tilt& tilt, double a, std::size_t stride = 0);
double stopped_derivative(const Population& pop, const DislocationModel& model, double omega, double a,
                          std::size_t stride = 0);

double largest(const Snapshot& s);

struct MartingaleTrace {
    double omega = 0.0;
    std::vector<double> times;
    std::vector<double> W;
    std::vector<double> dW;
    std::optional<double> a;
    std::vector<double> dWa;
    std::vector<double> count;
    std::vector<double> max_pos;
};

struct TraceRequest {
    double omega;
    std::optional<double> barrier_a;  // needs a barrier armed at omega
    std::size_t stride = 0;
};

// Advances pop through `times`, recording one trace per request.
std::vector<MartingaleTrace> record_traces(Population& pop, const std::vector<TraceRequest>& requests,
                                           const std::vector<double>& times);

void write_trace_csv(std::ostream& os, const MartingaleTrace& tr);

}  // namespace growfrag
