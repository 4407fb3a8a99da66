#include "growfrag/martingales.hpp"

#include <algorithm>
#include <cmath>

#include "growfrag/csv.hpp"
#include "growfrag/errors.hpp"

namespace growfrag {

Tilt Tilt::at(const DislocationModel& model, double omega, int level) {
    if (std::isinf(cumulant(model, omega))) throw DomainError("omega outside dom kappa");
    if (!model.in_interior(omega)) throw DomainError("omega outside the interior of dom kappa");
    return {omega, level, cumulant(model, omega, level), cumulant_derivative(model, omega, level)};
}

double additive(const Snapshot& s, const Tilt& tilt) {
    double w = 0.0;
    for (const auto& e : s.entries) w += std::exp(tilt.omega * e.position - s.time * tilt.kappa);
    return w;
}

double derivative(const Snapshot& s, const Tilt& tilt) {
    double d = 0.0;
    for (const auto& e : s.entries) {
        d += (e.position - s.time * tilt.kappa_prime) * std::exp(tilt.omega * e.position - s.time * tilt.kappa);
    }
    return d;
}

double additive(const Snapshot& s, const DislocationModel& model, double omega) {
    return additive(s, Tilt::at(model, omega, s.level));
}

double derivative(const Snapshot& s, const DislocationModel& model, double omega) {
    return derivative(s, Tilt::at(model, omega, s.level));
}

double stopped_derivative(const Population& pop, const Tilt& tilt, double a, std::size_t stride) {
    const auto& b = pop.config().barrier;
    if (!b || b->omega != tilt.omega || stride >= b->strides.size())
        throw BarrierNotArmed("no barrier bookkeeping for this omega");
    const double t = pop.time();
    double d = 0.0;
    for (const auto& p : pop.particles()) {
        if (!p.barrier_ok(a, stride)) continue;
        d += (a + t * b->kappa_prime - p.position) * std::exp(tilt.omega * p.position - t * tilt.kappa);
    }
    return d;
}

double stopped_derivative(const Population& pop, const DislocationModel& model, double omega, double a,
                          std::size_t stride) {
    return stopped_derivative(pop, Tilt::at(model, omega, pop.level()), a, stride);
}

double largest(const Snapshot& s) {
    if (s.entries.empty()) throw Empty("largest of an empty snapshot");
    double m = s.entries.front().position;
    for (const auto& e : s.entries) m = std::max(m, e.position);
    return m;
}

std::vector<MartingaleTrace> record_traces(Population& pop, const std::vector<TraceRequest>& requests,
                                           const std::vector<double>& times) {
    std::vector<Tilt> tilts;
    std::vector<MartingaleTrace> out(requests.size());
    for (std::size_t r = 0; r < requests.size(); ++r) {
        tilts.push_back(Tilt::at(pop.model(), requests[r].omega, pop.level()));
        out[r].omega = requests[r].omega;
        out[r].a = requests[r].barrier_a;
    }
    for (double t : times) {
        pop.advance_to(t);
        Snapshot s = snapshot(pop);
        for (std::size_t r = 0; r < requests.size(); ++r) {
            auto& tr = out[r];
            tr.times.push_back(t);
            tr.W.push_back(additive(s, tilts[r]));
            tr.dW.push_back(derivative(s, tilts[r]));
            if (requests[r].barrier_a) tr.dWa.push_back(stopped_derivative(pop, tilts[r], *requests[r].barrier_a, requests[r].stride));
            tr.count.push_back(static_cast<double>(s.entries.size()));
            tr.max_pos.push_back(largest(s));
        }
    }
    return out;
}

void write_trace_csv(std::ostream& os, const MartingaleTrace& tr) {
    csv::Writer w(os);
    w.row({"time", "W", "dW", "dWa", "count", "max_pos"});
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
        w.field(tr.times[k]).field(tr.W[k]).field(tr.dW[k]);
        if (tr.dWa.empty()) {
            w.field(std::string());
        } else {
            w.field(tr.dWa[k]);
        }
        w.field(tr.count[k]).field(tr.max_pos[k]).end_row();
    }
}

}  // namespace growfrag
