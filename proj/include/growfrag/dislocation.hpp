#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "growfrag/levy.hpp"
#include "growfrag/rng.hpp"

namespace growfrag {

// Nonincreasing positive entries with sum <= 1; trailing zeros are dropped.
// Entries are stored 0-based, so entries[0] is p_1.
class MassPartition {
public:
    MassPartition() = default;
    explicit MassPartition(std::vector<double> entries);

    const std::vector<double>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    double operator[](std::size_t i) const { return i < entries_.size() ? entries_[i] : 0.0; }
    double sum() const;

    friend bool operator==(const MassPartition&, const MassPartition&) = default;

private:
    std::vector<double> entries_;
};

class TruncationLadder {
public:
    TruncationLadder() : levels_{0.0} {}
    explicit TruncationLadder(std::vector<double> levels);

    const std::vector<double>& levels() const { return levels_; }
    double b(int n) const { return levels_.at(static_cast<std::size_t>(n)); }
    int max_index() const { return static_cast<int>(levels_.size()) - 1; }
    // e^{-b_n}: entries at or below this are removed by truncation at level n.
    double threshold(int n) const;

private:
    std::vector<double> levels_;
};

// Unique m >= 1 with e^{-b_{m-1}} >= y > e^{-b_m}.
int level_of(double y, const TruncationLadder& ladder);

// k_b: zero every entry after the first that is <= e^{-b}.
MassPartition truncate(const MassPartition& p, double b);

struct FiniteAtomic {
    struct Atom {
        double weight;
        MassPartition p;
    };
    std::vector<Atom> atoms;
};

// Binary conservative splits (p1, 1 - p1) with density c (1 - p1)^(-beta) on [1/2, 1).
struct BinaryConservative {
    double c;
    double beta;
};

using DislocationMeasure = std::variant<FiniteAtomic, BinaryConservative>;

class DislocationModel {
public:
    DislocationModel(double a, double sigma, DislocationMeasure nu, TruncationLadder ladder);

    double a() const { return a_; }
    double sigma() const { return sigma_; }
    const DislocationMeasure& nu() const { return nu_; }
    const TruncationLadder& ladder() const { return ladder_; }

    const FiniteAtomic* atomic() const { return std::get_if<FiniteAtomic>(&nu_); }
    const BinaryConservative* binary() const { return std::get_if<BinaryConservative>(&nu_); }
    bool no_jumps() const { return atomic() && atomic()->atoms.empty(); }

    // dom kappa is (dom_lower, inf); -inf for finite atomic measures.
    double dom_lower() const;
    bool in_interior(double q) const { return q > dom_lower(); }
    // Total dislocation rate is finite.
    bool finite_activity() const;
    // Default resolution for density jumps: e^{-b_max}.
    double default_cutoff() const { return ladder_.threshold(ladder_.max_index()); }

private:
    double a_;
    double sigma_;
    DislocationMeasure nu_;
    TruncationLadder ladder_;
};

// kappa(q), or its truncation at level n. +inf outside the domain.
double cumulant(const DislocationModel& model, double q, std::optional<int> level = std::nullopt);
// kappa'(q); throws DomainError outside the interior of the domain.
double cumulant_derivative(const DislocationModel& model, double q, std::optional<int> level = std::nullopt);
// Root of q kappa'(q) - kappa(q); throws NoCriticalPoint.
double omega_bar(const DislocationModel& model);

double branch_rate(const DislocationModel& model, int n);
MassPartition sample_branch_event(const DislocationModel& model, int n, Rng& rng);

// Mark of a spine jump: size y, followed index i (1-based) and partition p with p_i = y.
struct SpineMark {
    double y;
    int i;
    MassPartition p;
};

// Without a level: a draw from the full kernel (requires finite total rate).
// With level n: a draw from the truncated kernel restricted to events with
// at least two surviving fragments, i.e. immigration events; p is truncated.
SpineMark spine_kernel(const DislocationModel& model, double omega, Rng& rng,
                       std::optional<int> level = std::nullopt);
// g_i(y) for i = 1, 2, ...
std::vector<double> spine_weights(const DislocationModel& model, double omega, double y);
// Total mass of pi; +inf under infinite activity.
double spine_event_rate(const DislocationModel& model, double omega);
// mu_{b_n}: rate of spine events with at least two surviving fragments.
double immigration_rate(const DislocationModel& model, double omega, int n);
double spine_kill_rate(const DislocationModel& model, double omega, int n);

// Psi^{(b_n)}: motion of a single particle between branch events.
LevyExponentParams particle_levy_params(const DislocationModel& model, int n);
// Ess_omega kappa (or its truncation) in Levy-Khintchine form.
LevyExponentParams spine_levy_params(const DislocationModel& model, double omega,
                                     std::optional<int> level = std::nullopt);
// The spine at level n with immigration jumps removed; the centre is adjusted
// so that adding the immigration jumps back gives spine_levy_params(n).
LevyExponentParams spine_motion_params(const DislocationModel& model, double omega, int n);

// Level-independent event stream used by the branching simulator: every
// dislocation with p_2 > x_cut is an explicit event, the rest is folded into
// the drift. Atomic measures ignore x_cut.
struct ExplicitEvents {
    double rate;
    double drift;
    double x_cut;
};
ExplicitEvents explicit_events(const DislocationModel& model, double x_cut);
MassPartition sample_explicit_event(const DislocationModel& model, const ExplicitEvents& ev, Rng& rng);

}  // namespace growfrag
