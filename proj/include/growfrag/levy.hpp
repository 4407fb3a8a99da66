#pragma once

#include <vector>

#include "growfrag/rng.hpp"

namespace growfrag {

// Jump of size `size` < 0 arriving at rate `rate`.
struct AtomicJump {
    double rate;
    double size;
};

// Jump measure given in the multiplicative variable y = e^x: the image under
// log of coeff * y^s * (1-y)^(-beta) dy on (lo, hi], 0 <= lo < hi <= 1.
// Pieces with beta != 0 must stay away from y = 0 (lo >= kPieceFloor).
struct DensityPiece {
    double coeff;
    double s;
    double beta;
    double lo;
    double hi;
};

inline constexpr double kPieceFloor = 0.3;

// Spectrally negative Levy exponent in Levy-Khintchine form. Atomic jumps
// and density pieces may be mixed. Density jumps with |x| < cutoff are not
// simulated individually but replaced by their compensating drift.
struct LevyExponentParams {
    double center = 0.0;
    double gaussian = 0.0;
    std::vector<AtomicJump> atoms;
    std::vector<DensityPiece> pieces;
    double cutoff = 0.0;

    void validate() const;
    bool has_jumps() const { return !atoms.empty() || !pieces.empty(); }
};

struct JumpRecord {
    double time;
    double size;
};

struct LevyPath {
    std::vector<double> times;
    std::vector<double> values;       // right limits xi(t_k)
    std::vector<double> left_values;  // left limits xi(t_k-)
    std::vector<JumpRecord> jumps;

    double terminal() const { return values.back(); }
    // Value at a skeleton time (the last skeleton point at or before t).
    double value_at(double t) const;
    double left_value_at(double t) const;
};

double laplace_exponent(const LevyExponentParams& p, double q);

// Mean rate of jumps below -cutoff (atoms always count).
double explicit_jump_rate(const LevyExponentParams& p);

// Drift used between explicit jumps.
double simulation_drift(const LevyExponentParams& p);

LevyExponentParams esscher(const LevyExponentParams& p, double omega);

LevyPath simulate_path(const LevyExponentParams& p, double horizon, double mesh, Rng& rng,
                       const std::vector<double>& extra_times = {});

namespace levy_detail {
// Integrals over the part (a, b] of a piece's y-range.
double piece_mass(const DensityPiece& d, double a, double b);
double piece_log_moment(const DensityPiece& d, double a, double b);
// Draw y from the piece restricted to (a, b].
double piece_sample(const DensityPiece& d, double a, double b, Rng& rng);
// Draw from density proportional to z^t on (lo, hi].
double sample_power(double t, double lo, double hi, double u);
}  // namespace levy_detail

}  // namespace growfrag
