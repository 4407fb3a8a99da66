#include "growfrag/levy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "growfrag/errors.hpp"
#include "growfrag/numerics.hpp"

namespace growfrag {

namespace {

const double kEm1 = std::exp(-1.0);

using num::Series;

double clamp_lo(double a, double b) { return std::max(a, b); }

// Contribution of one piece to the exponent.
double piece_exponent(const DensityPiece& d, double q) {
    if (q == 0.0) return 0.0;
    if (d.beta == 0.0) {
        double a = num::power_int(d.s + q, d.lo, d.hi);
        double b = num::power_int(d.s, d.lo, d.hi);
        double c = num::power_log_int(d.s, clamp_lo(d.lo, kEm1), d.hi);
        if (std::isinf(a) || std::isinf(b)) return num::kInf;
        return d.coeff * (a - b - q * c);
    }
    // x = 1 - y; the indicator {y > 1/e} is always on here.
    Series h = num::add(num::add(num::binom_series(d.s + q), num::binom_series(d.s), -1.0),
                        num::mul(num::binom_series(d.s), num::log1m_series()), -q);
    auto f = [&](double x) {
        double l = std::log1p(-x);
        return std::pow(1.0 - x, d.s) * num::em1l(q * l);
    };
    return d.coeff * num::integrate_singular(d.beta, h, 2, f, 1.0 - d.hi, 1.0 - d.lo);
}

// int_{y > 1/e} log y (y^omega - 1) over the piece.
double piece_center_shift(const DensityPiece& d, double omega) {
    if (d.beta == 0.0) {
        double lo = clamp_lo(d.lo, kEm1);
        if (!(d.hi > lo)) return 0.0;
        return d.coeff * (num::power_log_int(d.s + omega, lo, d.hi) - num::power_log_int(d.s, lo, d.hi));
    }
    Series h = num::mul(num::log1m_series(),
                        num::mul(num::binom_series(d.s),
                                 num::add(num::binom_series(omega), num::monomial(0, 1.0), -1.0)));
    auto f = [&](double x) {
        double l = std::log1p(-x);
        return std::pow(1.0 - x, d.s) * l * std::expm1(omega * l);
    };
    return d.coeff * num::integrate_singular(d.beta, h, 2, f, 1.0 - d.hi, 1.0 - d.lo);
}

}  // namespace

namespace levy_detail {

double piece_mass(const DensityPiece& d, double a, double b) {
    a = std::max(a, d.lo);
    b = std::min(b, d.hi);
    if (!(b > a)) return 0.0;
    if (d.beta == 0.0) return d.coeff * num::power_int(d.s, a, b);
    auto f = [&](double x) { return std::pow(1.0 - x, d.s); };
    double m = num::integrate_singular(d.beta, num::binom_series(d.s), 0, f, 1.0 - b, 1.0 - a);
    return d.coeff * m;
}

double piece_log_moment(const DensityPiece& d, double a, double b) {
    a = std::max(a, d.lo);
    b = std::min(b, d.hi);
    if (!(b > a)) return 0.0;
    if (d.beta == 0.0) return d.coeff * num::power_log_int(d.s, a, b);
    Series h = num::mul(num::binom_series(d.s), num::log1m_series());
    auto f = [&](double x) { return std::pow(1.0 - x, d.s) * std::log1p(-x); };
    return d.coeff * num::integrate_singular(d.beta, h, 1, f, 1.0 - b, 1.0 - a);
}

double sample_power(double t, double lo, double hi, double u) {
    double e = t + 1.0;
    if (lo <= 0.0) return hi * std::pow(u, 1.0 / e);
    if (std::abs(e) < 1e-12) return lo * std::pow(hi / lo, u);
    double a = std::pow(lo, e), b = std::pow(hi, e);
    double y = std::pow(a + u * (b - a), 1.0 / e);
    return std::clamp(y, lo, hi);
}

double piece_sample(const DensityPiece& d, double a, double b, Rng& rng) {
    a = std::max(a, d.lo);
    b = std::min(b, d.hi);
    if (d.beta == 0.0) return sample_power(d.s, a, b, rng.uniform());
    double xa = 1.0 - b, xb = 1.0 - a;
    // (1-x)^s is monotone, so its maximum sits at an endpoint.
    double bound = std::max(std::pow(1.0 - xa, d.s), std::pow(1.0 - xb, d.s));
    for (;;) {
        double x = sample_power(-d.beta, xa, xb, rng.uniform());
        if (rng.uniform() * bound <= std::pow(1.0 - x, d.s)) return 1.0 - x;
    }
}

}  // namespace levy_detail

void LevyExponentParams::validate() const {
    if (!(gaussian >= 0.0)) throw std::invalid_argument("gaussian coefficient must be >= 0");
    if (!(cutoff >= 0.0)) throw std::invalid_argument("cutoff must be >= 0");
    for (const auto& j : atoms) {
        if (!(j.rate > 0.0)) throw std::invalid_argument("atomic jump rates must be > 0");
        if (!(j.size < 0.0)) throw std::invalid_argument("atomic jump sizes must be < 0");
    }
    for (const auto& d : pieces) {
        if (!(d.coeff > 0.0) || !(d.lo >= 0.0) || !(d.hi > d.lo) || !(d.hi <= 1.0))
            throw std::invalid_argument("malformed density piece");
        if (d.beta != 0.0 && d.lo < kPieceFloor) throw std::invalid_argument("singular piece must stay near y = 1");
        if (d.beta >= 3.0 && d.hi == 1.0) throw std::invalid_argument("jump density fails (x^2 ^ 1)-integrability");
        if (d.lo == 0.0 && d.s <= -1.0) throw std::invalid_argument("jump density has infinite mass of large jumps");
    }
}

double LevyPath::value_at(double t) const {
    auto it = std::upper_bound(times.begin(), times.end(), t);
    if (it == times.begin()) throw std::out_of_range("time before path start");
    return values[static_cast<std::size_t>(it - times.begin()) - 1];
}

double LevyPath::left_value_at(double t) const {
    auto it = std::lower_bound(times.begin(), times.end(), t);
    if (it != times.end() && *it == t) return left_values[static_cast<std::size_t>(it - times.begin())];
    return value_at(t);
}

double laplace_exponent(const LevyExponentParams& p, double q) {
    double psi = 0.5 * p.gaussian * p.gaussian * q * q + p.center * q;
    for (const auto& j : p.atoms) {
        double comp = j.size > -1.0 ? q * j.size : 0.0;
        psi += j.rate * (j.size > -1.0 ? num::em1l(q * j.size) : std::expm1(q * j.size) - comp);
    }
    for (const auto& d : p.pieces) psi += piece_exponent(d, q);
    return psi;
}

double explicit_jump_rate(const LevyExponentParams& p) {
    double r = 0.0;
    for (const auto& j : p.atoms) r += j.rate;
    double ymax = std::exp(-p.cutoff);
    for (const auto& d : p.pieces) {
        if (ymax >= 1.0 && d.hi >= 1.0 && d.beta >= 1.0)
            throw InfiniteActivity("density jumps need a positive cutoff");
        r += levy_detail::piece_mass(d, d.lo, ymax);
    }
    return r;
}

double simulation_drift(const LevyExponentParams& p) {
    double d = p.center;
    for (const auto& j : p.atoms) {
        if (j.size > -1.0) d -= j.rate * j.size;
    }
    double ycut = std::exp(-p.cutoff);
    for (const auto& piece : p.pieces) {
        if (ycut > kEm1) {
            d -= levy_detail::piece_log_moment(piece, kEm1, ycut);
        } else {
            d += levy_detail::piece_log_moment(piece, ycut, kEm1);
        }
    }
    return d;
}

LevyExponentParams esscher(const LevyExponentParams& p, double omega) {
    LevyExponentParams out = p;
    out.center = p.center + p.gaussian * p.gaussian * omega;
    for (auto& j : out.atoms) {
        if (j.size > -1.0) out.center += j.rate * j.size * std::expm1(omega * j.size);
        j.rate *= std::exp(omega * j.size);
    }
    for (auto& d : out.pieces) {
        if (d.lo == 0.0 && d.s + omega <= -1.0) throw MomentError("exponential moment of the jump measure diverges");
        out.center += piece_center_shift(d, omega);
        d.s += omega;
    }
    return out;
}

LevyPath simulate_path(const LevyExponentParams& p, double horizon, double mesh, Rng& rng,
                       const std::vector<double>& extra_times) {
    if (!(horizon > 0.0) || !(mesh > 0.0)) throw std::invalid_argument("horizon and mesh must be positive");
    p.validate();
    double drift = simulation_drift(p);
    double ycut = std::exp(-p.cutoff);

    std::vector<double> rates;
    for (const auto& j : p.atoms) rates.push_back(j.rate);
    for (const auto& d : p.pieces) rates.push_back(levy_detail::piece_mass(d, d.lo, ycut));
    double total = 0.0;
    for (double r : rates) total += r;
    if (std::isinf(total)) throw InfiniteActivity("density jumps need a positive cutoff");

    std::vector<JumpRecord> jumps;
    if (total > 0.0) {
        double s = rng.exponential(total);
        while (s <= horizon) {
            double u = rng.uniform() * total;
            std::size_t k = 0;
            while (k + 1 < rates.size() && u >= rates[k]) {
                u -= rates[k];
                ++k;
            }
            double size;
            if (k < p.atoms.size()) {
                size = p.atoms[k].size;
            } else {
                size = std::log(levy_detail::piece_sample(p.pieces[k - p.atoms.size()], 0.0, ycut, rng));
            }
            jumps.push_back({s, size});
            s += rng.exponential(total);
        }
    }

    std::vector<double> times;
    auto steps = static_cast<long>(std::floor(horizon / mesh + 1e-9));
    for (long k = 0; k <= steps; ++k) {
        double t = static_cast<double>(k) * mesh;
        if (t <= horizon) times.push_back(t);
    }
    times.push_back(horizon);
    for (const auto& j : jumps) times.push_back(j.time);
    for (double t : extra_times) {
        if (t >= 0.0 && t <= horizon) times.push_back(t);
    }
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());

    LevyPath path;
    path.times = times;
    path.values.resize(times.size());
    path.left_values.resize(times.size());
    path.values[0] = path.left_values[0] = 0.0;
    std::size_t next_jump = 0;
    double x = 0.0;
    for (std::size_t k = 1; k < times.size(); ++k) {
        double dt = times[k] - times[k - 1];
        x += drift * dt;
        if (p.gaussian > 0.0) x += p.gaussian * std::sqrt(dt) * rng.normal();
        path.left_values[k] = x;
        while (next_jump < jumps.size() && jumps[next_jump].time == times[k]) {
            x += jumps[next_jump].size;
            ++next_jump;
        }
        path.values[k] = x;
    }
    path.jumps = std::move(jumps);
    return path;
}

}  // namespace growfrag
