#include "growfrag/dislocation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "growfrag/errors.hpp"
#include "growfrag/numerics.hpp"

namespace growfrag {

namespace {

const double kEm1 = std::exp(-1.0);
constexpr double kSumTolerance = 1e-12;

using num::Series;

double lk_log(double y) { return y > kEm1 ? std::log(y) : 0.0; }

// Threshold below which entries p_i (i >= 2) are dropped; 0 keeps everything.
double level_threshold(const DislocationModel& m, std::optional<int> level) {
    if (!level) return 0.0;
    if (*level < 0 || *level > m.ladder().max_index()) throw std::out_of_range("truncation level outside ladder");
    return m.ladder().threshold(*level);
}

// int_0^xhi x^-beta [x + (1-x)^omega log(1-x)] dx
double centre_correction(double beta, double omega, double xhi) {
    Series h = num::add(num::monomial(1, 1.0), num::mul(num::binom_series(omega), num::log1m_series()));
    auto f = [omega](double x) { return x + std::pow(1.0 - x, omega) * std::log1p(-x); };
    return num::integrate_singular(beta, h, 2, f, 0.0, xhi);
}

// Weighted table of (rate, atom, index) for spine marks of a finite atomic measure.
struct MarkEntry {
    double rate;
    std::size_t atom;
    std::size_t index;  // 0-based
};

std::vector<MarkEntry> atomic_marks(const FiniteAtomic& nu, double omega, double thr, bool immigration_only) {
    std::vector<MarkEntry> out;
    for (std::size_t a = 0; a < nu.atoms.size(); ++a) {
        const auto& atom = nu.atoms[a];
        if (immigration_only && !(atom.p[1] > thr)) continue;
        for (std::size_t i = 0; i < atom.p.size(); ++i) {
            if (i > 0 && !(atom.p[i] > thr)) continue;
            out.push_back({atom.weight * std::pow(atom.p[i], omega), a, i});
        }
    }
    return out;
}

template <class Table>
std::size_t pick(const Table& rates, double total, Rng& rng) {
    double u = rng.uniform() * total;
    std::size_t k = 0;
    while (k + 1 < rates.size() && u >= rates[k].rate) {
        u -= rates[k].rate;
        ++k;
    }
    return k;
}

MassPartition binary_partition(double x) { return MassPartition({1.0 - x, x}); }

}  // namespace

MassPartition::MassPartition(std::vector<double> entries) : entries_(std::move(entries)) {
    while (!entries_.empty() && entries_.back() == 0.0) entries_.pop_back();
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (!(entries_[i] >= 0.0 && entries_[i] <= 1.0)) throw std::invalid_argument("partition entries must lie in [0,1]");
        if (i > 0 && entries_[i] > entries_[i - 1]) throw std::invalid_argument("partition entries must be nonincreasing");
    }
    if (sum() > 1.0 + kSumTolerance) throw std::invalid_argument("partition entries sum above 1");
}

double MassPartition::sum() const { return std::accumulate(entries_.begin(), entries_.end(), 0.0); }

TruncationLadder::TruncationLadder(std::vector<double> levels) : levels_(std::move(levels)) {
    if (levels_.empty() || levels_[0] != 0.0) throw std::invalid_argument("ladder must start at b_0 = 0");
    for (std::size_t i = 1; i < levels_.size(); ++i) {
        if (!(levels_[i] > levels_[i - 1])) throw std::invalid_argument("ladder must be strictly increasing");
    }
}

double TruncationLadder::threshold(int n) const { return std::exp(-b(n)); }

int level_of(double y, const TruncationLadder& ladder) {
    if (!(y > 0.0 && y <= 1.0)) throw std::invalid_argument("level_of needs 0 < y <= 1");
    for (int m = 1; m <= ladder.max_index(); ++m) {
        if (y > ladder.threshold(m)) return m;
    }
    throw LadderExhausted("y = " + std::to_string(y) + " lies below the last ladder level");
}

MassPartition truncate(const MassPartition& p, double b) {
    double thr = std::exp(-b);
    std::vector<double> e;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (i == 0 || p[i] > thr) e.push_back(p[i]);
        else break;
    }
    return MassPartition(std::move(e));
}

DislocationModel::DislocationModel(double a, double sigma, DislocationMeasure nu, TruncationLadder ladder)
    : a_(a), sigma_(sigma), nu_(std::move(nu)), ladder_(std::move(ladder)) {
    if (!std::isfinite(a_)) throw InvalidModel("drift must be finite");
    if (!(sigma_ >= 0.0) || !std::isfinite(sigma_)) throw InvalidModel("sigma must be >= 0");
    if (const auto* fa = atomic()) {
        for (const auto& atom : fa->atoms) {
            if (!(atom.weight > 0.0) || !std::isfinite(atom.weight)) throw InvalidModel("atom weights must be positive");
            if (atom.p.size() == 0) throw InvalidModel("the zero partition cannot carry mass");
            if (atom.p.size() == 1 && !(atom.p[0] < 1.0)) throw InvalidModel("single-entry atoms need p_1 < 1");
        }
    } else {
        const auto& bc = *binary();
        if (!(bc.c > 0.0)) throw InvalidModel("binary density needs c > 0");
        // int (1-p1)^2 nu(dp) = c int_0^{1/2} x^{2-beta} dx
        if (!(bc.beta < 3.0)) throw InvalidModel("binary density violates the moment condition (beta < 3)");
    }
}

double DislocationModel::dom_lower() const {
    if (const auto* bc = binary()) return bc->beta - 1.0;
    return -num::kInf;
}

bool DislocationModel::finite_activity() const {
    if (const auto* bc = binary()) return bc->beta < 1.0;
    return true;
}

double cumulant(const DislocationModel& model, double q, std::optional<int> level) {
    double thr = level_threshold(model, level);
    double k = 0.5 * model.sigma() * model.sigma() * q * q + model.a() * q;
    if (const auto* fa = model.atomic()) {
        for (const auto& atom : fa->atoms) {
            double s = num::fragment_term(atom.p[0], q);
            for (std::size_t i = 1; i < atom.p.size(); ++i) {
                if (atom.p[i] > thr) s += std::pow(atom.p[i], q);
            }
            k += atom.weight * s;
        }
        return k;
    }
    const auto& bc = *model.binary();
    Series h = num::binom_series(q);
    auto f = [q](double x) { return num::fragment_term(1.0 - x, q); };
    k += bc.c * num::integrate_singular(bc.beta, h, 2, f, 0.0, 0.5);
    double second = num::power_int(q - bc.beta, thr, 0.5);
    if (std::isinf(second)) return num::kInf;
    return k + bc.c * second;
}

double cumulant_derivative(const DislocationModel& model, double q, std::optional<int> level) {
    if (!level && !model.in_interior(q)) throw DomainError("q outside the interior of dom kappa");
    double thr = level_threshold(model, level);
    double d = model.sigma() * model.sigma() * q + model.a();
    if (const auto* fa = model.atomic()) {
        for (const auto& atom : fa->atoms) {
            double p1 = atom.p[0];
            double s = std::pow(p1, q) * std::log(p1) + (1.0 - p1);
            for (std::size_t i = 1; i < atom.p.size(); ++i) {
                if (atom.p[i] > thr) s += std::pow(atom.p[i], q) * std::log(atom.p[i]);
            }
            d += atom.weight * s;
        }
        return d;
    }
    const auto& bc = *model.binary();
    Series h = num::add(num::mul(num::binom_series(q), num::log1m_series()), num::monomial(1, 1.0));
    auto f = [q](double x) { return std::pow(1.0 - x, q) * std::log1p(-x) + x; };
    d += bc.c * num::integrate_singular(bc.beta, h, 2, f, 0.0, 0.5);
    d += bc.c * num::power_log_int(q - bc.beta, thr, 0.5);
    return d;
}

double omega_bar(const DislocationModel& model) {
    auto g = [&](double q) { return q * cumulant_derivative(model, q) - cumulant(model, q); };
    double floor = std::max(0.0, model.dom_lower()) + 1e-6;
    double start = model.in_interior(1.0) ? 1.0 : model.dom_lower() + 1.0;
    double g0 = g(start);
    double lo, hi;
    if (g0 < 0.0) {
        lo = start;
        hi = start;
        for (;;) {
            hi = 2.0 * hi;
            if (hi > 1e4) throw NoCriticalPoint("q kappa'(q) - kappa(q) stays negative");
            if (g(hi) > 0.0) break;
            lo = hi;
        }
    } else if (g0 > 0.0) {
        hi = start;
        lo = start;
        for (;;) {
            lo = floor + 0.5 * (lo - floor);
            if (g(lo) < 0.0) break;
            hi = lo;
            if (lo - floor < 1e-9) throw NoCriticalPoint("q kappa'(q) - kappa(q) has no positive root");
        }
    } else {
        return start;
    }
    return num::bisect(g, lo, hi, 1e-12);
}

double branch_rate(const DislocationModel& model, int n) {
    double thr = level_threshold(model, n);
    if (const auto* fa = model.atomic()) {
        double r = 0.0;
        for (const auto& atom : fa->atoms) {
            if (atom.p[1] > thr) r += atom.weight;
        }
        return r;
    }
    const auto& bc = *model.binary();
    if (!(thr < 0.5)) return 0.0;
    return bc.c * num::power_int(-bc.beta, thr, 0.5);
}

MassPartition sample_branch_event(const DislocationModel& model, int n, Rng& rng) {
    double rate = branch_rate(model, n);
    if (!(rate > 0.0)) throw ZeroRate("no branch events at this truncation level");
    double thr = model.ladder().threshold(n);
    if (const auto* fa = model.atomic()) {
        double u = rng.uniform() * rate;
        const FiniteAtomic::Atom* chosen = nullptr;
        for (const auto& atom : fa->atoms) {
            if (!(atom.p[1] > thr)) continue;
            chosen = &atom;
            if (u < atom.weight) break;
            u -= atom.weight;
        }
        return truncate(chosen->p, model.ladder().b(n));
    }
    const auto& bc = *model.binary();
    return binary_partition(levy_detail::sample_power(-bc.beta, thr, 0.5, rng.uniform()));
}

std::vector<double> spine_weights(const DislocationModel& model, double omega, double y) {
    if (const auto* bc = model.binary()) {
        (void)bc;
        if (y > 0.5) return {1.0, 0.0};
        if (y < 0.5) return {0.0, 1.0};
        return {0.5, 0.5};
    }
    const auto& fa = *model.atomic();
    std::size_t width = 0;
    for (const auto& atom : fa.atoms) width = std::max(width, atom.p.size());
    std::vector<double> g(width, 0.0);
    double total = 0.0;
    for (const auto& atom : fa.atoms) {
        for (std::size_t i = 0; i < atom.p.size(); ++i) {
            if (atom.p[i] == y) {
                double w = atom.weight * std::pow(y, omega);
                g[i] += w;
                total += w;
            }
        }
    }
    if (total > 0.0) {
        for (double& v : g) v /= total;
    }
    return g;
}

double spine_event_rate(const DislocationModel& model, double omega) {
    if (const auto* fa = model.atomic()) {
        double r = 0.0;
        for (const auto& e : atomic_marks(*fa, omega, 0.0, false)) r += e.rate;
        return r;
    }
    const auto& bc = *model.binary();
    double upper = levy_detail::piece_mass({bc.c, omega, bc.beta, 0.5, 1.0}, 0.5, 1.0);
    double lower = bc.c * num::power_int(omega - bc.beta, 0.0, 0.5);
    return upper + lower;
}

double immigration_rate(const DislocationModel& model, double omega, int n) {
    double thr = level_threshold(model, n);
    if (const auto* fa = model.atomic()) {
        double r = 0.0;
        for (const auto& e : atomic_marks(*fa, omega, thr, true)) r += e.rate;
        return r;
    }
    const auto& bc = *model.binary();
    if (!(thr < 0.5)) return 0.0;
    double upper = levy_detail::piece_mass({bc.c, omega, bc.beta, 0.5, 1.0}, 0.5, 1.0 - thr);
    double lower = bc.c * num::power_int(omega - bc.beta, thr, 0.5);
    return upper + lower;
}

SpineMark spine_kernel(const DislocationModel& model, double omega, Rng& rng, std::optional<int> level) {
    double thr = level_threshold(model, level);
    if (const auto* fa = model.atomic()) {
        auto table = atomic_marks(*fa, omega, thr, level.has_value());
        double total = 0.0;
        for (const auto& e : table) total += e.rate;
        if (!(total > 0.0)) throw ZeroRate("spine kernel has no mass");
        const auto& e = table[pick(table, total, rng)];
        MassPartition p = level ? truncate(fa->atoms[e.atom].p, model.ladder().b(*level)) : fa->atoms[e.atom].p;
        return {p[e.index], static_cast<int>(e.index) + 1, p};
    }
    const auto& bc = *model.binary();
    DensityPiece upper{bc.c, omega, bc.beta, 0.5, 1.0};
    double yhi = level ? 1.0 - thr : 1.0;
    double ylo = level ? thr : 0.0;
    if (level && !(thr < 0.5)) throw ZeroRate("no immigration events at this truncation level");
    double m_upper = levy_detail::piece_mass(upper, 0.5, yhi);
    double m_lower = bc.c * num::power_int(omega - bc.beta, ylo, 0.5);
    if (std::isinf(m_upper) || std::isinf(m_lower))
        throw InfiniteActivity("spine jump rate diverges; supply a truncation level");
    if (rng.uniform() * (m_upper + m_lower) < m_upper) {
        double y = levy_detail::piece_sample(upper, 0.5, yhi, rng);
        return {y, 1, binary_partition(1.0 - y)};
    }
    double y = levy_detail::sample_power(omega - bc.beta, ylo, 0.5, rng.uniform());
    return {y, 2, binary_partition(y)};
}

double spine_kill_rate(const DislocationModel& model, double omega, int n) {
    double thr = level_threshold(model, n);
    if (const auto* fa = model.atomic()) {
        double r = 0.0;
        for (const auto& atom : fa->atoms) {
            for (std::size_t i = 1; i < atom.p.size(); ++i) {
                if (atom.p[i] <= thr) r += atom.weight * std::pow(atom.p[i], omega);
            }
        }
        return r;
    }
    const auto& bc = *model.binary();
    double r = bc.c * num::power_int(omega - bc.beta, 0.0, std::min(thr, 0.5));
    if (std::isinf(r)) throw Diverges("kill rate integral diverges for this omega");
    return r;
}

LevyExponentParams particle_levy_params(const DislocationModel& model, int n) {
    double thr = level_threshold(model, n);
    LevyExponentParams p;
    p.gaussian = model.sigma();
    p.center = model.a();
    p.cutoff = model.default_cutoff();
    if (const auto* fa = model.atomic()) {
        p.cutoff = 0.0;
        for (const auto& atom : fa->atoms) {
            double p1 = atom.p[0];
            p.center += atom.weight * (1.0 - p1);
            if (!(atom.p[1] > thr)) {
                p.center += atom.weight * lk_log(p1);
                p.atoms.push_back({atom.weight, std::log(p1)});
            }
        }
        return p;
    }
    const auto& bc = *model.binary();
    double xt = std::min(thr, 0.5);
    p.center += bc.c * num::power_int(1.0 - bc.beta, xt, 0.5);
    Series h = num::add(num::monomial(1, 1.0), num::log1m_series());
    p.center += bc.c * num::integrate_singular(bc.beta, h, 2, [](double x) { return x + std::log1p(-x); }, 0.0, xt);
    p.pieces.push_back({bc.c, 0.0, bc.beta, 1.0 - xt, 1.0});
    return p;
}

LevyExponentParams spine_levy_params(const DislocationModel& model, double omega, std::optional<int> level) {
    double thr = level_threshold(model, level);
    LevyExponentParams p;
    p.gaussian = model.sigma();
    p.center = model.a() + omega * model.sigma() * model.sigma();
    if (const auto* fa = model.atomic()) {
        for (const auto& atom : fa->atoms) {
            p.center += atom.weight * (1.0 - atom.p[0]);
        }
        for (const auto& e : atomic_marks(*fa, omega, thr, false)) {
            double y = fa->atoms[e.atom].p[e.index];
            p.center += e.rate * lk_log(y);
            p.atoms.push_back({e.rate, std::log(y)});
        }
        return p;
    }
    if (omega <= model.dom_lower()) throw DomainError("omega outside dom kappa");
    const auto& bc = *model.binary();
    p.cutoff = model.default_cutoff();
    p.center += bc.c * centre_correction(bc.beta, omega, 0.5);
    double lo = std::min(thr, 0.5);
    p.center += bc.c * num::power_log_int(omega - bc.beta, std::max(lo, kEm1), 0.5);
    p.pieces.push_back({bc.c, omega, bc.beta, 0.5, 1.0});
    if (lo < 0.5) p.pieces.push_back({bc.c, omega - bc.beta, 0.0, lo, 0.5});
    return p;
}

LevyExponentParams spine_motion_params(const DislocationModel& model, double omega, int n) {
    double thr = level_threshold(model, n);
    LevyExponentParams p;
    p.gaussian = model.sigma();
    p.center = model.a() + omega * model.sigma() * model.sigma();
    if (const auto* fa = model.atomic()) {
        for (const auto& atom : fa->atoms) {
            double p1 = atom.p[0];
            p.center += atom.weight * (1.0 - p1);
            if (!(atom.p[1] > thr)) {
                double rate = atom.weight * std::pow(p1, omega);
                p.center += rate * lk_log(p1);
                p.atoms.push_back({rate, std::log(p1)});
            }
        }
        return p;
    }
    const auto& bc = *model.binary();
    p.cutoff = model.default_cutoff();
    double xt = std::min(thr, 0.5);
    p.center += bc.c * centre_correction(bc.beta, omega, xt);
    p.center += bc.c * num::power_int(1.0 - bc.beta, xt, 0.5);
    p.pieces.push_back({bc.c, omega, bc.beta, 1.0 - xt, 1.0});
    return p;
}

ExplicitEvents explicit_events(const DislocationModel& model, double x_cut) {
    ExplicitEvents ev{0.0, model.a(), x_cut};
    if (const auto* fa = model.atomic()) {
        for (const auto& atom : fa->atoms) {
            ev.rate += atom.weight;
            ev.drift += atom.weight * (1.0 - atom.p[0]);
        }
        return ev;
    }
    const auto& bc = *model.binary();
    if (!(x_cut > 0.0 && x_cut < 0.5)) throw std::invalid_argument("x_cut must lie in (0, 1/2)");
    ev.rate = bc.c * num::power_int(-bc.beta, x_cut, 0.5);
    ev.drift += bc.c * num::power_int(1.0 - bc.beta, x_cut, 0.5);
    Series h = num::add(num::monomial(1, 1.0), num::log1m_series());
    ev.drift += bc.c * num::integrate_singular(bc.beta, h, 2, [](double x) { return x + std::log1p(-x); }, 0.0, x_cut);
    return ev;
}

MassPartition sample_explicit_event(const DislocationModel& model, const ExplicitEvents& ev, Rng& rng) {
    if (const auto* fa = model.atomic()) {
        double u = rng.uniform() * ev.rate;
        for (const auto& atom : fa->atoms) {
            if (u < atom.weight) return atom.p;
            u -= atom.weight;
        }
        return fa->atoms.back().p;
    }
    const auto& bc = *model.binary();
    return binary_partition(levy_detail::sample_power(-bc.beta, ev.x_cut, 0.5, rng.uniform()));
}

}  // namespace growfrag
