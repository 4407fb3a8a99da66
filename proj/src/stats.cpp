#include "growfrag/stats.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "growfrag/errors.hpp"
#include "growfrag/martingales.hpp"

namespace growfrag {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kMinEffectiveN = 30.0;
}  // namespace

SampleSet::SampleSet(std::vector<double> v, std::vector<double> w) : values(std::move(v)), weights(std::move(w)) {
    validate();
}

void SampleSet::add(double v, double w) {
    if (weights.size() != values.size()) weights.resize(values.size(), 1.0);
    values.push_back(v);
    weights.push_back(w);
}

double SampleSet::effective_n() const {
    if (weights.empty()) return static_cast<double>(values.size());
    double s = 0.0, s2 = 0.0;
    for (double w : weights) {
        s += w;
        s2 += w * w;
    }
    return s2 > 0.0 ? s * s / s2 : 0.0;
}

void SampleSet::validate() const {
    if (weights.empty()) return;
    if (weights.size() != values.size()) throw std::invalid_argument("weights and values differ in length");
    for (double w : weights) {
        if (!(w > 0.0)) throw std::invalid_argument("weights must be strictly positive");
    }
}

MeanSE mean_se(const SampleSet& s) {
    s.validate();
    const std::size_t n = s.size();
    if (n < 2) throw TooFewSamples("mean_se needs at least two samples");
    double sw = 0.0, swv = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sw += s.weight(i);
        swv += s.weight(i) * s.values[i];
    }
    const double mean = swv / sw;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double d = s.weight(i) * (s.values[i] - mean);
        acc += d * d;
    }
    const double n_eff = s.effective_n();
    double var = acc / (sw * sw);
    var *= n_eff / (n_eff - 1.0);
    return {mean, std::sqrt(var), n, n_eff};
}

double kolmogorov_survival(double lambda) {
    if (lambda <= 0.0) return 1.0;
    if (lambda < 1.18) {
        // Jacobi-theta form of the CDF, fast for small lambda.
        double sum = 0.0;
        for (int k = 1; k < 50; ++k) {
            double e = (2.0 * k - 1.0) * (2.0 * k - 1.0) * kPi * kPi / (8.0 * lambda * lambda);
            double term = std::exp(-e);
            sum += term;
            if (term < 1e-18) break;
        }
        double cdf = std::sqrt(2.0 * kPi) / lambda * sum;
        return std::clamp(1.0 - cdf, 0.0, 1.0);
    }
    double sum = 0.0;
    for (int k = 1; k < 100; ++k) {
        double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 == 1 ? term : -term);
        if (term < 1e-18) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(const SampleSet& a, const SampleSet& b) {
    a.validate();
    b.validate();
    if (a.size() == 0 || b.size() == 0) throw TooFewSamples("KS needs nonempty samples");
    const double na = a.effective_n(), nb = b.effective_n();
    if (na < kMinEffectiveN || nb < kMinEffectiveN) throw TooFewSamples("effective sample size below 30");

    struct Point {
        double v;
        double wa;
        double wb;
    };
    std::vector<Point> pts;
    pts.reserve(a.size() + b.size());
    double ta = 0.0, tb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        pts.push_back({a.values[i], a.weight(i), 0.0});
        ta += a.weight(i);
    }
    for (std::size_t i = 0; i < b.size(); ++i) {
        pts.push_back({b.values[i], 0.0, b.weight(i)});
        tb += b.weight(i);
    }
    std::sort(pts.begin(), pts.end(), [](const Point& x, const Point& y) { return x.v < y.v; });
    double fa = 0.0, fb = 0.0, d = 0.0;
    for (std::size_t i = 0; i < pts.size();) {
        std::size_t j = i;
        while (j < pts.size() && pts[j].v == pts[i].v) {
            fa += pts[j].wa;
            fb += pts[j].wb;
            ++j;
        }
        d = std::max(d, std::abs(fa / ta - fb / tb));
        i = j;
    }
    double en = std::sqrt(na * nb / (na + nb));
    return {d, kolmogorov_survival(en * d), na, nb};
}

double normal_two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

// Deterministic estimators have a zero standard error; allow for round-off.
static double roundoff_floor(double scale) { return 1e-12 * std::max(1.0, std::abs(scale)); }

ZResult z_test(const MeanSE& a, double target) {
    double se = std::hypot(a.se, roundoff_floor(target));
    double z = (a.mean - target) / se;
    return {z, normal_two_sided_p(z)};
}

ZResult z_test(const MeanSE& a, const MeanSE& b) {
    double se = std::hypot(std::hypot(a.se, b.se), roundoff_floor(b.mean));
    double diff = a.mean - b.mean;
    double z = diff / se;
    return {z, normal_two_sided_p(z)};
}

TestResult z_result(std::string name, const MeanSE& m, double target, double z_threshold) {
    auto z = z_test(m, target);
    TestResult t;
    t.name = std::move(name);
    t.kind = "z";
    t.estimate = m.mean;
    t.se = m.se;
    t.target = target;
    t.statistic = z.z;
    t.p_value = z.p_value;
    t.threshold = z_threshold;
    t.pass = std::abs(z.z) < z_threshold;
    return t;
}

TestResult z_result(std::string name, const MeanSE& a, const MeanSE& b, double z_threshold) {
    auto z = z_test(a, b);
    TestResult t;
    t.name = std::move(name);
    t.kind = "z";
    t.estimate = a.mean;
    t.se = std::hypot(a.se, b.se);
    t.target = b.mean;
    t.statistic = z.z;
    t.p_value = z.p_value;
    t.threshold = z_threshold;
    t.pass = std::abs(z.z) < z_threshold;
    return t;
}

TestResult ks_result(std::string name, const KsResult& ks, double alpha) {
    TestResult t;
    t.name = std::move(name);
    t.kind = "ks";
    t.statistic = ks.statistic;
    t.p_value = ks.p_value;
    t.threshold = alpha;
    t.pass = ks.p_value > alpha;
    return t;
}

bool Report::pass() const { return failures() == 0; }

std::size_t Report::failures() const {
    return static_cast<std::size_t>(std::count_if(tests.begin(), tests.end(), [](const TestResult& t) { return !t.pass; }));
}

nlohmann::ordered_json to_json(const TestResult& t) {
    nlohmann::ordered_json j;
    j["name"] = t.name;
    j["kind"] = t.kind;
    if (t.kind == "ks") {
        j["statistic"] = t.statistic;
        j["p_value"] = t.p_value;
    } else {
        j["estimate"] = t.estimate;
        j["se"] = t.se;
        j["target"] = t.target;
        if (t.kind == "z") j["z"] = t.statistic;
    }
    j["threshold"] = t.threshold;
    j["pass"] = t.pass;
    if (!t.note.empty()) j["note"] = t.note;
    return j;
}

nlohmann::ordered_json to_json(const Report& r) {
    nlohmann::ordered_json j;
    j["suite"] = r.suite;
    j["pass"] = r.pass();
    j["tests"] = nlohmann::ordered_json::array();
    for (const auto& t : r.tests) j["tests"].push_back(to_json(t));
    if (!r.details.empty()) j["details"] = r.details;
    return j;
}

double quantile(std::vector<double> v, double p) {
    if (v.empty()) throw Empty("quantile of an empty sample");
    std::sort(v.begin(), v.end());
    double h = p * static_cast<double>(v.size() - 1);
    auto lo = static_cast<std::size_t>(std::floor(h));
    std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

ConvergenceReport convergence_report(const std::vector<MartingaleTrace>& traces, TraceKind kind) {
    if (traces.size() < 100) throw std::invalid_argument("convergence_report needs at least 100 traces");
    const auto& times = traces.front().times;
    auto series = [kind](const MartingaleTrace& tr) -> const std::vector<double>& {
        switch (kind) {
            case TraceKind::W: return tr.W;
            case TraceKind::dW: return tr.dW;
            case TraceKind::dWa: return tr.dWa;
        }
        return tr.W;
    };
    ConvergenceReport rep;
    rep.kind = kind;
    for (std::size_t k = 0; k < times.size(); ++k) {
        std::vector<double> col;
        col.reserve(traces.size());
        for (const auto& tr : traces) {
            const auto& s = series(tr);
            if (s.size() != times.size()) throw std::invalid_argument("trace lacks the requested series");
            col.push_back(s[k]);
        }
        double mean = std::accumulate(col.begin(), col.end(), 0.0) / static_cast<double>(col.size());
        rep.rows.push_back({times[k], quantile(col, 0.05), quantile(col, 0.25), quantile(col, 0.5),
                            quantile(col, 0.75), quantile(col, 0.95), mean});
    }
    rep.median_strictly_decreasing = true;
    rep.abs_median_strictly_decreasing = true;
    for (std::size_t k = 1; k < rep.rows.size(); ++k) {
        if (!(rep.rows[k].median < rep.rows[k - 1].median)) rep.median_strictly_decreasing = false;
        if (!(std::abs(rep.rows[k].median) < std::abs(rep.rows[k - 1].median))) rep.abs_median_strictly_decreasing = false;
    }
    if (rep.rows.size() >= 2) {
        double mt = 0.0, mm = 0.0;
        for (const auto& r : rep.rows) {
            mt += r.time;
            mm += r.median;
        }
        mt /= static_cast<double>(rep.rows.size());
        mm /= static_cast<double>(rep.rows.size());
        double sxy = 0.0, sxx = 0.0;
        for (const auto& r : rep.rows) {
            sxy += (r.time - mt) * (r.median - mm);
            sxx += (r.time - mt) * (r.time - mt);
        }
        rep.median_slope = sxx > 0.0 ? sxy / sxx : 0.0;
        double first = std::abs(rep.rows.front().median);
        rep.terminal_abs_median_ratio = first > 0.0 ? std::abs(rep.rows.back().median) / first : 0.0;
    }

    std::vector<double> terminal;
    for (const auto& tr : traces) terminal.push_back(series(tr).back());
    rep.fraction_nonpositive_terminal =
        static_cast<double>(std::count_if(terminal.begin(), terminal.end(), [](double v) { return v <= 0.0; })) /
        static_cast<double>(terminal.size());
    std::vector<std::size_t> marks;
    for (std::size_t n = 100; n < terminal.size(); n *= 2) marks.push_back(n);
    marks.push_back(terminal.size());
    for (std::size_t n : marks) {
        SampleSet s(std::vector<double>(terminal.begin(), terminal.begin() + static_cast<std::ptrdiff_t>(n)));
        auto m = mean_se(s);
        rep.running_n.push_back(n);
        rep.running_mean.push_back(m.mean);
        rep.running_se.push_back(m.se);
    }
    return rep;
}

nlohmann::ordered_json to_json(const ConvergenceReport& r) {
    nlohmann::ordered_json j;
    j["kind"] = r.kind == TraceKind::W ? "W" : (r.kind == TraceKind::dW ? "dW" : "dWa");
    j["quantiles"] = nlohmann::ordered_json::array();
    for (const auto& row : r.rows) {
        j["quantiles"].push_back({{"time", row.time},
                                  {"q05", row.q05},
                                  {"q25", row.q25},
                                  {"median", row.median},
                                  {"q75", row.q75},
                                  {"q95", row.q95},
                                  {"mean", row.mean}});
    }
    j["fraction_nonpositive_terminal"] = r.fraction_nonpositive_terminal;
    j["median_strictly_decreasing"] = r.median_strictly_decreasing;
    j["abs_median_strictly_decreasing"] = r.abs_median_strictly_decreasing;
    j["median_slope"] = r.median_slope;
    j["terminal_abs_median_ratio"] = r.terminal_abs_median_ratio;
    j["running_mean"] = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < r.running_n.size(); ++k) {
        j["running_mean"].push_back({{"n", r.running_n[k]}, {"mean", r.running_mean[k]}, {"se", r.running_se[k]}});
    }
    return j;
}

}  // namespace growfrag
