#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

namespace growfrag {

struct MartingaleTrace;

struct SampleSet {
    std::vector<double> values;
    std::vector<double> weights;  // empty means uniform

    SampleSet() = default;
    explicit SampleSet(std::vector<double> v, std::vector<double> w = {});

    void add(double v) { values.push_back(v); }
    void add(double v, double w);
    std::size_t size() const { return values.size(); }
    bool weighted() const { return !weights.empty(); }
    double weight(std::size_t i) const { return weights.empty() ? 1.0 : weights[i]; }
    // (sum w)^2 / sum w^2
    double effective_n() const;
    void validate() const;
};

struct MeanSE {
    double mean;
    double se;
    std::size_t n;
    double n_eff;
};

// Self-normalised weighted mean; the standard error uses the delta-method
// variance with a small-sample factor n_eff / (n_eff - 1).
MeanSE mean_se(const SampleSet& s);

struct KsResult {
    double statistic;
    double p_value;
    double n_eff_a;
    double n_eff_b;
};

// Two-sample Kolmogorov-Smirnov with weighted empirical CDFs and effective sizes.
KsResult ks_two_sample(const SampleSet& a, const SampleSet& b);
// P(K > lambda) for the Kolmogorov distribution.
double kolmogorov_survival(double lambda);

struct ZResult {
    double z;
    double p_value;  // two-sided normal
};
ZResult z_test(const MeanSE& a, double target);
ZResult z_test(const MeanSE& a, const MeanSE& b);
double normal_two_sided_p(double z);

// One line of a JSON report.
struct TestResult {
    std::string name;
    std::string kind;  // "z", "ks", "exact", "info"
    double estimate = 0.0;
    double se = 0.0;
    double target = 0.0;
    double statistic = 0.0;
    double p_value = 1.0;
    double threshold = 0.0;
    bool pass = true;
    std::string note;
};

TestResult z_result(std::string name, const MeanSE& m, double target, double z_threshold = 3.0);
TestResult z_result(std::string name, const MeanSE& a, const MeanSE& b, double z_threshold = 3.0);
TestResult ks_result(std::string name, const KsResult& ks, double alpha = 0.01);

struct Report {
    std::string suite;
    std::vector<TestResult> tests;
    nlohmann::ordered_json details = nlohmann::ordered_json::object();

    bool pass() const;
    std::size_t failures() const;
};

nlohmann::ordered_json to_json(const TestResult& t);
nlohmann::ordered_json to_json(const Report& r);

enum class TraceKind { W, dW, dWa };

struct QuantileRow {
    double time;
    double q05, q25, median, q75, q95;
    double mean;
};

struct ConvergenceReport {
    TraceKind kind;
    std::vector<QuantileRow> rows;
    double fraction_nonpositive_terminal = 0.0;
    bool median_strictly_decreasing = false;
    bool abs_median_strictly_decreasing = false;
    double median_slope = 0.0;           // least-squares slope of the median against time
    double terminal_abs_median_ratio = 0.0;  // |median| at the last time over |median| at the first
    std::vector<std::size_t> running_n;  // heavy-tail diagnostic on terminal values
    std::vector<double> running_mean;
    std::vector<double> running_se;
};

double quantile(std::vector<double> v, double p);
ConvergenceReport convergence_report(const std::vector<MartingaleTrace>& traces, TraceKind kind);
nlohmann::ordered_json to_json(const ConvergenceReport& r);

// Runs fn(0..n-1) on `workers` threads; results come back in index order so
// any later reduction is independent of the worker count.
template <class Fn>
auto run_replicas(std::size_t n, unsigned workers, Fn fn) -> std::vector<decltype(fn(std::size_t{}))> {
    using T = decltype(fn(std::size_t{}));
    std::vector<T> out(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                out[i] = fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    workers = std::max(1u, workers);
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

}  // namespace growfrag
