#include "growfrag/scenario.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "growfrag/errors.hpp"

namespace growfrag {

namespace {

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    std::string out(s.substr(b, e - b + 1));
    if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
    return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) {
        std::string t = trim(cur);
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

double to_double(const std::string& key, const std::string& v) {
    double x = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(x)) {
        throw ConfigError(key + ": not a finite number: '" + v + "'");
    }
    return x;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    std::uint64_t x = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError(key + ": not an unsigned integer: '" + v + "'");
    return x;
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    for (const auto& s : split(v, ',')) out.push_back(to_double(key, s));
    return out;
}

std::optional<double> to_omega(const std::string& key, const std::string& v) {
    if (v == "auto") return std::nullopt;
    return to_double(key, v);
}

const std::set<std::string> kKeys = {
    "model.a",      "model.sigma",   "model.nu.kind", "model.nu.p",        "model.nu.weight",
    "model.nu.atoms", "model.nu.c",  "model.nu.beta", "model.ladder",      "run.omega",
    "run.omegas",   "run.t_grid",    "run.replicas",  "run.level",         "run.cap",
    "run.barrier",  "run.mesh",      "run.seed",      "run.out",           "derivative.offset",
    "kappa.q_grid", "mto.t",         "mto.q",         "mto.thresholds",    "spine.t",
    "spine.perturbation"};

}  // namespace

DislocationModel Scenario::model() const { return DislocationModel(a, sigma, nu, TruncationLadder(ladder)); }

int Scenario::resolved_level() const { return level < 0 ? static_cast<int>(ladder.size()) - 1 : level; }

double Scenario::resolved_omega() const { return omega ? *omega : omega_bar(model()); }

std::vector<double> Scenario::resolved_omegas() const {
    if (omegas.empty()) return {resolved_omega()};
    std::vector<double> out;
    for (const auto& w : omegas) out.push_back(w ? *w : omega_bar(model()));
    return out;
}

ScenarioMap parse_scenario_text(std::istream& in) {
    ScenarioMap m;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        m[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    }
    return m;
}

namespace {

Scenario build(const ScenarioMap& m) {
    for (const auto& [k, v] : m) {
        if (!kKeys.count(k)) throw ConfigError("unknown key '" + k + "'");
    }
    auto get = [&](const std::string& k) -> const std::string* {
        auto it = m.find(k);
        return it == m.end() ? nullptr : &it->second;
    };
    Scenario s;
    if (auto v = get("model.a")) s.a = to_double("model.a", *v);
    if (auto v = get("model.sigma")) s.sigma = to_double("model.sigma", *v);
    std::string kind = get("model.nu.kind") ? *get("model.nu.kind") : "none";
    if (kind == "none") {
        s.nu = FiniteAtomic{};
    } else if (kind == "point_mass") {
        if (!get("model.nu.p")) throw ConfigError("point_mass needs model.nu.p");
        double w = get("model.nu.weight") ? to_double("model.nu.weight", *get("model.nu.weight")) : 1.0;
        s.nu = FiniteAtomic{{{w, MassPartition(to_list("model.nu.p", *get("model.nu.p")))}}};
    } else if (kind == "finite_atomic") {
        if (!get("model.nu.atoms")) throw ConfigError("finite_atomic needs model.nu.atoms");
        FiniteAtomic fa;
        for (const auto& atom : split(*get("model.nu.atoms"), ';')) {
            auto colon = atom.find(':');
            if (colon == std::string::npos) throw ConfigError("model.nu.atoms: expected weight:p1,p2,...");
            fa.atoms.push_back({to_double("model.nu.atoms", trim(atom.substr(0, colon))),
                                MassPartition(to_list("model.nu.atoms", atom.substr(colon + 1)))});
        }
        s.nu = fa;
    } else if (kind == "binary_conservative") {
        if (!get("model.nu.c") || !get("model.nu.beta")) throw ConfigError("binary_conservative needs c and beta");
        s.nu = BinaryConservative{to_double("model.nu.c", *get("model.nu.c")),
                                  to_double("model.nu.beta", *get("model.nu.beta"))};
    } else {
        throw ConfigError("model.nu.kind: unknown kind '" + kind + "'");
    }
    if (auto v = get("model.ladder")) s.ladder = to_list("model.ladder", *v);
    if (auto v = get("run.omega")) s.omega = to_omega("run.omega", *v);
    if (auto v = get("run.omegas")) {
        for (const auto& w : split(*v, ',')) s.omegas.push_back(to_omega("run.omegas", w));
    }
    if (auto v = get("run.t_grid")) s.t_grid = to_list("run.t_grid", *v);
    if (auto v = get("run.replicas")) s.replicas = to_u64("run.replicas", *v);
    if (auto v = get("run.level")) s.level = static_cast<int>(to_u64("run.level", *v));
    if (auto v = get("run.cap")) s.cap = to_u64("run.cap", *v);
    if (auto v = get("run.barrier")) s.barrier_a = to_list("run.barrier", *v);
    if (auto v = get("run.mesh")) s.mesh = to_double("run.mesh", *v);
    if (auto v = get("run.seed")) s.seed = to_u64("run.seed", *v);
    if (auto v = get("run.out")) s.out = *v;
    if (auto v = get("derivative.offset")) s.derivative_offset = to_double("derivative.offset", *v);
    if (auto v = get("kappa.q_grid")) s.q_grid = to_list("kappa.q_grid", *v);
    if (auto v = get("mto.t")) s.mto_t = to_double("mto.t", *v);
    if (auto v = get("mto.q")) s.mto_q = to_list("mto.q", *v);
    if (auto v = get("mto.thresholds")) s.mto_thresholds = to_list("mto.thresholds", *v);
    if (auto v = get("spine.t")) s.spine_t = to_double("spine.t", *v);
    if (auto v = get("spine.perturbation")) s.spine_perturbation = to_double("spine.perturbation", *v);

    DislocationModel model = s.model();
    if (s.resolved_level() > model.ladder().max_index()) throw ConfigError("run.level exceeds the ladder");
    for (double w : s.resolved_omegas()) {
        if (!model.in_interior(w) || !std::isfinite(cumulant(model, w))) {
            throw ConfigError("omega " + std::to_string(w) + " is outside dom kappa");
        }
    }
    if (s.t_grid.empty()) throw ConfigError("run.t_grid is empty");
    for (std::size_t i = 0; i < s.t_grid.size(); ++i) {
        if (!(s.t_grid[i] > 0.0) || (i && !(s.t_grid[i] > s.t_grid[i - 1]))) {
            throw ConfigError("run.t_grid must be positive and increasing");
        }
    }
    if (s.replicas < 2) throw ConfigError("run.replicas must be at least 2");
    if (!(s.mesh > 0.0)) throw ConfigError("run.mesh must be positive");
    if (!(s.mto_t > 0.0) || !(s.spine_t > 0.0)) throw ConfigError("horizons must be positive");
    return s;
}

}  // namespace

Scenario scenario_from_map(const ScenarioMap& m) {
    // Model-level failures (bad partitions, ladders, moments) are configuration errors here.
    try {
        return build(m);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
}

Scenario load_scenario(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
    ScenarioMap m = parse_scenario_text(in);
    for (const auto& o : overrides) {
        auto eq = o.find('=');
        if (eq == std::string::npos) throw ConfigError("override '" + o + "' is not key=value");
        m[trim(o.substr(0, eq))] = trim(o.substr(eq + 1));
    }
    return scenario_from_map(m);
}

}  // namespace growfrag
