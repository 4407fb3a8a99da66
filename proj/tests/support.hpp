#pragma once

#include <cmath>
#include <map>
#include <vector>

#include "growfrag/branching.hpp"

namespace testsupport {

using growfrag::Label;

// Level of a fragment of relative size y, found by scanning the ladder.
inline int scan_level(double y, const std::vector<double>& b) {
    for (std::size_t m = 1; m < b.size(); ++m) {
        if (y > std::exp(-b[m])) return static_cast<int>(m);
    }
    return -1;
}

struct Replayed {
    std::map<Label, std::vector<int>> counters;  // every label ever born, with its K counters
};

// Rebuilds labels and K counters from the event log alone: each event bumps
// K(l) once for every level l receiving a child, and children of one level
// are numbered by increasing index within the partition.
inline Replayed replay(const std::vector<growfrag::BranchEvent>& log, const std::vector<double>& ladder, int level) {
    Replayed r;
    r.counters[Label{}] = std::vector<int>(static_cast<std::size_t>(level), 0);
    for (const auto& ev : log) {
        auto& k = r.counters.at(ev.parent);
        const auto& q = ev.p.entries();
        std::map<int, std::vector<std::size_t>> by_level;
        for (std::size_t j = 1; j < q.size(); ++j) by_level[scan_level(q[j], ladder)].push_back(j);
        std::vector<Label> born;
        for (const auto& [m, js] : by_level) {
            int km = ++k[static_cast<std::size_t>(m - 1)];
            for (std::size_t idx = 0; idx < js.size(); ++idx) {
                auto t = ev.parent.triples();
                t.push_back({m, km, static_cast<int>(idx + 1)});
                born.emplace_back(t);
            }
        }
        for (auto& l : born) r.counters[l] = std::vector<int>(static_cast<std::size_t>(level), 0);
    }
    return r;
}

}  // namespace testsupport
