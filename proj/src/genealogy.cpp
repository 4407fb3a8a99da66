#include "growfrag/genealogy.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>

#include "growfrag/errors.hpp"
#include "growfrag/rng.hpp"

namespace growfrag {

namespace {
constexpr std::string_view kEve = "\xE2\x88\x85";  // U+2205
}

Label::Label(std::vector<Triple> triples) : triples_(std::move(triples)) {
    for (const auto& t : triples_) {
        if (t[0] < 1 || t[1] < 1 || t[2] < 1) throw std::invalid_argument("label components must be >= 1");
    }
}

Label Label::parent() const {
    if (triples_.empty()) throw std::logic_error("Eve has no parent");
    return prefix(triples_.size() - 1);
}

Label Label::prefix(std::size_t len) const {
    Label out;
    out.triples_.assign(triples_.begin(), triples_.begin() + static_cast<std::ptrdiff_t>(std::min(len, triples_.size())));
    return out;
}

std::string Label::str() const {
    if (triples_.empty()) return std::string(kEve);
    std::string s;
    for (const auto& t : triples_) {
        s += '(';
        s += std::to_string(t[0]);
        s += ',';
        s += std::to_string(t[1]);
        s += ',';
        s += std::to_string(t[2]);
        s += ')';
    }
    return s;
}

Label Label::parse(std::string_view text) {
    if (text == kEve || text.empty()) return Label{};
    std::vector<Triple> out;
    std::size_t pos = 0;
    auto fail = [&] { throw std::invalid_argument("malformed label: " + std::string(text)); };
    while (pos < text.size()) {
        if (text[pos] != '(') fail();
        ++pos;
        Triple t{};
        for (int c = 0; c < 3; ++c) {
            auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + text.size(), t[c]);
            if (ec != std::errc{}) fail();
            pos = static_cast<std::size_t>(ptr - text.data());
            char expect = c < 2 ? ',' : ')';
            if (pos >= text.size() || text[pos] != expect) fail();
            ++pos;
        }
        out.push_back(t);
    }
    return Label(std::move(out));
}

std::uint64_t Label::hash() const {
    std::uint64_t h = 0x243f6a8885a308d3ULL;
    for (const auto& t : triples_) {
        for (int c : t) h = mix64(h ^ static_cast<std::uint64_t>(c));
        h = mix64(h + 0x13198a2e03707344ULL);
    }
    return h;
}

Label child(const Label& u, int m, int k, int i) {
    auto t = u.triples();
    t.push_back({m, k, i});
    return Label(std::move(t));
}

bool is_prefix(const Label& u, const Label& v) {
    const auto& a = u.triples();
    const auto& b = v.triples();
    return a.size() <= b.size() && std::equal(a.begin(), a.end(), b.begin());
}

int max_level(const Label& u) {
    int m = 0;
    for (const auto& t : u.triples()) m = std::max(m, t[0]);
    return m;
}

Label ancestor_at(const BirthHistory& history, double s, const Label& v) {
    if (s < 0.0) throw NotAlive("no ancestor alive before time 0");
    std::size_t best = 0;
    for (std::size_t len = 1; len <= v.generation(); ++len) {
        auto it = history.find(v.prefix(len));
        if (it == history.end()) throw std::invalid_argument("birth history misses a prefix of " + v.str());
        if (it->second <= s) {
            best = len;
        } else {
            break;
        }
    }
    return v.prefix(best);
}

}  // namespace growfrag
