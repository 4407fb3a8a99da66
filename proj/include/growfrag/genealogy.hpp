#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace growfrag {

// (m, k, i): truncation level of the child, index of the qualifying branch
// event of the parent, sibling index within the level.
using Triple = std::array<int, 3>;

class Label {
public:
    Label() = default;
    explicit Label(std::vector<Triple> triples);

    const std::vector<Triple>& triples() const { return triples_; }
    std::size_t generation() const { return triples_.size(); }
    bool is_eve() const { return triples_.empty(); }

    Label parent() const;
    Label prefix(std::size_t len) const;

    std::string str() const;
    static Label parse(std::string_view text);

    std::uint64_t hash() const;

    friend bool operator==(const Label&, const Label&) = default;
    // Lexicographic on triples, a prefix sorting before its extensions.
    friend bool operator<(const Label& a, const Label& b) { return a.triples_ < b.triples_; }

private:
    std::vector<Triple> triples_;
};

Label child(const Label& u, int m, int k, int i);
bool is_prefix(const Label& u, const Label& v);
int max_level(const Label& u);

// Birth times of (at least) every prefix of the labels queried.
using BirthHistory = std::map<Label, double>;

// Longest prefix of v born at or before s.
Label ancestor_at(const BirthHistory& history, double s, const Label& v);

}  // namespace growfrag

template <>
struct std::hash<growfrag::Label> {
    std::size_t operator()(const growfrag::Label& l) const { return static_cast<std::size_t>(l.hash()); }
};
