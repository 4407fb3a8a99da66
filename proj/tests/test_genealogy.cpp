#include <doctest.h>

#include <set>

#include "growfrag/genealogy.hpp"

using namespace growfrag;

TEST_CASE("label text round trip") {
    Label eve;
    CHECK(eve.is_eve());
    CHECK(eve.str() == "\xE2\x88\x85");
    Label u = child(child(eve, 1, 2, 1), 3, 1, 2);
    CHECK(u.str() == "(1,2,1)(3,1,2)");
    CHECK(Label::parse(u.str()) == u);
    CHECK(Label::parse(eve.str()) == eve);
    CHECK_THROWS(Label::parse("(1,2)"));
}

TEST_CASE("parent, prefix and levels") {
    Label u = child(child(child(Label{}, 2, 1, 1), 1, 4, 1), 3, 1, 1);
    CHECK(u.generation() == 3);
    CHECK(u.parent() == child(child(Label{}, 2, 1, 1), 1, 4, 1));
    CHECK(u.prefix(1) == child(Label{}, 2, 1, 1));
    CHECK(is_prefix(u.prefix(2), u));
    CHECK(is_prefix(Label{}, u));
    CHECK_FALSE(is_prefix(u, u.prefix(2)));
    CHECK(max_level(u) == 3);
    CHECK(max_level(Label{}) == 0);
}

TEST_CASE("ordering puts prefixes first and hashing separates siblings") {
    Label a = child(Label{}, 1, 1, 1), b = child(Label{}, 1, 1, 2);
    CHECK(Label{} < a);
    CHECK(a < child(a, 1, 1, 1));
    CHECK(child(a, 9, 9, 9) < b);
    std::set<std::uint64_t> hashes;
    for (int m = 1; m <= 3; ++m)
        for (int k = 1; k <= 20; ++k)
            for (int i = 1; i <= 3; ++i) hashes.insert(child(a, m, k, i).hash());
    CHECK(hashes.size() == 180);
}

TEST_CASE("ancestor at an earlier time") {
    Label u1 = child(Label{}, 1, 1, 1);
    Label u2 = child(u1, 2, 1, 1);
    BirthHistory h{{Label{}, 0.0}, {u1, 0.5}, {u2, 1.2}};
    CHECK(ancestor_at(h, 0.4, u2) == Label{});
    CHECK(ancestor_at(h, 0.5, u2) == u1);
    CHECK(ancestor_at(h, 2.0, u2) == u2);
}
