#include <doctest.h>

#include "tracewise/error.hpp"
#include "tracewise/rng.hpp"
#include "tracewise/wanderer.hpp"

#include <cmath>

using namespace tracewise;

// Reference values from exact rational evaluation of the closed form.
TEST_CASE("closed form") {
    CHECK(success_probability(2, 1, 0.9) == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(success_probability(11, 4, 0.95) == doctest::Approx(0.9740751217089091233).epsilon(1e-14));
    CHECK(success_probability(10, 2, 0.95) == doctest::Approx(0.863284500991000207776).epsilon(1e-14));
    CHECK(success_probability(8, 1, 0.95) == doctest::Approx(0.69833729609375).epsilon(1e-14));
    CHECK(1.0 - success_probability(2, 4, 0.99) == doctest::Approx(1e-8).epsilon(1e-6));
    for (int d : {2, 3, 40})
        CHECK(success_probability(d, 3, 1.0) == 1.0);
    CHECK(success_probability(1, 1, 0.0) == 1.0);
    CHECK(success_probability(4, 1, 0.0) == 0.0);
    CHECK_THROWS_AS(success_probability(3, 1, 1.5), Error);
    CHECK_THROWS_AS(success_probability(3, 1, -0.1), Error);
    CHECK_THROWS_AS(success_probability(2, 5, 0.5), Error);
    CHECK_THROWS_AS(success_probability(0, 1, 0.5), Error);
}

TEST_CASE("monotone in depth and target count") {
    Rng rng(7);
    for (int i = 0; i < 1000; ++i) {
        const double q = 0.01 + 0.98 * rng.uniform01();
        const auto m = static_cast<std::uint64_t>(rng.uniform_int(1, 15));
        const int d = static_cast<int>(rng.uniform_int(4, 60));
        CHECK(log_failure_probability(d + 1, m, q) > log_failure_probability(d, m, q));
        CHECK(success_probability(d + 1, m, q) <= success_probability(d, m, q));
        CHECK(log_failure_probability(d, m + 1, q) < log_failure_probability(d, m, q));
    }
}

TEST_CASE("independent simulator") {
    CHECK(simulate_independent({5, 2, 1.0, 1000, 3}).estimate == 1.0);
    CHECK(simulate_independent({5, 2, 0.0, 1000, 3}).estimate == 0.0);
    auto e = simulate_independent({10, 2, 0.95, 200000, 11});
    CHECK(std::abs(e.estimate - success_probability(10, 2, 0.95)) <= 4 * e.std_error);
    CHECK(e.std_error == doctest::Approx(std::sqrt(e.estimate * (1 - e.estimate) / 200000)));
    // Worker count does not change the result.
    auto a = simulate_independent({7, 3, 0.9, 50000, 5}, 1);
    auto b = simulate_independent({7, 3, 0.9, 50000, 5}, 4);
    CHECK(a.estimate == b.estimate);
    CHECK_THROWS_AS(simulate_independent({5, 2, 0.5, 0, 1}), Error);
}

TEST_CASE("shared-tree simulator") {
    CHECK(simulate_tree(6, 3, 0.0, 6 * 64, 200, 1).estimate == 1.0);
    CHECK(simulate_tree(1, 1, 0.7, 10, 200, 1).estimate == 1.0);
    auto e = simulate_tree(8, 1, 0.05, 8 * 256, 100000, 9);
    CHECK(e.model == WandererModel::SharedTree);
    CHECK(std::abs(e.estimate - success_probability(8, 1, 0.95)) < 0.02);
    // A budget of one node never reaches a leaf.
    CHECK(simulate_tree(3, 1, 0.0, 1, 50, 2).estimate == 0.0);
}

TEST_CASE("plateau scan") {
    auto r = plateau_scan(4, 0.99, 0.995, 200);
    REQUIRE(r.has_value());
    CHECK(r->lo == 1);
    CHECK(success_probability(r->hi, 4, 0.99) > 0.995);
    CHECK(success_probability(r->hi + 1, 4, 0.99) <= 0.995);
    CHECK_FALSE(plateau_scan(1, 0.5, 0.995, 200).has_value());
    auto full = plateau_scan(2, 1.0, 0.995, 50);
    REQUIRE(full.has_value());
    CHECK(full->hi == 50);
}
