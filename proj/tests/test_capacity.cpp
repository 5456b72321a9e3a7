#include "benes/capacity.hpp"

#include <stdexcept>
#include <cmath>

#include "doctest.h"

using namespace benes;

namespace {

bool has(const std::vector<ProfileViolation>& v, ProfileConstraint c) {
    for (const auto& x : v) {
        if (x.constraint == c) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("capacity region membership") {
    CHECK(in_capacity_region(RateMatrix(4, 0.25), 2));
    CHECK(in_capacity_region(RateMatrix(16, 1.0 / 16), 4));

    RateMatrix heavy(4);
    heavy.at(1, 1) = 1.2;
    CHECK_FALSE(in_capacity_region(heavy, 2));

    RateMatrix column(4);
    column.at(1, 1) = 0.5;
    column.at(2, 1) = 0.495;
    CHECK(in_capacity_region(column, 2, 0.0));
    CHECK_FALSE(in_capacity_region(column, 2, 0.01));

    CHECK_THROWS_AS(in_capacity_region(RateMatrix(4), 3), std::invalid_argument);
    CHECK_THROWS_AS(in_capacity_region(RateMatrix(4), 2, 1.0), std::invalid_argument);
}

TEST_CASE("uniform 4x4 profile matches the base-case allocation") {
    const auto topo = BenesTopology::build(2);
    const auto p = build_stabilizing_profile(RateMatrix(4, 0.25), topo);
    for (const auto& link : p.server) {
        CHECK(link.upper == doctest::Approx(0.5));
        CHECK(link.lower == doctest::Approx(0.5));
    }
    for (const auto& links : p.module) {
        for (const auto& link : links) {
            CHECK(link.upper == doctest::Approx(0.5));
            CHECK(link.lower == doctest::Approx(0.5));
        }
    }
    for (std::size_t i = 0; i < p.to_d1.size(); ++i) {
        CHECK(p.to_d1[i] == DivisionRates{1.0, 0.0});
        CHECK(p.to_d2[i] == DivisionRates{0.0, 1.0});
    }
    CHECK(verify_profile(p, RateMatrix(4, 0.25), topo).empty());
}

TEST_CASE("zero rates give a zero profile") {
    for (int n = 1; n <= 5; ++n) {
        const auto topo = BenesTopology::build(n);
        const RateMatrix r(topo.servers());
        const auto p = build_stabilizing_profile(r, topo);
        for (const auto& l : p.server) CHECK(l == DivisionRates{});
        for (const auto& ls : p.module) CHECK((ls[0] == DivisionRates{} && ls[1] == DivisionRates{}));
        for (const auto& l : p.to_d1) CHECK(l == DivisionRates{});
        CHECK(verify_profile(p, r, topo).empty());
    }
}

TEST_CASE("profiles outside the region are rejected") {
    const auto topo = BenesTopology::build(3);
    RateMatrix r(8);
    r.at(3, 3) = 1.01;
    CHECK_THROWS_AS(build_stabilizing_profile(r, topo), std::invalid_argument);
    CHECK_THROWS_AS(build_stabilizing_profile(RateMatrix(4), topo), std::invalid_argument);
}

TEST_CASE("random interior points yield valid profiles") {
    std::mt19937_64 rng(42);
    for (int n = 1; n <= 6; ++n) {
        const auto topo = BenesTopology::build(n);
        for (int trial = 0; trial < 100; ++trial) {
            const RateMatrix r = sample_interior(n, rng);
            REQUIRE(in_capacity_region(r, n));
            const auto p = build_stabilizing_profile(r, topo);
            const auto violations = verify_profile(p, r, topo);
            CHECK(violations.empty());
        }
    }
}

TEST_CASE("partition nodes forward exactly what they receive") {
    std::mt19937_64 rng(7);
    for (int n = 2; n <= 6; ++n) {
        const auto topo = BenesTopology::build(n);
        for (int trial = 0; trial < 10; ++trial) {
            const RateMatrix r = sample_interior(n, rng);
            const auto p = build_stabilizing_profile(r, topo);
            double total_upper = 0.0;
            for (int row = 1; row <= topo.rows(); ++row) {
                DivisionRates in;
                for (const Hop& h : topo.previous({n, row})) {
                    const auto& l = p.module[static_cast<std::size_t>(topo.index(h.node))][link_slot(h.link)];
                    in.upper += l.upper;
                    in.lower += l.lower;
                }
                CHECK(std::abs(in.upper - p.to_d1[static_cast<std::size_t>(row - 1)].upper) < 1e-9);
                CHECK(std::abs(in.lower - p.to_d2[static_cast<std::size_t>(row - 1)].lower) < 1e-9);
                total_upper += in.upper;
            }
            double offered_upper = 0.0;
            for (int d = 1; d <= topo.servers() / 2; ++d) offered_upper += r.column_sum(d);
            CHECK(total_upper == doctest::Approx(offered_upper).epsilon(1e-12));
        }
    }
}

TEST_CASE("construction is linear in the rate matrix") {
    std::mt19937_64 rng(11);
    const auto topo = BenesTopology::build(4);
    const RateMatrix r = sample_interior(4, rng);
    const auto base = build_stabilizing_profile(r, topo);
    for (double alpha : {0.0, 0.3, 0.75, 1.0}) {
        const auto p = build_stabilizing_profile(r.scaled(alpha), topo);
        for (std::size_t i = 0; i < p.module.size(); ++i) {
            for (int k = 0; k < 2; ++k) {
                CHECK(std::abs(p.module[i][static_cast<std::size_t>(k)].upper -
                               alpha * base.module[i][static_cast<std::size_t>(k)].upper) < 1e-12);
                CHECK(std::abs(p.module[i][static_cast<std::size_t>(k)].lower -
                               alpha * base.module[i][static_cast<std::size_t>(k)].lower) < 1e-12);
            }
        }
        for (std::size_t i = 0; i < p.to_d1.size(); ++i) {
            CHECK(std::abs(p.to_d1[i].upper - alpha * base.to_d1[i].upper) < 1e-12);
        }
    }
}

TEST_CASE("verifier flags injected defects") {
    const auto topo = BenesTopology::build(3);
    const RateMatrix r(8, 0.1);
    const auto good = build_stabilizing_profile(r, topo);
    REQUIRE(verify_profile(good, r, topo).empty());

    SUBCASE("over-capacity link") {
        auto p = good;
        p.module[0][0] = {0.9, 0.6};
        CHECK(has(verify_profile(p, r, topo), ProfileConstraint::link_capacity));
    }
    SUBCASE("asymmetric split in column 1") {
        auto p = good;
        p.module[0][0].upper += 0.05;
        const auto v = verify_profile(p, r, topo);
        CHECK(has(v, ProfileConstraint::symmetry));
    }
    SUBCASE("under-served source") {
        auto p = good;
        p.server[2].lower -= 0.01;
        CHECK(has(verify_profile(p, r, topo), ProfileConstraint::source_coverage));
    }
    SUBCASE("lost traffic at a partition node") {
        auto p = good;
        p.to_d1[1].upper -= 0.02;
        CHECK(has(verify_profile(p, r, topo), ProfileConstraint::conservation));
    }
    SUBCASE("impure exit") {
        auto p = good;
        p.to_d1[0].lower = 0.01;
        CHECK(has(verify_profile(p, r, topo), ProfileConstraint::exit_purity));
    }
    SUBCASE("negative rate") {
        auto p = good;
        p.module[5][1].lower = -0.5;
        CHECK(has(verify_profile(p, r, topo), ProfileConstraint::nonnegativity));
    }
}
