#include "flageffect/design.hpp"

#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include <doctest.h>

using namespace ffx;

namespace {

// Independent integer checks, used instead of the library's own predicates
// wherever possible.
bool balanced(const DesignMatrix& d) {
    for (int f = 0; f < d.n_factors; ++f) {
        int sum = 0;
        for (int r = 0; r < d.n_runs; ++r) sum += d.sign(r, f);
        if (sum != 0) return false;
    }
    return true;
}

bool orthogonal(const DesignMatrix& d) {
    for (int a = 0; a < d.n_factors; ++a)
        for (int b = a + 1; b < d.n_factors; ++b) {
            int dot = 0;
            for (int r = 0; r < d.n_runs; ++r)
                dot += d.sign(r, a) * d.sign(r, b);
            if (dot != 0) return false;
        }
    return true;
}

} // namespace

TEST_CASE("full factorial enumerates every sign combination once") {
    DesignMatrix d = full_factorial(3);
    CHECK(d.n_runs == 8);
    CHECK(d.achieved_resolution == Resolution::Full);
    std::set<std::vector<std::int8_t>> rows;
    for (int r = 0; r < 8; ++r) rows.insert(signs_for_run(d, r));
    CHECK(rows.size() == 8);

    // Standard order: first factor alternates fastest.
    CHECK(d.sign(0, 0) == -1);
    CHECK(d.sign(1, 0) == +1);
    CHECK(d.sign(2, 0) == -1);
    CHECK(d.sign(0, 1) == -1);
    CHECK(d.sign(2, 1) == +1);
}

TEST_CASE("smallest full factorial") {
    DesignMatrix d = full_factorial(1);
    CHECK(d.n_runs == 2);
    CHECK(d.sign(0, 0) == -1);
    CHECK(d.sign(1, 0) == +1);
}

TEST_CASE("full factorial columns are balanced and orthogonal") {
    DesignMatrix d = full_factorial(4);
    CHECK(balanced(d));
    CHECK(orthogonal(d));
}

TEST_CASE("full factorial rejects out-of-range k") {
    CHECK_THROWS_WITH_AS(full_factorial(0), doctest::Contains("[1, 20]"),
                         std::invalid_argument);
    CHECK_THROWS_AS(full_factorial(21), std::invalid_argument);
}

TEST_CASE("three factors in four runs is the half fraction with C = A*B") {
    DesignMatrix d = generate_fractional(3, Resolution::III, 4);
    CHECK(d.n_runs == 4);
    CHECK(d.base_count == 2);
    const std::vector<std::vector<std::int8_t>> expected{
        {-1, -1, +1}, {+1, -1, -1}, {-1, +1, -1}, {+1, +1, +1}};
    for (int r = 0; r < 4; ++r) CHECK(signs_for_run(d, r) == expected[r]);
    CHECK(d.generator_masks[2] == 0b11);
}

TEST_CASE("requesting FULL inside the budget returns the full factorial") {
    DesignMatrix fraction = generate_fractional(3, Resolution::Full, 8);
    DesignMatrix full = full_factorial(3);
    CHECK(fraction.signs == full.signs);
}

TEST_CASE("large fraction: 82 factors at resolution IV in 2048 runs") {
    DesignMatrix d = generate_fractional(82, Resolution::IV, 2048);
    CHECK(d.n_runs == 2048);
    CHECK(d.n_factors == 82);
    CHECK(verify_resolution(d, Resolution::IV));
    CHECK(balanced(d));
}

TEST_CASE("infeasible targets fail loudly instead of degrading") {
    // Resolution IV holds at most 2^(k-1) factors in 2^k runs, so 16
    // factors cannot fit a 16-run IV design.
    CHECK_THROWS_WITH_AS(generate_fractional(16, Resolution::IV, 16),
                         doctest::Contains("smallest succeeding run count"),
                         std::runtime_error);
    CHECK_THROWS_AS(generate_fractional(3, Resolution::Full, 4), std::runtime_error);
    CHECK_THROWS_AS(generate_fractional(0, Resolution::III, 4), std::invalid_argument);
    CHECK_THROWS_AS(generate_fractional(3, Resolution::III, 6), std::invalid_argument);
}

TEST_CASE("verify_resolution on the half fraction") {
    DesignMatrix d = generate_fractional(3, Resolution::III, 4);
    CHECK(verify_resolution(d, Resolution::III));
    CHECK_FALSE(verify_resolution(d, Resolution::IV)); // A equals B*C
    CHECK(verify_resolution(full_factorial(3), Resolution::V));
    CHECK(verify_resolution(full_factorial(3), Resolution::Full));
}

TEST_CASE("verify_resolution is monotone") {
    std::mt19937_64 rng(1234);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 3 + static_cast<int>(rng() % 10);
        const int max_runs = 1 << (2 + rng() % 7);
        const Resolution target = (rng() & 1) ? Resolution::III : Resolution::IV;
        DesignMatrix d;
        try {
            d = generate_fractional(n, target, max_runs);
        } catch (const std::exception&) {
            continue;
        }
        if (verify_resolution(d, Resolution::Full)) CHECK(verify_resolution(d, Resolution::V));
        if (verify_resolution(d, Resolution::V)) CHECK(verify_resolution(d, Resolution::IV));
        if (verify_resolution(d, Resolution::IV)) CHECK(verify_resolution(d, Resolution::III));
    }
}

TEST_CASE("generation is deterministic") {
    DesignMatrix a = generate_fractional(9, Resolution::IV, 64);
    DesignMatrix b = generate_fractional(9, Resolution::IV, 64);
    CHECK(a.signs == b.signs);
    CHECK(a.generator_masks == b.generator_masks);
}

TEST_CASE("non-base columns reproduce as products of base columns") {
    for (auto [n, target, runs] : {std::tuple{7, Resolution::III, 16},
                                   std::tuple{9, Resolution::IV, 64},
                                   std::tuple{12, Resolution::III, 32}}) {
        DesignMatrix d = generate_fractional(n, target, runs);
        for (int f = d.base_count; f < d.n_factors; ++f) {
            for (int r = 0; r < d.n_runs; ++r) {
                int prod = 1;
                for (int j = 0; j < d.base_count; ++j)
                    if (d.generator_masks[f] & (1u << j)) prod *= d.sign(r, j);
                CHECK(prod == d.sign(r, f));
            }
        }
        CHECK(balanced(d));
        CHECK(orthogonal(d));
    }
}

TEST_CASE("alias structure of the half fraction pairs each main with the opposite pair") {
    DesignMatrix d = generate_fractional(3, Resolution::III, 4);
    AliasReport report = alias_structure(d, 2);
    REQUIRE(report.aliases.size() == 3);
    CHECK(report.aliases[0] == std::vector<std::vector<int>>{{1, 2}}); // A <-> BC
    CHECK(report.aliases[1] == std::vector<std::vector<int>>{{0, 2}}); // B <-> AC
    CHECK(report.aliases[2] == std::vector<std::vector<int>>{{0, 1}}); // C <-> AB
}

TEST_CASE("full factorial has empty alias lists") {
    AliasReport report = alias_structure(full_factorial(4), 2);
    for (const auto& list : report.aliases) CHECK(list.empty());
}

TEST_CASE("five factors in sixteen runs keeps mains clear at order two") {
    DesignMatrix d = generate_fractional(5, Resolution::IV, 16);
    CHECK(d.n_runs == 16);
    CHECK(d.generator_masks[4] == 0b1111); // E = ABCD
    AliasReport report = alias_structure(d, 2);
    for (const auto& list : report.aliases) CHECK(list.empty());

    // The defining word ABCDE has length five, so mains only alias with
    // fourth-order terms; order-3 lists stay empty too.
    AliasReport order3 = alias_structure(d, 3);
    for (const auto& list : order3.aliases) CHECK(list.empty());

    // A tighter IV design (7 factors in 32 runs builds F=ABCDE, G=ABC,
    // giving the length-4 word ABCG) does alias mains with third-order
    // interactions.
    DesignMatrix tight = generate_fractional(7, Resolution::IV, 32);
    AliasReport tight3 = alias_structure(tight, 3);
    bool any = false;
    for (const auto& list : tight3.aliases) any = any || !list.empty();
    CHECK(any);
}

TEST_CASE("the weight-descending greedy names the smallest workable budget") {
    // Taking the highest-order interaction first caps the 16-run IV
    // capacity at 5 factors, so 8 factors need the next budget up.
    CHECK_THROWS_WITH_AS(generate_fractional(8, Resolution::IV, 16),
                         doctest::Contains("smallest succeeding run count: 32"),
                         std::runtime_error);
}

TEST_CASE("resolution V designs have all-empty order-2 alias lists") {
    DesignMatrix d = generate_fractional(5, Resolution::V, 16);
    CHECK(verify_resolution(d, Resolution::V));
    AliasReport report = alias_structure(d, 2);
    for (const auto& list : report.aliases) CHECK(list.empty());
}

TEST_CASE("alias_structure rejects unsupported orders") {
    CHECK_THROWS_AS(alias_structure(full_factorial(3), 1), std::invalid_argument);
    CHECK_THROWS_AS(alias_structure(full_factorial(3), 4), std::invalid_argument);
}

TEST_CASE("signs_for_run covers the standard-order corners") {
    DesignMatrix d = full_factorial(2);
    CHECK(signs_for_run(d, 0) == std::vector<std::int8_t>{-1, -1});
    CHECK(signs_for_run(d, 3) == std::vector<std::int8_t>{+1, +1});
    CHECK_THROWS_AS(signs_for_run(d, 4), std::out_of_range);
    CHECK_THROWS_AS(signs_for_run(d, -1), std::out_of_range);

    DesignMatrix half = generate_fractional(3, Resolution::III, 4);
    CHECK(signs_for_run(half, 0) == std::vector<std::int8_t>{-1, -1, +1});
}

TEST_CASE("design CSV round-trips with metadata") {
    DesignMatrix d = generate_fractional(5, Resolution::IV, 16);
    std::vector<std::string> names{"alpha", "beta", "gamma", "delta", "epsilon"};
    std::stringstream buffer;
    write_design_csv(buffer, d, names);

    const std::string text = buffer.str();
    CHECK(text.find("# k: 4") != std::string::npos);
    CHECK(text.find("# generator: epsilon = alpha beta gamma delta") != std::string::npos);
    CHECK(text.find("+1") != std::string::npos);

    NamedDesign loaded = read_design_csv(buffer);
    CHECK(loaded.names == names);
    CHECK(loaded.design.signs == d.signs);
    CHECK(loaded.design.base_count == d.base_count);
    CHECK(loaded.design.generator_masks == d.generator_masks);
    CHECK(loaded.design.achieved_resolution == d.achieved_resolution);
}

TEST_CASE("design CSV import validates entries") {
    std::stringstream bad("A,B\n+1,+1\n+1,-1\n");
    CHECK_THROWS_AS(read_design_csv(bad), std::runtime_error); // unbalanced A

    std::stringstream junk("A\nmaybe\n+1\n");
    CHECK_THROWS_AS(read_design_csv(junk), std::runtime_error);
}

TEST_CASE("random fractions stay balanced and orthogonal") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 3 + static_cast<int>(rng() % 14);
        const int budget_exp = 3 + static_cast<int>(rng() % 6);
        DesignMatrix d;
        try {
            d = generate_fractional(n, Resolution::III, 1 << budget_exp);
        } catch (const std::exception&) {
            continue;
        }
        CHECK(balanced(d));
        CHECK(orthogonal(d));
        CHECK(verify_resolution(d, Resolution::III));
    }
}
