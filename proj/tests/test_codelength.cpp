#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "mdlregion/codelength.hpp"

using namespace mdlregion;
using boost::multiprecision::cpp_bin_float_50;
using boost::multiprecision::cpp_int;

namespace {

double exact_log2(const cpp_int& v) {
    const cpp_bin_float_50 x(v);
    return static_cast<double>(log(x) / log(cpp_bin_float_50(2)));
}

cpp_int factorial_int(std::int64_t n) {
    cpp_int f = 1;
    for (std::int64_t i = 2; i <= n; ++i) f *= i;
    return f;
}

cpp_int binomial_int(std::int64_t n, std::int64_t k) {
    return factorial_int(n) / (factorial_int(k) * factorial_int(n - k));
}

}  // namespace

TEST_CASE("log_factorial matches exact bignum factorials") {
    for (std::int64_t n = 0; n <= 20; ++n)
        REQUIRE_THAT(log_factorial(n),
                     Catch::Matchers::WithinAbs(exact_log2(factorial_int(n)), 1e-12));
    for (std::int64_t n : {21, 35, 64, 100, 257, 1000, 5000})
        REQUIRE_THAT(log_factorial(n),
                     Catch::Matchers::WithinRel(exact_log2(factorial_int(n)), 1e-12));
    REQUIRE(log_factorial(0) == 0.0);
    REQUIRE(log_factorial(1) == 0.0);
    REQUIRE_THROWS_AS(log_factorial(-1), std::invalid_argument);
}

TEST_CASE("log_binomial matches exact bignum binomials") {
    for (std::int64_t n : {1, 2, 7, 20, 21, 50, 99, 200, 999}) {
        for (std::int64_t k : {std::int64_t(0), std::int64_t(1), n / 3, n / 2, n - 1, n}) {
            const double want = exact_log2(binomial_int(n, k));
            if (want == 0.0)
                REQUIRE_THAT(log_binomial(n, k), Catch::Matchers::WithinAbs(0.0, 1e-10));
            else
                REQUIRE_THAT(log_binomial(n, k), Catch::Matchers::WithinRel(want, 1e-11));
        }
    }
    REQUIRE(log_binomial(10, 0) == 0.0);
    REQUIRE_THROWS_AS(log_binomial(3, 4), std::invalid_argument);
    REQUIRE_THROWS_AS(log_binomial(3, -1), std::invalid_argument);
}

TEST_CASE("log_multiset is the stars-and-bars binomial") {
    for (std::int64_t n : {1, 2, 4, 16}) {
        for (std::int64_t k : {0, 1, 5, 40}) {
            REQUIRE(log_multiset(n, k) == log_binomial(n + k - 1, k));
            REQUIRE_THAT(log_multiset(n, k),
                         Catch::Matchers::WithinAbs(exact_log2(binomial_int(n + k - 1, k)), 1e-9));
        }
    }
    REQUIRE(log_multiset(1, 7) == 0.0);
    REQUIRE_THROWS_AS(log_multiset(0, 3), std::invalid_argument);
}

TEST_CASE("partition_cost adds the cut-choice term to the tree term") {
    REQUIRE(partition_cost(100, 1, 12.5) == 12.5);
    REQUIRE_THAT(partition_cost(100, 5, 0.0),
                 Catch::Matchers::WithinRel(exact_log2(binomial_int(99, 4)), 1e-12));
    REQUIRE_THAT(partition_cost(10, 10, 3.0),
                 Catch::Matchers::WithinAbs(3.0 + exact_log2(binomial_int(9, 9)), 1e-12));
    REQUIRE_THROWS_AS(partition_cost(10, 11, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(partition_cost(10, 0, 0.0), std::invalid_argument);
}

TEST_CASE("driver_cost is D*T*log2(S)") {
    REQUIRE(driver_cost(5, 51, 4) == 5.0 * 51.0 * 2.0);
    REQUIRE(driver_cost(1, 10, 2) == 10.0);
    REQUIRE(driver_cost(3, 7, 1) == 0.0);
    REQUIRE_THAT(driver_cost(2, 3, 5), Catch::Matchers::WithinRel(6.0 * std::log2(5.0), 1e-15));
    REQUIRE_THROWS_AS(driver_cost(0, 1, 2), std::invalid_argument);
}

TEST_CASE("table_cost sums per-row multiset coefficients") {
    // marginals (3, 2), cluster of 2, S=2: multiset(2,6) + multiset(2,4) = C(7,6)*C(5,4)
    const std::vector<std::int64_t> marg = {3, 2};
    REQUIRE_THAT(table_cost(marg, 2, 2),
                 Catch::Matchers::WithinRel(std::log2(7.0) + std::log2(5.0), 1e-12));
    const std::vector<std::int64_t> zero = {0, 0, 0};
    REQUIRE(table_cost(zero, 1, 3) == 0.0);
    const std::vector<std::int64_t> neg = {1, -1};
    REQUIRE_THROWS_AS(table_cost(neg, 1, 2), std::invalid_argument);
    REQUIRE_THROWS_AS(table_cost(marg, 0, 2), std::invalid_argument);
}

TEST_CASE("member_cost sums per-row log multinomials") {
    // rows (2,1) and (0,3): log2(3!/2!1!) + log2(3!/3!) = log2 3
    const std::vector<std::int64_t> table = {2, 1, 0, 3};
    REQUIRE_THAT(member_cost(table, 2), Catch::Matchers::WithinRel(std::log2(3.0), 1e-12));
    // row sums 4 split (1,1,1,1) over S=4: log2(4!) = log2 24
    const std::vector<std::int64_t> flat = {1, 1, 1, 1,  0, 0, 0, 0,
                                            0, 0, 0, 0,  0, 0, 0, 0};
    REQUIRE_THAT(member_cost(flat, 4), Catch::Matchers::WithinRel(std::log2(24.0), 1e-12));
    const std::vector<std::int64_t> diag = {5, 0, 0, 5};
    REQUIRE(member_cost(diag, 2) == 0.0);
}

TEST_CASE("member_cost against a bignum multinomial oracle") {
    std::mt19937_64 rng(7);
    for (int rep = 0; rep < 20; ++rep) {
        const std::int64_t s = 2 + static_cast<std::int64_t>(rng() % 5);
        std::vector<std::int64_t> table(s * s);
        for (auto& c : table) c = static_cast<std::int64_t>(rng() % 30);
        cpp_int ways = 1;
        for (std::int64_t r = 0; r < s; ++r) {
            std::int64_t row_sum = 0;
            for (std::int64_t j = 0; j < s; ++j) row_sum += table[r * s + j];
            cpp_int w = factorial_int(row_sum);
            for (std::int64_t j = 0; j < s; ++j) w /= factorial_int(table[r * s + j]);
            ways *= w;
        }
        REQUIRE_THAT(member_cost(table, s),
                     Catch::Matchers::WithinAbs(exact_log2(ways), 1e-7));
    }
}

TEST_CASE("breakdown components sum to the total") {
    CodelengthBreakdown bd;
    bd.spanning_tree_bits = 1.5;
    bd.partition_choice_bits = 2.25;
    bd.driver_bits = 10.0;
    bd.table_bits = 4.5;
    bd.member_bits = 0.75;
    REQUIRE(bd.components_sum() == 19.0);
    bd.total_bits = bd.components_sum();
    REQUIRE(bd.total_bits == 19.0);
}
