#include <gtest/gtest.h>

#include <random>

#include <lowlying/arith.hpp>
#include <lowlying/primes.hpp>

#include "oracles/density_oracle.hpp"

using namespace lowlying;

TEST(Arith, MillerRabinMatchesTrialDivision) {
    for (u64 n = 0; n < 200000; ++n) ASSERT_EQ(is_prime(n), oracle::is_prime_td(static_cast<oracle::i64>(n))) << n;
}

TEST(Arith, MillerRabinLargeInputs) {
    EXPECT_TRUE(is_prime(1000000007ULL));
    EXPECT_TRUE(is_prime(2305843009213693951ULL));  // 2^61 - 1
    EXPECT_FALSE(is_prime(3215031751ULL));          // strong pseudoprime to bases 2, 3, 5, 7
    EXPECT_FALSE(is_prime(561ULL));
    EXPECT_FALSE(is_prime(1000000007ULL * 998244353ULL));
}

TEST(Primes, SieveCounts) {
    EXPECT_EQ(primes_up_to(1).size(), 0u);
    EXPECT_EQ(primes_up_to(2).size(), 1u);
    EXPECT_EQ(primes_up_to(100000).size(), 9592u);
    EXPECT_EQ(primes_up_to(10000000).size(), 664579u);
}

TEST(Primes, SieveAgreesWithTrialDivisionAcrossSegments) {
    auto p = primes_up_to(300000);
    std::size_t k = 0;
    for (u64 n = 2; n <= 300000; ++n) {
        if (!oracle::is_prime_td(static_cast<oracle::i64>(n))) continue;
        ASSERT_LT(k, p.size());
        ASSERT_EQ(p[k++], n);
    }
    EXPECT_EQ(k, p.size());
}

TEST(Primes, TableUpto) {
    PrimeTable t(1000);
    EXPECT_EQ(t.upto(10).size(), 4u);
    EXPECT_EQ(t.upto(997).back(), 997u);
    EXPECT_EQ(t.upto(996).back(), 991u);
    EXPECT_THROW(t.upto(1001), std::out_of_range);
}

TEST(Arith, KroneckerMatchesEulerCriterion) {
    for (oracle::i64 d : {3, 4, 7, 8, 15, 20, 23, 24, 47, 71, 479, 3299, 1000003}) {
        for (u64 p : primes_up_to(2000)) {
            ASSERT_EQ(kronecker(-d, p), oracle::chi_prime(d, static_cast<oracle::i64>(p))) << d << " " << p;
        }
    }
}

TEST(Arith, KroneckerMultiplicativeInN) {
    for (i64 d : {-3, -4, -23, -56, -71}) {
        for (u64 m = 1; m < 60; ++m)
            for (u64 n = 1; n < 60; ++n) ASSERT_EQ(kronecker(d, m * n), kronecker(d, m) * kronecker(d, n));
    }
}

TEST(Arith, JacobiRejectsEvenModulus) { EXPECT_THROW(jacobi(3, 8), std::invalid_argument); }

TEST(Arith, SqrtModPrimeSquaresBack) {
    std::mt19937_64 rng(7);
    for (u64 p : primes_up_to(5000)) {
        if (p == 2) continue;
        for (int i = 0; i < 5; ++i) {
            u64 x = rng() % p;
            u64 a = mulmod(x, x, p);
            u64 r = sqrt_mod_prime(a, p);
            ASSERT_EQ(mulmod(r, r, p), a);
        }
    }
    EXPECT_THROW(sqrt_mod_prime(3, 7), std::invalid_argument);
}

TEST(Arith, XgcdBezout) {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 10000; ++i) {
        i128 a = static_cast<i64>(rng() % 2000001) - 1000000;
        i128 b = static_cast<i64>(rng() % 2000001) - 1000000;
        Xgcd g = xgcd(a, b);
        ASSERT_EQ(g.x * a + g.y * b, g.g);
        ASSERT_EQ(g.g, gcd_val(a, b));
    }
}

TEST(Arith, SquarefreeBruteForce) {
    for (u64 n = 1; n < 5000; ++n) {
        bool sf = true;
        for (u64 d = 2; d * d <= n; ++d)
            if (n % (d * d) == 0) sf = false;
        ASSERT_EQ(is_squarefree(n), sf) << n;
    }
    EXPECT_FALSE(is_squarefree(0));
}

TEST(Arith, FloorHelpers) {
    EXPECT_EQ(floor_div<i64>(-7, 2), -4);
    EXPECT_EQ(floor_div<i64>(7, 2), 3);
    EXPECT_EQ(mod_floor<i64>(-7, 5), 3);
    EXPECT_EQ(to_string(static_cast<i128>(-1234567890123LL) * 1000000), "-1234567890123000000");
}

TEST(Arith, CompensatedSumKeepsSmallTerms) {
    CompensatedSum s;
    s.add(1e16);
    for (int i = 0; i < 1000; ++i) s.add(1.0);
    s.add(-1e16);
    EXPECT_EQ(s.value(), 1000.0);
}
