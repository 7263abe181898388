#include <doctest.h>

#include "fastmusic/linalg.hpp"
#include "fastmusic/rng.hpp"

using namespace fastmusic;

TEST_CASE("rng: identical seed gives bit-identical streams") {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) {
        CHECK(a.next_u64() == b.next_u64());
    }
    Rng c(42), d(42);
    for (int i = 0; i < 1000; ++i) {
        CHECK(c.normal() == d.normal());
    }
}

TEST_CASE("rng: below is in range and exercises the whole range") {
    Rng rng(7);
    bool saw_zero = false, saw_top = false;
    for (int i = 0; i < 2000; ++i) {
        const auto x = rng.below(5);
        CHECK(x < 5);
        saw_zero = saw_zero || x == 0;
        saw_top = saw_top || x == 4;
    }
    CHECK(saw_zero);
    CHECK(saw_top);
}

TEST_CASE("rng: sample_without_replacement is sorted, distinct, in range") {
    Rng rng(3);
    const auto idx = rng.sample_without_replacement(100, 30);
    REQUIRE(idx.size() == 30);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        CHECK(idx[i] >= 0);
        CHECK(idx[i] < 100);
        if (i > 0) CHECK(idx[i] > idx[i - 1]);
    }
    Rng rng2(5);
    const auto all = rng2.sample_without_replacement(16, 16);
    for (Index i = 0; i < 16; ++i) CHECK(all[static_cast<std::size_t>(i)] == i);
}

TEST_CASE("rng: derive separates streams") {
    CHECK(Rng::derive(1, 0) != Rng::derive(1, 1));
    CHECK(Rng::derive(1, 0) != Rng::derive(2, 0));
    CHECK(Rng::derive(1, 7) == Rng::derive(1, 7));
}

TEST_CASE("gaussian_matrix: deterministic and real-valued") {
    const CxMat a = gaussian_matrix(20, 5, 123);
    const CxMat b = gaussian_matrix(20, 5, 123);
    CHECK((a - b).norm() == 0.0);
    CHECK(a.imag().norm() == 0.0);
    const CxMat c = gaussian_matrix(20, 5, 124);
    CHECK((a - c).norm() > 0.0);
    CHECK((a.real() - gaussian_matrix_real(20, 5, 123)).norm() == 0.0);
}

TEST_CASE("gaussian_matrix: sample moments at scale") {
    const CxMat g = gaussian_matrix(2000, 100, 1);
    const double mean = g.real().mean();
    const double var = (g.real().array() - mean).square().mean();
    CHECK(std::abs(mean) < 0.05);
    CHECK(std::abs(var - 1.0) < 0.05);
}
