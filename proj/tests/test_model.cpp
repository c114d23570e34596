#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "scarcegan/model.hpp"

using namespace scarcegan;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d;
    Matrix m(r, c);
    for (double& v : m.data) v = d(rng);
    return m;
}

}  // namespace

TEST_CASE("discriminator forward produces row-stochastic heads and shared features") {
    std::mt19937_64 rng(42);
    Discriminator disc(6, {16, 8}, ClassLayout::full(), 1);
    disc.init(rng);
    Matrix x = random_matrix(7, 6, 1);

    DiscOutput both = disc.forward(x, Head::Both);
    CHECK(both.sup.rows == 7);
    CHECK(both.sup.cols == 5);
    CHECK(both.unsup.cols == 3);
    CHECK(both.features.cols == 8);
    for (std::size_t i = 0; i < both.sup.rows; ++i) {
        double s = 0, u = 0;
        for (std::size_t j = 0; j < 5; ++j) s += both.sup(i, j);
        for (std::size_t j = 0; j < 3; ++j) u += both.unsup(i, j);
        CHECK(std::abs(s - 1.0) <= 1e-9);
        CHECK(std::abs(u - 1.0) <= 1e-9);
    }

    // the same input through either head alone yields the same f(x)
    DiscOutput sup_only = disc.forward(x, Head::Supervised);
    DiscOutput unsup_only = disc.forward(x, Head::Unsupervised);
    CHECK(max_abs_diff(sup_only.features, unsup_only.features) == 0.0);
    CHECK(max_abs_diff(sup_only.features, both.features) == 0.0);
    CHECK(max_abs_diff(sup_only.sup, both.sup) == 0.0);

    Matrix wrong = random_matrix(2, 5, 2);
    CHECK_THROWS_AS(disc.forward(wrong, Head::Both), std::invalid_argument);
}

TEST_CASE("fresh discriminators replay bitwise under a fixed seed") {
    Matrix x = random_matrix(3, 6, 9);
    Matrix first, second;
    for (int rep = 0; rep < 2; ++rep) {
        std::mt19937_64 rng(2024);
        Discriminator disc(6, {16, 8}, ClassLayout::full(), 1);
        disc.init(rng);
        Matrix out = disc.forward(x, Head::Both).sup;
        if (rep == 0) first = out; else second = out;
    }
    CHECK(first.data == second.data);
}

TEST_CASE("shared-base coupling") {
    std::mt19937_64 rng(5);
    Discriminator disc(4, {8, 8}, ClassLayout::full(), 1);
    disc.init(rng);
    Matrix x = random_matrix(3, 4, 11);

    DiscOutput before = disc.forward(x, Head::Both);

    SUBCASE("perturbing a base weight moves both heads") {
        disc.base()[0].weights(0, 0) += 0.25;
        DiscOutput after = disc.forward(x, Head::Both);
        CHECK(max_abs_diff(before.sup, after.sup) > 0.0);
        CHECK(max_abs_diff(before.unsup, after.unsup) > 0.0);
    }

    SUBCASE("perturbing a head weight moves only that head") {
        disc.sup_head().weights(0, 0) += 0.25;
        DiscOutput after = disc.forward(x, Head::Both);
        CHECK(max_abs_diff(before.sup, after.sup) > 0.0);
        CHECK(max_abs_diff(before.unsup, after.unsup) == 0.0);
        CHECK(max_abs_diff(before.features, after.features) == 0.0);
    }
}

TEST_CASE("tap index must address a base layer") {
    CHECK_THROWS_AS(Discriminator(4, {8, 8}, ClassLayout::full(), 2), std::invalid_argument);
}

TEST_CASE("generator forward") {
    std::mt19937_64 rng(7);
    Generator gen(5, 12, 9);
    gen.init(rng);

    SUBCASE("relu output is non-negative") {
        Matrix z = random_matrix(16, 5, 3);
        Matrix out = gen.forward(z, /*train=*/true);
        CHECK(out.rows == 16);
        CHECK(out.cols == 9);
        for (double v : out.data) CHECK(v >= 0.0);
    }

    SUBCASE("zero noise in inference mode yields identical rows") {
        // accumulate some running statistics first
        for (int i = 0; i < 20; ++i) gen.forward(random_matrix(8, 5, 100 + i), true);
        Matrix z = Matrix::zeros(4, 5);
        Matrix out = gen.forward(z, /*train=*/false, /*cache=*/false);
        for (std::size_t i = 1; i < out.rows; ++i)
            for (std::size_t j = 0; j < out.cols; ++j)
                CHECK(out(i, j) == doctest::Approx(out(0, j)).epsilon(1e-15));
    }

    SUBCASE("same seed produces the same samples") {
        std::mt19937_64 a(31), b(31);
        Generator g1(5, 12, 9), g2(5, 12, 9);
        g1.init(a);
        g2.init(b);
        Matrix z = random_matrix(6, 5, 4);
        CHECK(g1.forward(z, true).data == g2.forward(z, true).data);
    }

    SUBCASE("noise width mismatch is rejected") {
        Matrix bad = random_matrix(2, 4, 5);
        CHECK_THROWS_AS(gen.forward(bad, true), std::invalid_argument);
    }
}

TEST_CASE("noise sampling moments and determinism") {
    NoiseSpec spec{4, 123};
    Matrix z = sample_noise(10000, spec);
    CHECK(z.rows == 10000);
    CHECK(z.cols == 4);
    for (std::size_t j = 0; j < 4; ++j) {
        double mean = 0, var = 0;
        for (std::size_t i = 0; i < z.rows; ++i) mean += z(i, j);
        mean /= static_cast<double>(z.rows);
        for (std::size_t i = 0; i < z.rows; ++i) {
            const double d = z(i, j) - mean;
            var += d * d;
        }
        var /= static_cast<double>(z.rows);
        CHECK(std::abs(mean) <= 0.05);
        CHECK(var >= 0.9);
        CHECK(var <= 1.1);
    }
    Matrix z2 = sample_noise(10000, spec);
    CHECK(z.data == z2.data);
    Matrix z3 = sample_noise(10000, NoiseSpec{4, 124});
    CHECK(z.data != z3.data);
    CHECK_THROWS_AS(sample_noise(0, spec), std::invalid_argument);
}

TEST_CASE("class layout indices") {
    ClassLayout full = ClassLayout::full();
    CHECK(full.size() == 5);
    CHECK(full.negative_count() == 3);
    CHECK(full.positive_index() == 3);
    CHECK(full.unknown_index() == 4);
    CHECK(full.is_negative(2));
    CHECK(!full.is_negative(3));

    ClassLayout two = ClassLayout::two_class();
    CHECK(two.size() == 3);
    CHECK(two.positive_index() == 1);
    CHECK(two.unknown_index() == 2);
}
