#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "scarcegan/losses.hpp"
#include "scarcegan/model.hpp"
#include "support.hpp"

using namespace scarcegan;

namespace {

Matrix rows_of(std::initializer_list<std::initializer_list<double>> vals) {
    Matrix m(vals.size(), vals.begin()->size());
    std::size_t i = 0;
    for (const auto& row : vals) {
        std::size_t j = 0;
        for (double v : row) m(i, j++) = v;
        ++i;
    }
    return m;
}

const double kLn2 = std::log(2.0);
const double kLn3 = std::log(3.0);
const double kLn5 = std::log(5.0);

}  // namespace

TEST_CASE("categorical cross entropy") {
    Matrix perfect = rows_of({{1, 0, 0}, {0, 0, 1}});
    CHECK(cce(perfect, {0, 2}) == 0.0);

    Matrix uniform(3, 5, 0.2);
    CHECK(cce(uniform, {0, 3, 4}) == doctest::Approx(kLn5).epsilon(1e-12));

    Matrix two = rows_of({{0.5, 0.5}, {0.25, 0.75}});
    CHECK(cce(two, {0, 0}) == doctest::Approx((kLn2 + std::log(4.0)) / 2.0).epsilon(1e-12));

    CHECK_THROWS_AS(cce(two, {0, 2}), std::invalid_argument);
    CHECK_THROWS_AS(cce(two, {0}), std::invalid_argument);

    // zero probability clamps instead of producing infinity
    Matrix zero = rows_of({{0.0, 1.0}});
    const double clamped = cce(zero, {0});
    CHECK(std::isfinite(clamped));
    CHECK(clamped == doctest::Approx(-std::log(1e-12)));
}

TEST_CASE("soft and hard positive recall") {
    const std::size_t r = 3;
    Matrix sure(2, 5);
    sure(0, r) = 1.0;
    sure(1, r) = 1.0;
    CHECK(soft_positive_recall(sure, {true, true}, r) == doctest::Approx(1.0));

    Matrix uniform(4, 5, 0.2);
    CHECK(soft_positive_recall(uniform, {true, true, false, true}, r) == doctest::Approx(0.2));

    Matrix half = rows_of({{0.05, 0.025, 0.025, 0.9, 0.0}, {0.3, 0.3, 0.2, 0.1, 0.1}});
    CHECK(soft_positive_recall(half, {true, true}, r) == doctest::Approx(0.5));
    CHECK(hard_recall(half, {true, true}, r) == doctest::Approx(0.5));

    CHECK_THROWS_AS(soft_positive_recall(half, {false, false}, r), std::invalid_argument);
}

TEST_CASE("supervised positive loss combines penalty and reward") {
    const std::size_t r = 3;
    Matrix perfect(2, 5);
    perfect(0, r) = 1.0;
    perfect(1, r) = 1.0;
    CHECK(loss_sup_positive(perfect, {true, true}, r, 1.0).value == doctest::Approx(-1.0));
    CHECK(loss_sup_positive(perfect, {true, true}, r, 0.5).value == doctest::Approx(-0.5));

    Matrix uniform(2, 5, 0.2);
    CHECK(loss_sup_positive(uniform, {true, true}, r, 1.0).value ==
          doctest::Approx(kLn5 - 0.2).epsilon(1e-12));

    // reward weight zero reduces exactly to cce on the positive rows
    Matrix mixed = rows_of({{0.1, 0.1, 0.1, 0.6, 0.1}, {0.2, 0.2, 0.2, 0.3, 0.1}});
    const double plain = cce(mixed, {r, r});
    CHECK(loss_sup_positive(mixed, {true, true}, r, 0.0).value == doctest::Approx(plain));
}

TEST_CASE("supervised negative loss with leeway") {
    const ClassLayout layout = ClassLayout::full();

    SUBCASE("alpha = 1 equals plain cce to machine precision") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> d(0.01, 1.0);
        Matrix p(6, 5);
        for (std::size_t i = 0; i < p.rows; ++i) {
            double s = 0;
            for (std::size_t j = 0; j < p.cols; ++j) {
                p(i, j) = d(rng);
                s += p(i, j);
            }
            for (std::size_t j = 0; j < p.cols; ++j) p(i, j) /= s;
        }
        std::vector<std::size_t> labels = {0, 1, 2, 0, 1, 2};
        const double with_leeway = loss_sup_negative(p, labels, layout, {1.0}).value;
        CHECK(std::abs(with_leeway - cce(p, labels)) <= 1e-12);
    }

    SUBCASE("alpha = 0.5 on a half-true half-unknown prediction") {
        Matrix p = rows_of({{0.5, 0.0, 0.0, 0.0, 0.5}});
        const double v = loss_sup_negative(p, {0}, layout, {0.5}).value;
        CHECK(v == doctest::Approx(kLn2).epsilon(1e-12));
    }

    SUBCASE("uniform predictions cost ln 5 regardless of alpha") {
        Matrix p(3, 5, 0.2);
        for (double a : {0.0, 0.3, 0.65, 1.0}) {
            CHECK(loss_sup_negative(p, {0, 1, 2}, layout, {a}).value ==
                  doctest::Approx(kLn5).epsilon(1e-12));
        }
    }

    SUBCASE("positive or unknown labels are rejected") {
        Matrix p(1, 5, 0.2);
        CHECK_THROWS_WITH_AS(loss_sup_negative(p, {3}, layout, {0.65}).value,
                             doctest::Contains("R"), std::invalid_argument);
        CHECK_THROWS_AS(loss_sup_negative(p, {4}, layout, {0.65}), std::invalid_argument);
    }

    SUBCASE("the minimizer splits mass alpha / 1-alpha between truth and U") {
        // closed form: p_true = alpha, p_U = 1 - alpha; verify it beats sampled
        // alternatives on the simplex
        const double alpha = 0.65;
        Matrix best = rows_of({{alpha, 0, 0, 0, 1 - alpha}});
        const double v_best = loss_sup_negative(best, {0}, layout, {alpha}).value;
        std::mt19937_64 rng(17);
        std::gamma_distribution<double> g(1.0, 1.0);
        for (int it = 0; it < 2000; ++it) {
            Matrix p(1, 5);
            double s = 0;
            for (std::size_t j = 0; j < 5; ++j) {
                p(0, j) = g(rng);
                s += p(0, j);
            }
            for (std::size_t j = 0; j < 5; ++j) p(0, j) /= s;
            CHECK(loss_sup_negative(p, {0}, layout, {alpha}).value >= v_best - 1e-9);
        }
        // the minimizer's U mass grows as alpha shrinks
        double prev_u = -1.0;
        for (double a : {1.0, 0.8, 0.65, 0.4, 0.1}) {
            const double u_mass = 1.0 - a;
            CHECK(u_mass >= prev_u);
            prev_u = u_mass;
        }
    }
}

TEST_CASE("unsupervised losses") {
    SUBCASE("real loss with all mass on K pays the clamped U term") {
        Matrix p = rows_of({{1.0, 0.0, 0.0}});
        const double v = loss_unsup_real(p, {0.7}).value;
        CHECK(v == doctest::Approx(0.3 * -std::log(1e-12)).epsilon(1e-9));
        CHECK(v == doctest::Approx(8.2893).epsilon(1e-4));
    }

    SUBCASE("the alpha split is the minimizing allocation") {
        Matrix p = rows_of({{0.7, 0.3, 0.0}});
        const double v = loss_unsup_real(p, {0.7}).value;
        CHECK(v == doctest::Approx(0.7 * std::log(1.0 / 0.7) + 0.3 * std::log(1.0 / 0.3))
                       .epsilon(1e-12));
        CHECK(v == doctest::Approx(0.610864302055).epsilon(1e-9));
    }

    SUBCASE("uniform K/U/F costs ln 3 for any alpha") {
        Matrix p(4, 3, 1.0 / 3.0);
        for (double a : {0.0, 0.5, 1.0}) {
            CHECK(loss_unsup_real(p, {a}).value == doctest::Approx(kLn3).epsilon(1e-12));
        }
    }

    SUBCASE("fake loss examples") {
        Matrix all_f = rows_of({{0, 0, 1}, {0, 0, 1}});
        CHECK(loss_unsup_fake(all_f).value == 0.0);
        Matrix uniform(2, 3, 1.0 / 3.0);
        CHECK(loss_unsup_fake(uniform).value == doctest::Approx(kLn3).epsilon(1e-12));
        Matrix half = rows_of({{0.25, 0.25, 0.5}, {0.5, 0.0, 0.5}});
        CHECK(loss_unsup_fake(half).value == doctest::Approx(kLn2).epsilon(1e-12));
    }

    SUBCASE("total is the exact midpoint") {
        CHECK(loss_unsup_total(0.0, 0.0) == 0.0);
        CHECK(loss_unsup_total(kLn3, kLn3) == kLn3);
        CHECK(loss_unsup_total(0.4, 0.6) == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(loss_unsup_total(0.4, 0.6) == 0.5 * (0.4 + 0.6));
    }
}

TEST_CASE("pull-away term") {
    Matrix ortho = rows_of({{1, 0, 0}, {0, 2, 0}, {0, 0, 3}});
    CHECK(gen_pull_away(ortho).value == doctest::Approx(0.0));

    Matrix same = rows_of({{1, 2}, {1, 2}, {1, 2}});
    CHECK(gen_pull_away(same).value == doctest::Approx(1.0));

    Matrix pair = rows_of({{1, 0}, {1, 1}});
    CHECK(gen_pull_away(pair).value == doctest::Approx(0.5).epsilon(1e-12));

    SUBCASE("zero rows are excluded and reported") {
        Matrix with_zero = rows_of({{1, 0}, {0, 0}, {0, 1}});
        std::size_t skipped = 0;
        const LossGrad lg = gen_pull_away(with_zero, &skipped);
        CHECK(skipped == 1);
        CHECK(lg.value == doctest::Approx(0.0));
        for (std::size_t j = 0; j < 2; ++j) CHECK(lg.grad(1, j) == 0.0);
    }

    SUBCASE("fewer than two usable rows is an error") {
        Matrix one = rows_of({{1, 1}, {0, 0}});
        CHECK_THROWS_AS(gen_pull_away(one), std::invalid_argument);
    }

    SUBCASE("stays in [0, 1] on random batches") {
        std::mt19937_64 rng(23);
        std::normal_distribution<double> d;
        for (int it = 0; it < 50; ++it) {
            Matrix f(6, 4);
            for (double& v : f.data) v = d(rng);
            const double v = gen_pull_away(f).value;
            CHECK(v >= 0.0);
            CHECK(v <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("low-density term") {
    GenLossConfig cfg;  // epsilon = 0.75

    Matrix timid(3, 5, 0.2);  // max 0.2 < 0.75
    CHECK(gen_low_density(timid, cfg).value == 0.0);

    Matrix confident = rows_of({{0.9, 0.025, 0.025, 0.025, 0.025}});
    CHECK(gen_low_density(confident, cfg).value == doctest::Approx(std::log(0.9)).epsilon(1e-12));
    CHECK(gen_low_density(confident, cfg).value == doctest::Approx(-0.10536).epsilon(1e-4));

    Matrix at_threshold = rows_of({{0.75, 0.1, 0.05, 0.05, 0.05}});
    CHECK(gen_low_density(at_threshold, cfg).value == 0.0);  // strict inequality

    SUBCASE("gradient pushes confident rows down under minimization") {
        const LossGrad lg = gen_low_density(confident, cfg);
        // positive gradient on the max entry: descent decreases the confidence
        CHECK(lg.grad(0, 0) > 0.0);
    }
}

TEST_CASE("feature matching") {
    Matrix a = rows_of({{1, 2}, {3, 4}});
    CHECK(gen_feature_matching(a, a).value == 0.0);

    Matrix b = rows_of({{2, 2}, {4, 4}});  // means differ by (1, 0)
    CHECK(gen_feature_matching(b, a).value == doctest::Approx(1.0).epsilon(1e-12));

    Matrix f1 = rows_of({{1, 2}, {1, 2}});
    Matrix f2 = rows_of({{4, 6}, {4, 6}});
    CHECK(gen_feature_matching(f1, f2).value == doctest::Approx(25.0).epsilon(1e-12));
    CHECK(gen_feature_matching(f2, f1).value == doctest::Approx(25.0).epsilon(1e-12));

    Matrix wrong(2, 3);
    CHECK_THROWS_AS(gen_feature_matching(a, wrong), std::invalid_argument);
}

TEST_CASE("generator total loss is a weighted sum") {
    GenLossConfig cfg;
    CHECK(gen_total_loss(0, 0, 0, cfg) == 0.0);
    CHECK(gen_total_loss(0.5, 0.2, 25.0, cfg) == doctest::Approx(25.7).epsilon(1e-12));
    cfg.low_density_weight = 0.0;
    CHECK(gen_total_loss(0.5, 123.0, 25.0, cfg) == doctest::Approx(25.5).epsilon(1e-12));
    cfg.entropy_weight = 0.0;
    cfg.feature_matching_weight = 0.0;
    CHECK(gen_total_loss(0.5, 123.0, 25.0, cfg) == 0.0);
}

// ---------------------------------------------------------------------------
// finite-difference oracle over small networks

namespace {

struct DiscRig {
    Discriminator disc;
    Matrix x;
    std::vector<std::size_t> neg_labels;
    std::vector<bool> pos_mask;

    DiscRig(std::uint64_t seed, std::size_t rows = 5, std::size_t in = 4)
        : disc(in, {8}, ClassLayout::full(), 0), x(rows, in) {
        std::mt19937_64 rng(seed);
        disc.init(rng);
        std::normal_distribution<double> d;
        for (double& v : x.data) v = d(rng);
        for (std::size_t i = 0; i < rows; ++i) pos_mask.push_back(i % 2 == 0);
        neg_labels = {0, 1, 2, 0, 1};
    }
};

// margin filter: keep finite differences away from activation kinks
bool disc_preact_safe(Discriminator& disc, double margin = 1e-3) {
    for (const DenseLayer& l : disc.base())
        for (double z : l.cached_preactivation().data)
            if (std::abs(z) < margin) return false;
    return true;
}

}  // namespace

TEST_CASE("finite differences confirm the supervised loss gradients") {
    int checked = 0;
    for (std::uint64_t seed = 100; checked < 5 && seed < 200; ++seed) {
        DiscRig rig(seed);
        auto params = rig.disc.params();
        bool safe = true;
        auto eval = [&]() {
            rig.disc.zero_grad();
            DiscOutput out = rig.disc.forward(rig.x, Head::Supervised);
            if (!disc_preact_safe(rig.disc)) safe = false;
            LossGrad lp = loss_sup_positive(out.sup, rig.pos_mask, 3, 1.0);
            std::vector<std::size_t> neg_rows;
            std::vector<std::size_t> labels;
            for (std::size_t i = 0; i < rig.pos_mask.size(); ++i) {
                if (!rig.pos_mask[i]) {
                    neg_rows.push_back(i);
                    labels.push_back(rig.neg_labels[i]);
                }
            }
            LossGrad ln = loss_sup_negative(take_rows(out.sup, neg_rows), labels,
                                            rig.disc.layout(), {0.65});
            Matrix grad = lp.grad;
            for (std::size_t k = 0; k < neg_rows.size(); ++k)
                for (std::size_t j = 0; j < grad.cols; ++j)
                    grad(neg_rows[k], j) += ln.grad(k, j);
            rig.disc.backward(grad, std::nullopt);
            return lp.value + ln.value;
        };
        eval();
        if (!safe) continue;
        const auto res = testsupport::fd_check(params, eval);
        INFO("seed ", seed, " worst ", res.worst);
        CHECK(res.max_rel <= 1e-4);
        ++checked;
    }
    CHECK(checked == 5);
}

TEST_CASE("finite differences confirm the unsupervised loss gradients") {
    int checked = 0;
    for (std::uint64_t seed = 300; checked < 5 && seed < 400; ++seed) {
        DiscRig rig(seed);
        auto params = rig.disc.params();
        bool safe = true;
        auto eval = [&]() {
            rig.disc.zero_grad();
            DiscOutput out = rig.disc.forward(rig.x, Head::Unsupervised);
            if (!disc_preact_safe(rig.disc)) safe = false;
            LossGrad real = loss_unsup_real(out.unsup, {0.65});
            LossGrad fake = loss_unsup_fake(out.unsup);
            // combined as the averaged unsupervised objective
            Matrix grad = real.grad;
            scale_inplace(grad, 0.5);
            Matrix fg = fake.grad;
            scale_inplace(fg, 0.5);
            add_inplace(grad, fg);
            rig.disc.backward(std::nullopt, grad);
            return loss_unsup_total(real.value, fake.value);
        };
        eval();
        if (!safe) continue;
        const auto res = testsupport::fd_check(params, eval);
        INFO("seed ", seed, " worst ", res.worst);
        CHECK(res.max_rel <= 1e-4);
        ++checked;
    }
    CHECK(checked == 5);
}

TEST_CASE("finite differences confirm the generator objective gradients") {
    int checked = 0;
    for (std::uint64_t seed = 500; checked < 5 && seed < 700; ++seed) {
        std::mt19937_64 rng(seed);
        Discriminator disc(4, {8}, ClassLayout::full(), 0);
        disc.init(rng);
        Generator gen(3, 8, 4);
        gen.init(rng);
        Matrix z(5, 3), x_real(5, 4);
        std::normal_distribution<double> d;
        for (double& v : z.data) v = d(rng);
        for (double& v : x_real.data) v = d(rng);
        GenLossConfig cfg;
        cfg.epsilon = 0.2;  // with 5 classes a fresh head rarely clears 0.75

        auto params = gen.params();
        bool safe = true;
        auto eval = [&]() {
            gen.zero_grad();
            Matrix f_real = disc.forward(x_real, Head::Supervised, /*cache=*/false).features;
            Matrix xg = gen.forward(z, /*train=*/true);
            // relu and leaky-relu kinks poison central differences
            for (double v : gen.fc1().cached_preactivation().data)
                if (std::abs(v) < 1e-3) safe = false;
            for (double v : gen.fc2().cached_preactivation().data)
                if (std::abs(v) < 1e-3) safe = false;
            DiscOutput out = disc.forward(xg, Head::Supervised);
            if (!disc_preact_safe(disc)) safe = false;
            // indicator and argmax switches need a margin too
            for (std::size_t i = 0; i < out.sup.rows; ++i) {
                double top = 0, second = 0;
                for (std::size_t j = 0; j < out.sup.cols; ++j) {
                    const double p = out.sup(i, j);
                    if (p > top) {
                        second = top;
                        top = p;
                    } else if (p > second) {
                        second = p;
                    }
                }
                if (std::abs(top - cfg.epsilon) < 1e-3 || top - second < 1e-3) safe = false;
            }
            LossGrad pt = gen_pull_away(out.features);
            LossGrad ld = gen_low_density(out.sup, cfg);
            LossGrad fm = gen_feature_matching(out.features, f_real);
            Matrix head_grad = ld.grad;
            scale_inplace(head_grad, cfg.low_density_weight);
            Matrix tap_grad = pt.grad;
            scale_inplace(tap_grad, cfg.entropy_weight);
            Matrix fmg = fm.grad;
            scale_inplace(fmg, cfg.feature_matching_weight);
            add_inplace(tap_grad, fmg);
            disc.zero_grad();
            Matrix input_grad = disc.backward(head_grad, std::nullopt, tap_grad);
            gen.backward(input_grad);
            return gen_total_loss(pt.value, ld.value, fm.value, cfg);
        };
        eval();
        if (!safe) continue;
        const auto res = testsupport::fd_check(params, eval);
        INFO("seed ", seed, " worst ", res.worst);
        CHECK(res.max_rel <= 1e-4);
        ++checked;
    }
    CHECK(checked == 5);
}
