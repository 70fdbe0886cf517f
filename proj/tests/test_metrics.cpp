#include <doctest.h>

#include <random>

#include "lmvsc/errors.hpp"
#include "lmvsc/metrics.hpp"
#include "metrics_oracle.hpp"

using namespace lmvsc;
using namespace lmvsc::testing;

TEST_SUITE("metrics") {

TEST_CASE("worked six-sample example") {
    const std::vector<int> p{0, 0, 1, 1, 2, 2}, t{0, 0, 0, 1, 1, 1};
    const LabelVector pred(p), truth(t);
    CHECK(brute_force_accuracy(p, t) == doctest::Approx(4.0 / 6.0));
    CHECK(accuracy(pred, truth) == doctest::Approx(4.0 / 6.0).epsilon(1e-15));
    CHECK(purity(pred, truth) == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
    CHECK(std::abs(nmi(pred, truth) - direct_nmi(p, t)) <= 1e-12);
    // I = (2/3) ln 2, H(pred) = ln 3, H(truth) = ln 2.
    CHECK(nmi(pred, truth) == doctest::Approx((2.0 / 3.0) * std::log(2.0) / std::sqrt(std::log(3.0) * std::log(2.0))).epsilon(1e-12));
}

TEST_CASE("identity, relabeling, independence") {
    const LabelVector truth(std::vector<int>{0, 1, 2, 2, 1, 0, 3});
    const LabelVector relabeled(std::vector<int>{3, 0, 1, 1, 0, 3, 2});
    for (const auto& pred : {truth, relabeled}) {
        CHECK(accuracy(pred, truth) == 1.0);
        CHECK(nmi(pred, truth) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(purity(pred, truth) == 1.0);
    }
    CHECK(nmi(LabelVector(std::vector<int>{0, 1, 0, 1}), LabelVector(std::vector<int>{0, 0, 1, 1})) ==
          doctest::Approx(0.0));
}

TEST_CASE("degenerate partitions") {
    const LabelVector one(std::vector<int>(6, 0));
    const LabelVector balanced(std::vector<int>{0, 0, 1, 1, 2, 2});
    CHECK(purity(one, balanced) == doctest::Approx(1.0 / 3.0));
    CHECK(nmi(one, balanced) == 0.0);
    CHECK(nmi(one, one) == 1.0);
    // Singletons: purity 1, NMI computed from the entropies.
    const LabelVector singles(std::vector<int>{0, 1, 2, 3, 4, 5});
    CHECK(purity(singles, balanced) == 1.0);
    const double h3 = std::log(3.0), h6 = std::log(6.0);
    CHECK(nmi(singles, balanced) == doctest::Approx(h3 / std::sqrt(h3 * h6)).epsilon(1e-12));
}

TEST_CASE("length mismatch") {
    const LabelVector a(std::vector<int>{0, 1}), b(std::vector<int>{0, 1, 1});
    CHECK_THROWS_AS(accuracy(a, b), LengthMismatch);
    CHECK_THROWS_AS(nmi(a, b), LengthMismatch);
    CHECK_THROWS_AS(purity(a, b), LengthMismatch);
}

TEST_CASE("assignment solver finds the minimum-cost matching") {
    Eigen::Matrix3d cost;
    cost << 4, 1, 3, 2, 0, 5, 3, 2, 2;
    const auto match = solve_assignment(cost);
    double total = 0.0;
    for (int r = 0; r < 3; ++r) total += cost(r, match[static_cast<std::size_t>(r)]);
    CHECK(total == 5.0);
}

TEST_CASE("oracle agreement and invariants on random labelings (property)") {
    std::mt19937_64 rng(40);
    std::uniform_int_distribution<int> kdist(1, 6), ndist(1, 40);
    for (int trial = 0; trial < 300; ++trial) {
        const int kp = kdist(rng), kt = kdist(rng), n = ndist(rng);
        std::uniform_int_distribution<int> pd(0, kp - 1), td(0, kt - 1);
        std::vector<int> p(static_cast<std::size_t>(n)), t(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            p[static_cast<std::size_t>(i)] = pd(rng);
            t[static_cast<std::size_t>(i)] = td(rng);
        }
        const LabelVector pred(p, kp), truth(t, kt);
        const double acc = accuracy(pred, truth);
        CHECK(acc == doctest::Approx(brute_force_accuracy(p, t)).epsilon(1e-15));
        CHECK(std::abs(nmi(pred, truth) - direct_nmi(p, t)) <= 1e-12);
        CHECK(std::abs(purity(pred, truth) - direct_purity(p, t)) <= 1e-12);
        CHECK(acc <= purity(pred, truth) + 1e-15);

        // Relabel predictions by a random permutation of ids.
        std::vector<int> perm(static_cast<std::size_t>(kp));
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<int> q(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) q[i] = perm[static_cast<std::size_t>(p[i])];
        const LabelVector permuted(q, kp);
        CHECK(accuracy(permuted, truth) == doctest::Approx(acc).epsilon(1e-15));
        CHECK(nmi(permuted, truth) == doctest::Approx(nmi(pred, truth)).epsilon(1e-12));
        CHECK(purity(permuted, truth) == doctest::Approx(purity(pred, truth)).epsilon(1e-15));
        CHECK(nmi(truth, pred) == doctest::Approx(nmi(pred, truth)).epsilon(1e-12));
    }
}

}
