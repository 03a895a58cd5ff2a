#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mcc/metrics.hpp"
#include "mcc/rng.hpp"

using namespace mcc;

namespace {

// All k! one-to-one relabelings, k <= 6.
double acc_brute_force(const LabelVector& pred, const LabelVector& truth) {
    int k = 0;
    for (int l : pred) k = std::max(k, l + 1);
    for (int l : truth) k = std::max(k, l + 1);
    std::vector<int> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    long best = 0;
    do {
        long matched = 0;
        for (std::size_t i = 0; i < pred.size(); ++i) {
            if (perm[pred[i]] == truth[i]) ++matched;
        }
        best = std::max(best, matched);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return static_cast<double>(best) / static_cast<double>(pred.size());
}

// Pair counts gathered by explicit O(n^2) iteration.
double ari_pair_counting(const LabelVector& pred, const LabelVector& truth) {
    const std::size_t n = pred.size();
    double same_both = 0, same_pred = 0, same_true = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            bool sp = pred[i] == pred[j];
            bool st = truth[i] == truth[j];
            same_pred += sp;
            same_true += st;
            same_both += sp && st;
        }
    }
    double total = static_cast<double>(n) * (n - 1) / 2.0;
    double expected = same_pred * same_true / total;
    double maximum = 0.5 * (same_pred + same_true);
    if (same_both == maximum && maximum == expected) return 1.0;
    return (same_both - expected) / (maximum - expected);
}

LabelVector random_labels(std::size_t n, int k, Rng& rng) {
    LabelVector l(n);
    for (int& x : l) x = static_cast<int>(rng.uniform_index(k));
    return l;
}

}  // namespace

TEST_CASE("accuracy trivial cases") {
    LabelVector t = {0, 1, 2, 0, 1, 2};
    CHECK(clustering_accuracy(t, t) == 1.0);

    LabelVector permuted = {2, 0, 1, 2, 0, 1};  // fixed permutation of t
    CHECK(clustering_accuracy(permuted, t) == 1.0);

    LabelVector shorter = {0, 1};
    CHECK_THROWS_AS(clustering_accuracy(shorter, t), LengthMismatch);
}

TEST_CASE("accuracy equals factorial brute force") {
    Rng rng(301);
    for (int t = 0; t < 80; ++t) {
        int k = 2 + static_cast<int>(rng.uniform_index(5));
        std::size_t n = 2 + rng.uniform_index(49);
        LabelVector pred = random_labels(n, k, rng);
        LabelVector truth = random_labels(n, k, rng);
        CHECK(clustering_accuracy(pred, truth) ==
              doctest::Approx(acc_brute_force(pred, truth)).epsilon(1e-12));
    }
}

TEST_CASE("accuracy handles unequal cluster and class counts") {
    // 4 predicted clusters vs 2 true classes and vice versa.
    LabelVector pred = {0, 1, 2, 3, 0, 1};
    LabelVector truth = {0, 0, 1, 1, 0, 0};
    CHECK(clustering_accuracy(pred, truth) ==
          doctest::Approx(acc_brute_force(pred, truth)).epsilon(1e-12));
    CHECK(clustering_accuracy(truth, pred) ==
          doctest::Approx(acc_brute_force(truth, pred)).epsilon(1e-12));
}

TEST_CASE("accuracy respects the pigeonhole floor on balanced inputs") {
    Rng rng(307);
    for (int t = 0; t < 20; ++t) {
        int k = 2 + static_cast<int>(rng.uniform_index(4));
        int per = 12;
        LabelVector truth, pred;
        for (int c = 0; c < k; ++c) {
            for (int i = 0; i < per; ++i) truth.push_back(c);
        }
        pred = random_labels(truth.size(), k, rng);
        CHECK(clustering_accuracy(pred, truth) >= 1.0 / k - 1e-12);
    }
}

TEST_CASE("nmi cases") {
    LabelVector t = {0, 1, 0, 1, 2, 2};
    CHECK(nmi(t, t) == doctest::Approx(1.0).epsilon(1e-12));

    // Exact product contingency: zero mutual information.
    LabelVector pred = {0, 0, 1, 1};
    LabelVector truth = {0, 1, 0, 1};
    CHECK(nmi(pred, truth) == doctest::Approx(0.0).epsilon(1e-12));

    // Degenerate marginal: single predicted cluster.
    LabelVector ones(6, 0);
    CHECK(nmi(ones, t) == 0.0);
}

TEST_CASE("nmi hand contingency [[5,1],[1,5]]") {
    LabelVector pred, truth;
    for (int i = 0; i < 5; ++i) { pred.push_back(0); truth.push_back(0); }
    pred.push_back(0); truth.push_back(1);
    pred.push_back(1); truth.push_back(0);
    for (int i = 0; i < 5; ++i) { pred.push_back(1); truth.push_back(1); }

    double mi = (5.0 / 6.0) * std::log(5.0 / 3.0) + (1.0 / 6.0) * std::log(1.0 / 3.0);
    double expect = mi / std::log(2.0);
    CHECK(nmi(pred, truth) == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("ari cases") {
    LabelVector t = {0, 0, 1, 1, 2, 2};
    CHECK(ari(t, t) == 1.0);

    LabelVector single(8, 0);
    LabelVector balanced = {0, 0, 0, 0, 1, 1, 1, 1};
    CHECK(ari(single, balanced) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("ari equals pair counting") {
    Rng rng(311);
    for (int t = 0; t < 40; ++t) {
        int k = 2 + static_cast<int>(rng.uniform_index(5));
        std::size_t n = 2 + rng.uniform_index(99);
        LabelVector pred = random_labels(n, k, rng);
        LabelVector truth = random_labels(n, k, rng);
        CHECK(ari(pred, truth) ==
              doctest::Approx(ari_pair_counting(pred, truth)).epsilon(1e-10));
    }
}

TEST_CASE("all metrics are invariant under independent relabelings") {
    Rng rng(313);
    LabelVector pred = random_labels(60, 4, rng);
    LabelVector truth = random_labels(60, 3, rng);
    double a0 = clustering_accuracy(pred, truth);
    double n0 = nmi(pred, truth);
    double r0 = ari(pred, truth);

    std::vector<int> perm_p = {2, 0, 3, 1};
    std::vector<int> perm_t = {1, 2, 0};
    LabelVector pred2, truth2;
    for (int l : pred) pred2.push_back(perm_p[l]);
    for (int l : truth) truth2.push_back(perm_t[l]);

    CHECK(clustering_accuracy(pred2, truth2) == doctest::Approx(a0).epsilon(1e-12));
    CHECK(nmi(pred2, truth2) == doctest::Approx(n0).epsilon(1e-12));
    CHECK(ari(pred2, truth2) == doctest::Approx(r0).epsilon(1e-12));
}
