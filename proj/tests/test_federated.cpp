#include <doctest.h>

#include <cmath>
#include <map>

#include "mcc/checkpoint.hpp"
#include "mcc/federated.hpp"

using namespace mcc;

namespace {

Dataset label_cycle_dataset(int n, int classes) {
    Dataset d;
    d.num_classes = classes;
    for (int i = 0; i < n; ++i) {
        Sample s;
        s.label = i % classes;
        s.x = {static_cast<double>(i), static_cast<double>(i % 7)};
        d.samples.push_back(std::move(s));
    }
    return d;
}

std::map<int, int> class_counts(const ClientDataset& c) {
    std::map<int, int> counts;
    for (const Sample& s : c.samples) ++counts[s.label];
    return counts;
}

MlpParams constant_stack(double value) {
    MlpParams p;
    p.layers.push_back({{{value, value}, {value, value}}, {value, value}, Activation::identity});
    p.version = 1;
    return p;
}

bool stacks_equal(const MlpParams& a, const MlpParams& b) {
    return serialize_stack(a) == serialize_stack(b);
}

FederatedConfig small_fed_config() {
    FederatedConfig cfg{2,
                        1,
                        1,
                        4,
                        Temperature(0.5),
                        Temperature(1.0),
                        EmaMomentum(0.99),
                        3e-4,
                        OptimKind::adam,
                        PartitionKind::iid,
                        AugmentConfig{0.5, 0.0, 1.0, 1.0}};
    return cfg;
}

}  // namespace

TEST_CASE("iid partition balances every class") {
    Dataset d = label_cycle_dataset(100, 10);  // 10 classes x 10 samples
    Rng rng(401);
    auto clients = partition_iid(d, 2, rng);
    REQUIRE(clients.size() == 2);
    for (const auto& c : clients) {
        auto counts = class_counts(c);
        REQUIRE(counts.size() == 10);
        for (const auto& [cls, n] : counts) CHECK(n == 5);
    }

    Rng rng2(402);
    auto whole = partition_iid(d, 1, rng2);
    REQUIRE(whole.size() == 1);
    CHECK(whole[0].samples.size() == d.samples.size());

    CHECK_THROWS_AS(partition_iid(Dataset{}, 2, rng), EmptyDataset);
}

TEST_CASE("iid partition golden snapshot") {
    // 3 classes, 100 samples (34/33/33), two clients, fixed seed.
    Dataset d = label_cycle_dataset(100, 3);
    Rng rng(424242);
    auto clients = partition_iid(d, 2, rng);
    REQUIRE(clients.size() == 2);
    CHECK(clients[0].samples.size() == 51);
    CHECK(clients[1].samples.size() == 49);
    auto c0 = class_counts(clients[0]);
    CHECK(c0[0] == 17);
    CHECK(c0[1] == 17);
    CHECK(c0[2] == 17);

    // Assignment snapshot frozen from the first verified run.
    std::uint64_t checksum = 0;
    for (std::size_t k = 0; k < clients.size(); ++k) {
        for (const Sample& s : clients[k].samples) {
            checksum = checksum * 1000003ull +
                       static_cast<std::uint64_t>(s.x[0]) * (k + 1);
        }
    }
    CHECK(checksum == 5316840980588briefly);
}

TEST_CASE("noniid partition splits classes in contiguous blocks") {
    Dataset d = label_cycle_dataset(100, 10);
    auto clients = partition_noniid(d, 2);
    REQUIRE(clients.size() == 2);
    for (const Sample& s : clients[0].samples) CHECK(s.label <= 4);
    for (const Sample& s : clients[1].samples) CHECK(s.label >= 5);

    auto per_class = partition_noniid(d, 10);
    REQUIRE(per_class.size() == 10);
    for (int k = 0; k < 10; ++k) {
        for (const Sample& s : per_class[k].samples) CHECK(s.label == k);
    }

    CHECK_THROWS_AS(partition_noniid(d, 3), IndivisibleClasses);
}

TEST_CASE("federated average identities") {
    MlpParams p = constant_stack(4.0);

    SUBCASE("single part is returned unchanged") {
        MlpParams avg = federated_average({{&p, 7}});
        CHECK(stacks_equal(avg, p));
    }
    SUBCASE("equal sizes of p and -p cancel") {
        MlpParams neg = constant_stack(-4.0);
        MlpParams avg = federated_average({{&p, 5}, {&neg, 5}});
        for (const Vec& row : avg.layers[0].w) {
            for (double x : row) CHECK(x == 0.0);
        }
    }
    SUBCASE("weighted example (1,3) on values (4,0)") {
        MlpParams zero = constant_stack(0.0);
        MlpParams avg = federated_average({{&p, 1}, {&zero, 3}});
        CHECK(avg.layers[0].w[0][0] == 1.0);
        CHECK(avg.layers[0].b[0] == 1.0);
    }
    SUBCASE("identical client params aggregate to exactly those params") {
        MlpParams q = constant_stack(0.3);
        MlpParams avg = federated_average({{&q, 300}, {&q, 300}});
        CHECK(stacks_equal(avg, q));
    }
    SUBCASE("permutation invariance is bit-exact") {
        MlpParams a = constant_stack(0.1), b = constant_stack(-2.7), c = constant_stack(3.14);
        MlpParams avg1 = federated_average({{&a, 3}, {&b, 5}, {&c, 11}});
        MlpParams avg2 = federated_average({{&c, 11}, {&a, 3}, {&b, 5}});
        MlpParams avg3 = federated_average({{&b, 5}, {&c, 11}, {&a, 3}});
        CHECK(stacks_equal(avg1, avg2));
        CHECK(stacks_equal(avg1, avg3));
    }
    SUBCASE("shape mismatch is rejected") {
        MlpParams other;
        other.layers.push_back({{{1.0}}, {0.0}, Activation::identity});
        CHECK_THROWS_AS(federated_average({{&p, 1}, {&other, 1}}), ShapeMismatch);
    }
}

TEST_CASE("exact sum is order independent") {
    std::vector<double> terms = {1e16, 1.0, -1e16, 1.0, 0.1, -0.05};
    double s1 = exact_sum(terms);
    std::vector<double> rev(terms.rbegin(), terms.rend());
    CHECK(s1 == exact_sum(rev));
    CHECK(s1 == doctest::Approx(2.05).epsilon(1e-15));
}

TEST_CASE("stage one with lr=0 returns the initial encoder") {
    Rng rng(431);
    Dataset d = make_blobs(2, 20, 2, 6.0, rng);
    MccModel init = make_mcc_model(2, 6, 1, 4, 2, rng);
    FederatedConfig cfg = small_fed_config();
    cfg.clients = 1;
    cfg.lr = 0.0;
    cfg.optimizer = OptimKind::sgd;

    FederatedState st = make_federated_state(d, cfg, init, Rng(5));
    run_stage1(st, cfg, Rng(5));
    CHECK(stacks_equal(st.server.online.f, init.online.f));
    CHECK(stacks_equal(st.server.online.g_i, init.online.g_i));
}

TEST_CASE("stage one loss trajectory trends down") {
    Rng rng(433);
    Dataset d = make_blobs(3, 30, 2, 6.0, rng);
    MccModel init = make_mcc_model(2, 16, 1, 8, 3, rng);
    FederatedConfig cfg = small_fed_config();
    cfg.rounds = 10;
    cfg.local_epochs = 2;
    cfg.batch = 8;
    cfg.lr = 1e-3;

    FederatedState st = make_federated_state(d, cfg, init, Rng(9));
    StageResult res = run_stage1(st, cfg, Rng(9));
    REQUIRE(res.rounds.size() == 10);
    auto mean = [](const StageRoundLog& r) {
        double s = 0;
        for (double x : r.client_mean_loss) s += x;
        return s / r.client_mean_loss.size();
    };
    int ups = 0;
    for (std::size_t i = 1; i < res.rounds.size(); ++i) {
        if (mean(res.rounds[i]) > mean(res.rounds[i - 1])) ++ups;
    }
    CHECK(ups <= 2);  // at most 20% non-monotone steps
    CHECK(mean(res.rounds.back()) < mean(res.rounds.front()));
}

TEST_CASE("stage two keeps the encoder bit-frozen and reduces cluster loss") {
    Rng rng(439);
    Dataset d = make_blobs(3, 30, 2, 6.0, rng);
    MccModel init = make_mcc_model(2, 16, 1, 8, 3, rng);
    FederatedConfig cfg = small_fed_config();
    cfg.rounds = 6;
    cfg.local_epochs = 2;
    cfg.batch = 8;
    cfg.lr = 1e-2;

    FederatedState st = make_federated_state(d, cfg, init, Rng(11));
    run_stage1(st, cfg, Rng(11));
    std::vector<std::uint8_t> f_before = serialize_stack(st.server.online.f);

    StageResult res = run_stage2(st, cfg, Rng(11));
    CHECK(serialize_stack(st.server.online.f) == f_before);
    for (const MccModel& client : st.clients) {
        CHECK(serialize_stack(client.online.f) == f_before);
        CHECK(serialize_stack(client.target.f) == f_before);
    }
    auto mean = [](const StageRoundLog& r) {
        double s = 0;
        for (double x : r.client_mean_loss) s += x;
        return s / r.client_mean_loss.size();
    };
    CHECK(mean(res.rounds.back()) < mean(res.rounds.front()));
}

TEST_CASE("round determinism: identical seed and config reproduce the server bytes") {
    Rng data_rng(443);
    Dataset d = make_blobs(2, 24, 2, 6.0, data_rng);
    Rng model_rng(444);
    MccModel init = make_mcc_model(2, 8, 1, 4, 2, model_rng);
    FederatedConfig cfg = small_fed_config();
    cfg.rounds = 3;

    FederatedState st1 = make_federated_state(d, cfg, init, Rng(77));
    run_stage1(st1, cfg, Rng(77));
    run_stage2(st1, cfg, Rng(77));
    FederatedState st2 = make_federated_state(d, cfg, init, Rng(77));
    run_stage1(st2, cfg, Rng(77));
    run_stage2(st2, cfg, Rng(77));
    CHECK(serialize_model(st1.server) == serialize_model(st2.server));
}

TEST_CASE("infer cluster argmax and tie-breaking") {
    MlpParams f;  // identity 2->2
    f.layers.push_back({{{1, 0}, {0, 1}}, {0, 0}, Activation::identity});

    MlpParams g_c;  // zero weights: output = bias
    g_c.layers.push_back(
        {{{0, 0}, {0, 0}, {0, 0}, {0, 0}}, {0.0, 0.0, 0.0, 10.0}, Activation::identity});
    CHECK(infer_cluster(f, g_c, {0.3, -0.4}) == 3);

    MlpParams tie;
    tie.layers.push_back({{{0, 0}, {0, 0}, {0, 0}}, {5.0, 5.0, 0.0}, Activation::identity});
    CHECK(infer_cluster(f, tie, {1.0, 1.0}) == 0);

    CHECK(infer_cluster(f, g_c, {0.3, -0.4}) == infer_cluster(f, g_c, {0.3, -0.4}));
}

TEST_CASE("broadcast transport seam round-trips exactly") {
    Rng rng(449);
    MlpParams p = make_mlp({3, 5, 2}, {Activation::relu, Activation::identity}, rng);
    std::vector<std::uint8_t> bytes = serialize_stack(p);
    MlpParams q = deserialize_stack(bytes);
    CHECK(serialize_stack(q) == bytes);
}
