#pragma once

#include <functional>
#include <vector>

#include "mcc/dataset.hpp"
#include "mcc/model.hpp"

namespace mcc {

enum class PartitionKind { iid, noniid };

struct FederatedConfig {
    int clients = 1;
    int rounds = 1;
    int local_epochs = 1;
    int batch = 2;
    Temperature tau_i{0.5};
    Temperature tau_c{1.0};
    EmaMomentum momentum{0.99};
    double lr = 3e-4;
    OptimKind optimizer = OptimKind::adam;
    PartitionKind partition = PartitionKind::iid;
    AugmentConfig aug;

    void validate() const;
};

/// Server globals plus the per-client datasets and model replicas the
/// in-process simulation trains. After every aggregation the server online
/// parameters equal the dataset-size-weighted average of the returned
/// client online parameters.
struct FederatedState {
    MccModel server;
    std::vector<ClientDataset> client_data;
    std::vector<MccModel> clients;
    int round = 0;
};

/// Partitions `data` per cfg.partition and replicates the server model to
/// every client.
FederatedState make_federated_state(const Dataset& data, const FederatedConfig& cfg,
                                    const MccModel& server_init, const Rng& rng);

struct FedPart {
    const MlpParams* params;
    long long weight;  // |D_k|
};

/// Elementwise convex combination with weights w_k = weight_k / total.
/// Summation uses an exact (Shewchuk) accumulator, so the result is
/// independent of the order of `parts`.
MlpParams federated_average(const std::vector<FedPart>& parts);

struct StageRoundLog {
    int round = 0;
    std::vector<double> client_mean_loss;
};

struct StageResult {
    std::vector<StageRoundLog> rounds;
};

using EvalHook = std::function<void(int round, const MccModel& server)>;

/// Representation-learning stage: every round broadcasts the global encoder
/// and instance projector (serialized bytes, the transport seam), clients
/// run E local epochs minimizing the instance-level loss, and the server
/// aggregates the returned online f and g_i. Client targets are re-seeded
/// from the received online parameters at round start; targets are never
/// aggregated.
StageResult run_stage1(FederatedState& state, const FederatedConfig& cfg, const Rng& rng,
                       const EvalHook& hook = {});

/// Clustering stage: the server's cluster projector is freshly initialized,
/// only g_c is broadcast/trained/aggregated, and the encoder stays
/// bit-frozen at every client.
StageResult run_stage2(FederatedState& state, const FederatedConfig& cfg, const Rng& rng,
                       const EvalHook& hook = {});

/// Test-phase assignment: argmax over the cluster-head outputs of
/// g_c(f(x)); ties break to the lowest index.
int infer_cluster(const MlpParams& f, const MlpParams& g_c, const Vec& x);

/// Exactly rounded sum of the given terms (order-independent).
double exact_sum(const std::vector<double>& terms);

}  // namespace mcc
