#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pelp/corpus.hpp"
#include "pelp/graph.hpp"
#include "pelp/model.hpp"

namespace pelp {

enum class NegativeScope { kGlobal, kPerPartition };
enum class Optimizer { kAdam, kSgd };

NegativeScope parse_negative_scope(const std::string& s);
std::string negative_scope_name(NegativeScope s);
Optimizer parse_optimizer(const std::string& s);
std::string optimizer_name(Optimizer o);

struct TrainConfig {
  int dim = 25;
  int window = 5;     // context words each side
  int negatives = 5;  // K per positive
  int epochs = 5;
  int batch_size = 256;  // positive positions per step
  double learning_rate = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double lambda0 = 1.0;
  double lambda1 = 1.0;
  Likelihood likelihood = Likelihood::kCbow;
  uint64_t seed = 1;
  double init_scale = 0.5;

  // extensions beyond the core fields (documented in docs/config.md)
  AlphaSharing alpha_sharing = AlphaSharing::kGlobal;
  NegativeScope negative_scope = NegativeScope::kGlobal;
  double noise_exponent = 0.75;
  Optimizer optimizer = Optimizer::kAdam;
  int lazy_prior_interval = 1;  // apply prior every F steps, scaled

  void validate() const;  // throws DataError on violated invariants
};

// Strict JSON: unknown keys and wrong types are data errors.
TrainConfig parse_train_config_json(const std::string& text);
TrainConfig load_train_config(const std::string& path);
std::string train_config_to_json(const TrainConfig& cfg);  // canonical form
uint64_t config_hash(const TrainConfig& cfg);  // FNV-1a64 of canonical JSON

// Full key set for a run: rho rows per (partition, word) (all pairs under
// global negative scope, else occurring pairs only), alpha rows per the
// sharing mode, then any graph nodes not already present.
std::vector<NodeKey> model_keys(const Vocabulary& vocab,
                                const PartitionedCorpus& corpus,
                                const PriorGraph& graph,
                                const TrainConfig& cfg);

// Entries i.i.d. uniform in [-init_scale/dim, +init_scale/dim].
EmbeddingState init_state(std::vector<NodeKey> keys, const TrainConfig& cfg);

struct OptimizerState {
  std::vector<double> m;
  std::vector<double> v;
  uint64_t step = 0;

  void reset(size_t n) {
    m.assign(n, 0.0);
    v.assign(n, 0.0);
    step = 0;
  }
};

// One bias-corrected ascent step over the touched rows of grad. Throws
// NumericError (with the offending key) when a parameter leaves the finite
// range.
void adam_step(EmbeddingState& state, const GradientBuffer& grad,
               OptimizerState& opt, const TrainConfig& cfg);

struct Checkpoint {
  uint64_t config_hash = 0;
  std::string config_json;
  uint64_t epochs_done = 0;
  EmbeddingState state;
  OptimizerState opt;
};

// Binary, little-endian, magic "PELP0001"; round-trip is bit-exact.
void save_checkpoint(const Checkpoint& ck, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

struct EpochStats {
  int epoch = 0;                 // 1-based; 0 = initialization
  double monitor_posterior = 0;  // fixed-subsample likelihood + full prior
};

struct TrainResult {
  EmbeddingState state;
  OptimizerState opt;
  std::vector<EpochStats> monitor;  // entry 0 is the initial state
  size_t positions = 0;             // usable positions per epoch
  size_t steps_per_epoch = 0;
};

// Runs epochs * ceil(positions/batch_size) steps; each step ascends
// likelihood_gradient(batch) + (1/B) * prior_gradient. Bit-reproducible
// under a fixed seed; `resume` continues an interrupted run identically.
TrainResult train(const PartitionedCorpus& corpus, const Vocabulary& vocab,
                  const PriorGraph& graph, const TrainConfig& cfg,
                  const Checkpoint* resume = nullptr,
                  const std::function<void(const EpochStats&)>& on_epoch = {});

}  // namespace pelp
