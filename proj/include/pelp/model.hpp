#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pelp/corpus.hpp"
#include "pelp/graph.hpp"

namespace pelp {

enum class Likelihood { kCbow, kSgns };
enum class AlphaSharing { kGlobal, kPerPartition };

Likelihood parse_likelihood(const std::string& s);
std::string likelihood_name(Likelihood l);
AlphaSharing parse_alpha_sharing(const std::string& s);
std::string alpha_sharing_name(AlphaSharing s);

// Maps (partition, word) -> rho state row and word -> alpha state row.
// Alpha rows live in partition "_" when sharing is global, otherwise in the
// word's own partition. Missing rows are detected lazily: resolution throws
// only when an absent row is actually requested.
class LogitContext {
 public:
  LogitContext(const EmbeddingState& state, const Vocabulary& vocab,
               const std::vector<std::string>& partitions,
               AlphaSharing sharing);

  uint32_t rho_row(uint32_t pid, uint32_t word) const;
  uint32_t alpha_row(uint32_t pid, uint32_t word) const;
  bool has_rho(uint32_t pid, uint32_t word) const;

  uint32_t partition_id(const std::string& label) const;  // throws if unknown
  const std::vector<std::string>& partitions() const { return partitions_; }
  AlphaSharing sharing() const { return sharing_; }
  size_t vocab_size() const { return vocab_size_; }

 private:
  uint32_t lookup(const std::vector<std::vector<uint32_t>>& table,
                  uint32_t pid, uint32_t word, const char* what) const;

  std::vector<std::string> partitions_;
  std::vector<std::vector<uint32_t>> rho_rows_;    // [pid][word]
  std::vector<std::vector<uint32_t>> alpha_rows_;  // [0][word] if global
  AlphaSharing sharing_ = AlphaSharing::kGlobal;
  size_t vocab_size_ = 0;
};

// One positive position plus its K negative token ids. SGNS treats every
// (center, context word) pair as a positive and reuses the same K negatives
// for each pair of the sample.
struct Minibatch {
  struct Sample {
    uint32_t pid = 0;
    uint32_t center = 0;
    std::vector<uint32_t> context;
    std::vector<uint32_t> negatives;
  };
  Likelihood likelihood = Likelihood::kCbow;
  std::vector<Sample> samples;
};

// eta = rho_target . sum_{w in ctx} alpha_w (rho resolved in the sample's
// partition)
double cbow_logit(const WindowSample& sample, uint32_t target,
                  const EmbeddingState& state, const LogitContext& ctx);

// eta = alpha_center . rho_other
double sgns_logit(uint32_t center, uint32_t other,
                  const std::string& partition, const EmbeddingState& state,
                  const LogitContext& ctx);

// sum_pos log sigma(eta) + sum_neg log(1 - sigma(eta)), stable for any
// finite eta.
double log_likelihood(const Minibatch& batch, const EmbeddingState& state,
                      const LogitContext& ctx);

// Sparse per-row gradient accumulator sized to one state. Rows are zeroed
// lazily; clear() resets only the touched rows.
class GradientBuffer {
 public:
  GradientBuffer(size_t rows, int dim);
  double* row(uint32_t r);  // marks r touched
  const std::vector<uint32_t>& touched() const { return touched_; }
  const double* row_data(uint32_t r) const {
    return data_.data() + size_t(r) * size_t(dim_);
  }
  int dim() const { return dim_; }
  size_t rows() const { return active_.size(); }
  bool is_touched(uint32_t r) const { return active_[r] != 0; }
  void clear();
  void add_scaled(const double* dense, double scale, size_t n);  // all rows
  void touch_all();
  double* dense_all();  // touches every row, returns the base pointer

 private:
  int dim_ = 0;
  std::vector<double> data_;
  std::vector<uint32_t> touched_;
  std::vector<uint8_t> active_;
};

// Adds the gradient of log_likelihood(batch) into gb.
void likelihood_gradient(const Minibatch& batch, const EmbeddingState& state,
                         const LogitContext& ctx, GradientBuffer& gb);

double log_posterior(const std::vector<Minibatch>& batches,
                     const EmbeddingState& state, const LogitContext& ctx,
                     const PriorGraph& graph);

}  // namespace pelp
