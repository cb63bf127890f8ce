#include "pelp/model.hpp"

#include <algorithm>
#include <cmath>

#include "pelp/errors.hpp"
#include "pelp/kernels.hpp"
#include "pelp/math.hpp"

namespace pelp {

Likelihood parse_likelihood(const std::string& s) {
  if (s == "cbow") return Likelihood::kCbow;
  if (s == "sgns") return Likelihood::kSgns;
  throw DataError("unknown likelihood (want cbow or sgns): " + s);
}

std::string likelihood_name(Likelihood l) {
  return l == Likelihood::kCbow ? "cbow" : "sgns";
}

AlphaSharing parse_alpha_sharing(const std::string& s) {
  if (s == "global") return AlphaSharing::kGlobal;
  if (s == "per_partition") return AlphaSharing::kPerPartition;
  throw DataError("unknown alpha_sharing (want global or per_partition): " +
                  s);
}

std::string alpha_sharing_name(AlphaSharing s) {
  return s == AlphaSharing::kGlobal ? "global" : "per_partition";
}

LogitContext::LogitContext(const EmbeddingState& state,
                           const Vocabulary& vocab,
                           const std::vector<std::string>& partitions,
                           AlphaSharing sharing)
    : partitions_(partitions), sharing_(sharing), vocab_size_(vocab.size()) {
  if (partitions_.empty()) partitions_.push_back("_");
  const size_t v = vocab.size();
  rho_rows_.assign(partitions_.size(), std::vector<uint32_t>(v, UINT32_MAX));
  const size_t alpha_tables =
      sharing_ == AlphaSharing::kGlobal ? 1 : partitions_.size();
  alpha_rows_.assign(alpha_tables, std::vector<uint32_t>(v, UINT32_MAX));
  for (size_t p = 0; p < partitions_.size(); ++p) {
    for (size_t w = 0; w < v; ++w) {
      int64_t r = state.index_of(rho_key(partitions_[p], vocab.word(uint32_t(w))));
      if (r >= 0) rho_rows_[p][w] = uint32_t(r);
    }
  }
  for (size_t t = 0; t < alpha_tables; ++t) {
    const std::string& label =
        sharing_ == AlphaSharing::kGlobal ? std::string("_") : partitions_[t];
    for (size_t w = 0; w < v; ++w) {
      int64_t r = state.index_of(alpha_key(label, vocab.word(uint32_t(w))));
      if (r >= 0) alpha_rows_[t][w] = uint32_t(r);
    }
  }
}

uint32_t LogitContext::lookup(
    const std::vector<std::vector<uint32_t>>& table, uint32_t pid,
    uint32_t word, const char* what) const {
  if (pid >= table.size()) throw DataError("partition id out of range");
  if (word >= table[pid].size()) throw DataError("word id out of range");
  uint32_t r = table[pid][word];
  if (r == UINT32_MAX)
    throw DataError(std::string("unresolvable ") + what + " row for word " +
                    std::to_string(word) + " in partition " +
                    partitions_[std::min<size_t>(pid, partitions_.size() - 1)]);
  return r;
}

uint32_t LogitContext::rho_row(uint32_t pid, uint32_t word) const {
  return lookup(rho_rows_, pid, word, "rho");
}

uint32_t LogitContext::alpha_row(uint32_t pid, uint32_t word) const {
  uint32_t table = sharing_ == AlphaSharing::kGlobal ? 0 : pid;
  return lookup(alpha_rows_, table, word, "alpha");
}

bool LogitContext::has_rho(uint32_t pid, uint32_t word) const {
  return pid < rho_rows_.size() && word < rho_rows_[pid].size() &&
         rho_rows_[pid][word] != UINT32_MAX;
}

uint32_t LogitContext::partition_id(const std::string& label) const {
  for (size_t i = 0; i < partitions_.size(); ++i)
    if (partitions_[i] == label) return uint32_t(i);
  throw DataError("unknown partition: " + label);
}

namespace {

// sum of alpha rows for the context words, written into buf
void context_sum(const Minibatch::Sample& s, const EmbeddingState& state,
                 const LogitContext& ctx, double* buf) {
  const size_t d = size_t(state.dim());
  std::fill(buf, buf + d, 0.0);
  for (uint32_t w : s.context)
    kernels::axpy(buf, state.row(ctx.alpha_row(s.pid, w)), 1.0, d);
}

}  // namespace

double cbow_logit(const WindowSample& sample, uint32_t target,
                  const EmbeddingState& state, const LogitContext& ctx) {
  if (sample.context.empty()) throw DataError("cbow logit needs context");
  uint32_t pid = ctx.partition_id(sample.partition);
  Minibatch::Sample s;
  s.pid = pid;
  s.center = sample.center;
  s.context = sample.context;
  std::vector<double> csum(size_t(state.dim()));
  context_sum(s, state, ctx, csum.data());
  return kernels::dot(state.row(ctx.rho_row(pid, target)), csum.data(),
                      csum.size());
}

double sgns_logit(uint32_t center, uint32_t other,
                  const std::string& partition, const EmbeddingState& state,
                  const LogitContext& ctx) {
  uint32_t pid = ctx.partition_id(partition);
  return kernels::dot(state.row(ctx.alpha_row(pid, center)),
                      state.row(ctx.rho_row(pid, other)),
                      size_t(state.dim()));
}

double log_likelihood(const Minibatch& batch, const EmbeddingState& state,
                      const LogitContext& ctx) {
  const size_t d = size_t(state.dim());
  std::vector<double> csum(d);
  double total = 0.0;
  for (const auto& s : batch.samples) {
    if (s.context.empty()) continue;
    if (batch.likelihood == Likelihood::kCbow) {
      context_sum(s, state, ctx, csum.data());
      double eta_pos = kernels::dot(state.row(ctx.rho_row(s.pid, s.center)),
                                    csum.data(), d);
      total += log_sigmoid(eta_pos);
      for (uint32_t n : s.negatives) {
        double eta = kernels::dot(state.row(ctx.rho_row(s.pid, n)),
                                  csum.data(), d);
        total += log_one_minus_sigmoid(eta);
      }
    } else {
      const double* ac = state.row(ctx.alpha_row(s.pid, s.center));
      const double pairs = double(s.context.size());
      for (uint32_t w : s.context) {
        double eta = kernels::dot(ac, state.row(ctx.rho_row(s.pid, w)), d);
        total += log_sigmoid(eta);
      }
      // the K negatives are shared by every pair of this sample
      for (uint32_t n : s.negatives) {
        double eta = kernels::dot(ac, state.row(ctx.rho_row(s.pid, n)), d);
        total += pairs * log_one_minus_sigmoid(eta);
      }
    }
  }
  return total;
}

GradientBuffer::GradientBuffer(size_t rows, int dim)
    : dim_(dim),
      data_(rows * size_t(dim), 0.0),
      active_(rows, 0) {}

double* GradientBuffer::row(uint32_t r) {
  if (!active_[r]) {
    active_[r] = 1;
    touched_.push_back(r);
  }
  return data_.data() + size_t(r) * size_t(dim_);
}

void GradientBuffer::clear() {
  for (uint32_t r : touched_) {
    double* p = data_.data() + size_t(r) * size_t(dim_);
    std::fill(p, p + dim_, 0.0);
    active_[r] = 0;
  }
  touched_.clear();
}

void GradientBuffer::add_scaled(const double* dense, double scale, size_t n) {
  touch_all();
  kernels::axpy(data_.data(), dense, scale, n);
}

void GradientBuffer::touch_all() {
  for (uint32_t r = 0; r < active_.size(); ++r) {
    if (!active_[r]) {
      active_[r] = 1;
      touched_.push_back(r);
    }
  }
}

double* GradientBuffer::dense_all() {
  touch_all();
  return data_.data();
}

void likelihood_gradient(const Minibatch& batch, const EmbeddingState& state,
                         const LogitContext& ctx, GradientBuffer& gb) {
  const size_t d = size_t(state.dim());
  std::vector<double> csum(d);
  std::vector<double> gsum(d);
  for (const auto& s : batch.samples) {
    if (s.context.empty()) continue;
    if (batch.likelihood == Likelihood::kCbow) {
      context_sum(s, state, ctx, csum.data());
      // gsum accumulates sum over targets of coef * rho_target, the shared
      // gradient of every context alpha
      std::fill(gsum.begin(), gsum.end(), 0.0);
      uint32_t rc = ctx.rho_row(s.pid, s.center);
      double coef = 1.0 - sigmoid(kernels::dot(state.row(rc), csum.data(), d));
      kernels::axpy(gb.row(rc), csum.data(), coef, d);
      kernels::axpy(gsum.data(), state.row(rc), coef, d);
      for (uint32_t n : s.negatives) {
        uint32_t rn = ctx.rho_row(s.pid, n);
        double cn = -sigmoid(kernels::dot(state.row(rn), csum.data(), d));
        kernels::axpy(gb.row(rn), csum.data(), cn, d);
        kernels::axpy(gsum.data(), state.row(rn), cn, d);
      }
      for (uint32_t w : s.context)
        kernels::axpy(gb.row(ctx.alpha_row(s.pid, w)), gsum.data(), 1.0, d);
    } else {
      uint32_t ai = ctx.alpha_row(s.pid, s.center);
      const double* ac = state.row(ai);
      std::fill(gsum.begin(), gsum.end(), 0.0);
      const double pairs = double(s.context.size());
      for (uint32_t w : s.context) {
        uint32_t rw = ctx.rho_row(s.pid, w);
        double coef = 1.0 - sigmoid(kernels::dot(ac, state.row(rw), d));
        kernels::axpy(gb.row(rw), ac, coef, d);
        kernels::axpy(gsum.data(), state.row(rw), coef, d);
      }
      for (uint32_t n : s.negatives) {
        uint32_t rn = ctx.rho_row(s.pid, n);
        double cn = -pairs * sigmoid(kernels::dot(ac, state.row(rn), d));
        kernels::axpy(gb.row(rn), ac, cn, d);
        kernels::axpy(gsum.data(), state.row(rn), cn, d);
      }
      kernels::axpy(gb.row(ai), gsum.data(), 1.0, d);
    }
  }
}

double log_posterior(const std::vector<Minibatch>& batches,
                     const EmbeddingState& state, const LogitContext& ctx,
                     const PriorGraph& graph) {
  double total = log_prior(state, graph);
  for (const auto& b : batches) total += log_likelihood(b, state, ctx);
  return total;
}

}  // namespace pelp
