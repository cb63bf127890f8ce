#include "pelp/train.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "pelp/errors.hpp"
#include "pelp/kernels.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace pelp {

using nlohmann::json;

NegativeScope parse_negative_scope(const std::string& s) {
  if (s == "global") return NegativeScope::kGlobal;
  if (s == "per_partition") return NegativeScope::kPerPartition;
  throw DataError("unknown negative_scope (want global or per_partition): " +
                  s);
}

std::string negative_scope_name(NegativeScope s) {
  return s == NegativeScope::kGlobal ? "global" : "per_partition";
}

Optimizer parse_optimizer(const std::string& s) {
  if (s == "adam") return Optimizer::kAdam;
  if (s == "sgd") return Optimizer::kSgd;
  throw DataError("unknown optimizer (want adam or sgd): " + s);
}

std::string optimizer_name(Optimizer o) {
  return o == Optimizer::kAdam ? "adam" : "sgd";
}

void TrainConfig::validate() const {
  if (dim < 1) throw DataError("dim must be >= 1");
  if (window < 1) throw DataError("window must be >= 1");
  if (negatives < 1) throw DataError("negatives must be >= 1");
  if (epochs < 1) throw DataError("epochs must be >= 1");
  if (batch_size < 1) throw DataError("batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw DataError("learning_rate must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw DataError("beta1 must be in [0,1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw DataError("beta2 must be in [0,1)");
  if (!(epsilon > 0.0)) throw DataError("epsilon must be > 0");
  if (!(lambda0 > 0.0)) throw DataError("lambda0 must be > 0");
  if (!(lambda1 >= 0.0)) throw DataError("lambda1 must be >= 0");
  if (!(init_scale >= 0.0)) throw DataError("init_scale must be >= 0");
  if (!(noise_exponent >= 0.0)) throw DataError("noise_exponent must be >= 0");
  if (lazy_prior_interval < 1)
    throw DataError("lazy_prior_interval must be >= 1");
}

TrainConfig parse_train_config_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw DataError("config must be a JSON object");
  TrainConfig cfg;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const json& v = it.value();
    try {
      if (k == "dim") cfg.dim = v.get<int>();
      else if (k == "window") cfg.window = v.get<int>();
      else if (k == "negatives") cfg.negatives = v.get<int>();
      else if (k == "epochs") cfg.epochs = v.get<int>();
      else if (k == "batch_size") cfg.batch_size = v.get<int>();
      else if (k == "learning_rate") cfg.learning_rate = v.get<double>();
      else if (k == "beta1") cfg.beta1 = v.get<double>();
      else if (k == "beta2") cfg.beta2 = v.get<double>();
      else if (k == "epsilon") cfg.epsilon = v.get<double>();
      else if (k == "lambda0") cfg.lambda0 = v.get<double>();
      else if (k == "lambda1") cfg.lambda1 = v.get<double>();
      else if (k == "likelihood")
        cfg.likelihood = parse_likelihood(v.get<std::string>());
      else if (k == "seed") cfg.seed = v.get<uint64_t>();
      else if (k == "init_scale") cfg.init_scale = v.get<double>();
      else if (k == "alpha_sharing")
        cfg.alpha_sharing = parse_alpha_sharing(v.get<std::string>());
      else if (k == "negative_scope")
        cfg.negative_scope = parse_negative_scope(v.get<std::string>());
      else if (k == "noise_exponent") cfg.noise_exponent = v.get<double>();
      else if (k == "optimizer")
        cfg.optimizer = parse_optimizer(v.get<std::string>());
      else if (k == "lazy_prior_interval")
        cfg.lazy_prior_interval = v.get<int>();
      else
        throw DataError("unknown config key: " + k);
    } catch (const json::exception&) {
      throw DataError("bad value type for config key: " + k);
    }
  }
  cfg.validate();
  return cfg;
}

TrainConfig load_train_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_train_config_json(ss.str());
}

std::string train_config_to_json(const TrainConfig& cfg) {
  json j;  // nlohmann objects keep keys sorted, so dump() is canonical
  j["dim"] = cfg.dim;
  j["window"] = cfg.window;
  j["negatives"] = cfg.negatives;
  j["epochs"] = cfg.epochs;
  j["batch_size"] = cfg.batch_size;
  j["learning_rate"] = cfg.learning_rate;
  j["beta1"] = cfg.beta1;
  j["beta2"] = cfg.beta2;
  j["epsilon"] = cfg.epsilon;
  j["lambda0"] = cfg.lambda0;
  j["lambda1"] = cfg.lambda1;
  j["likelihood"] = likelihood_name(cfg.likelihood);
  j["seed"] = cfg.seed;
  j["init_scale"] = cfg.init_scale;
  j["alpha_sharing"] = alpha_sharing_name(cfg.alpha_sharing);
  j["negative_scope"] = negative_scope_name(cfg.negative_scope);
  j["noise_exponent"] = cfg.noise_exponent;
  j["optimizer"] = optimizer_name(cfg.optimizer);
  j["lazy_prior_interval"] = cfg.lazy_prior_interval;
  return j.dump();
}

uint64_t config_hash(const TrainConfig& cfg) {
  std::string s = train_config_to_json(cfg);
  uint64_t h = 0xcbf29ce484222325ull;
  for (char c : s) {
    h ^= uint8_t(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

std::vector<NodeKey> model_keys(const Vocabulary& vocab,
                                const PartitionedCorpus& corpus,
                                const PriorGraph& graph,
                                const TrainConfig& cfg) {
  std::vector<NodeKey> keys;
  std::unordered_set<NodeKey, NodeKeyHash> seen;
  auto add = [&](NodeKey k) {
    if (seen.insert(k).second) keys.push_back(std::move(k));
  };
  std::vector<std::string> partitions = corpus.partitions();
  if (partitions.empty()) partitions.push_back("_");
  for (uint32_t pid = 0; pid < partitions.size(); ++pid)
    for (uint32_t w = 0; w < vocab.size(); ++w)
      if (cfg.negative_scope == NegativeScope::kGlobal ||
          corpus.occurs_in(pid, w))
        add(rho_key(partitions[pid], vocab.word(w)));
  if (cfg.alpha_sharing == AlphaSharing::kGlobal) {
    for (uint32_t w = 0; w < vocab.size(); ++w)
      add(alpha_key("_", vocab.word(w)));
  } else {
    for (uint32_t pid = 0; pid < partitions.size(); ++pid)
      for (uint32_t w = 0; w < vocab.size(); ++w)
        if (corpus.occurs_in(pid, w))
          add(alpha_key(partitions[pid], vocab.word(w)));
  }
  for (const auto& k : graph.nodes()) add(k);
  return keys;
}

EmbeddingState init_state(std::vector<NodeKey> keys, const TrainConfig& cfg) {
  EmbeddingState state(std::move(keys), cfg.dim);
  Rng rng(mix64(cfg.seed, 0x696e6974ull));
  const double half = cfg.init_scale / double(cfg.dim);
  for (double& x : state.data()) x = rng.uniform(-half, half);
  return state;
}

void adam_step(EmbeddingState& state, const GradientBuffer& grad,
               OptimizerState& opt, const TrainConfig& cfg) {
  const size_t d = size_t(state.dim());
  opt.step += 1;
  if (cfg.optimizer == Optimizer::kAdam) {
    kernels::AdamParams p;
    p.lr = cfg.learning_rate;
    p.beta1 = cfg.beta1;
    p.beta2 = cfg.beta2;
    p.eps = cfg.epsilon;
    p.bias1 = 1.0 - std::pow(cfg.beta1, double(opt.step));
    p.bias2 = 1.0 - std::pow(cfg.beta2, double(opt.step));
    for (uint32_t r : grad.touched()) {
      size_t off = size_t(r) * d;
      if (!kernels::adam_update(state.data().data() + off,
                                opt.m.data() + off, opt.v.data() + off,
                                grad.row_data(r), d, p))
        throw NumericError("non-finite parameter at step " +
                           std::to_string(opt.step) + ", node " +
                           format_node(state.key(r)));
    }
  } else {
    for (uint32_t r : grad.touched()) {
      size_t off = size_t(r) * d;
      double* p = state.data().data() + off;
      kernels::axpy(p, grad.row_data(r), cfg.learning_rate, d);
      for (size_t i = 0; i < d; ++i)
        if (!std::isfinite(p[i]))
          throw NumericError("non-finite parameter at step " +
                             std::to_string(opt.step) + ", node " +
                             format_node(state.key(r)));
    }
  }
}

// --- checkpoint --------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'P', 'E', 'L', 'P', '0', '0', '0', '1'};

void put_bytes(std::ostream& out, const void* p, size_t n) {
  out.write(static_cast<const char*>(p), std::streamsize(n));
}
void put_u64(std::ostream& out, uint64_t x) { put_bytes(out, &x, 8); }
void put_u32(std::ostream& out, uint32_t x) { put_bytes(out, &x, 4); }
void put_u8(std::ostream& out, uint8_t x) { put_bytes(out, &x, 1); }
void put_str(std::ostream& out, const std::string& s) {
  put_u32(out, uint32_t(s.size()));
  put_bytes(out, s.data(), s.size());
}

void get_bytes(std::istream& in, void* p, size_t n) {
  in.read(static_cast<char*>(p), std::streamsize(n));
  if (in.gcount() != std::streamsize(n))
    throw DataError("truncated checkpoint");
}
uint64_t get_u64(std::istream& in) {
  uint64_t x;
  get_bytes(in, &x, 8);
  return x;
}
uint32_t get_u32(std::istream& in) {
  uint32_t x;
  get_bytes(in, &x, 4);
  return x;
}
uint8_t get_u8(std::istream& in) {
  uint8_t x;
  get_bytes(in, &x, 1);
  return x;
}
std::string get_str(std::istream& in) {
  uint32_t n = get_u32(in);
  if (n > (1u << 24)) throw DataError("corrupt checkpoint string length");
  std::string s(n, '\0');
  get_bytes(in, s.data(), n);
  return s;
}

}  // namespace

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write checkpoint: " + path);
  put_bytes(out, kMagic, 8);
  put_u64(out, ck.config_hash);
  put_str(out, ck.config_json);
  put_u64(out, ck.epochs_done);
  put_u64(out, ck.opt.step);
  put_u32(out, uint32_t(ck.state.dim()));
  put_u64(out, ck.state.size());
  for (const auto& k : ck.state.keys()) {
    put_u8(out, uint8_t(k.role));
    put_str(out, k.partition);
    put_str(out, k.word);
  }
  const size_t n = ck.state.data().size();
  if (ck.opt.m.size() != n || ck.opt.v.size() != n)
    throw DataError("optimizer moments do not match state shape");
  put_bytes(out, ck.state.data().data(), n * sizeof(double));
  put_bytes(out, ck.opt.m.data(), n * sizeof(double));
  put_bytes(out, ck.opt.v.data(), n * sizeof(double));
  if (!out) throw DataError("failed writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path);
  char magic[8];
  get_bytes(in, magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0)
    throw DataError("not a checkpoint file (bad magic): " + path);
  Checkpoint ck;
  ck.config_hash = get_u64(in);
  ck.config_json = get_str(in);
  ck.epochs_done = get_u64(in);
  ck.opt.step = get_u64(in);
  uint32_t dim = get_u32(in);
  uint64_t count = get_u64(in);
  if (dim < 1 || count == 0) throw DataError("corrupt checkpoint header");
  std::vector<NodeKey> keys;
  keys.reserve(count);
  for (uint64_t i = 0; i < count; ++i) {
    NodeKey k;
    uint8_t role = get_u8(in);
    if (role > 1) throw DataError("corrupt checkpoint node role");
    k.role = Role(role);
    k.partition = get_str(in);
    k.word = get_str(in);
    keys.push_back(std::move(k));
  }
  ck.state = EmbeddingState(std::move(keys), int(dim));
  const size_t n = ck.state.data().size();
  ck.opt.m.resize(n);
  ck.opt.v.resize(n);
  get_bytes(in, ck.state.data().data(), n * sizeof(double));
  get_bytes(in, ck.opt.m.data(), n * sizeof(double));
  get_bytes(in, ck.opt.v.data(), n * sizeof(double));
  in.peek();
  if (!in.eof()) throw DataError("trailing bytes in checkpoint: " + path);
  return ck;
}

// --- training loop -----------------------------------------------------------

namespace {

constexpr uint64_t kShuffleTag = 0x73687566ull;
constexpr uint64_t kNegTag = 0x6e656773ull;
constexpr uint64_t kMonTag = 0x6d6f6e69ull;

// Per-run negative sampling source. Global scope draws from the whole
// vocabulary; per-partition scope restricts draws to words occurring in the
// sample's partition.
struct NegSource {
  bool per_partition = false;
  std::vector<NegativeSampler> samplers;
  std::vector<std::vector<uint32_t>> words;  // draw index -> word id

  NegSource(const Vocabulary& vocab, const PartitionedCorpus& corpus,
            const TrainConfig& cfg) {
    per_partition = cfg.negative_scope == NegativeScope::kPerPartition;
    if (!per_partition) {
      std::vector<double> w(vocab.size());
      for (size_t i = 0; i < vocab.size(); ++i)
        w[i] = std::pow(double(vocab.count(uint32_t(i))), cfg.noise_exponent);
      samplers.emplace_back(w);
      return;
    }
    const size_t p = corpus.partitions().size();
    samplers.reserve(p);
    words.resize(p);
    for (uint32_t pid = 0; pid < p; ++pid) {
      std::vector<double> w;
      for (uint32_t i = 0; i < vocab.size(); ++i) {
        uint64_t c = corpus.partition_count(pid, i);
        if (c == 0) continue;
        words[pid].push_back(i);
        w.push_back(std::pow(double(c), cfg.noise_exponent));
      }
      if (w.empty())
        throw DataError("partition has no tokens: " +
                        corpus.partition_label(pid));
      samplers.emplace_back(w);
    }
  }

  uint32_t draw(uint32_t pid, Rng& rng) const {
    if (!per_partition) return samplers[0].draw(rng);
    return words[pid][samplers[pid].draw(rng)];
  }
};

size_t usable_positions(const PartitionedCorpus& corpus) {
  size_t n = 0;
  for (const auto& seg : corpus.segments())
    if (seg.tokens.size() > 1) n += seg.tokens.size();
  return n;
}

// Fixed monitoring subsample: every stride-th usable position in corpus
// order, with its own frozen negatives (independent of the epoch).
std::vector<Minibatch> build_monitor_batches(const PartitionedCorpus& corpus,
                                             const NegSource& negs,
                                             const TrainConfig& cfg,
                                             size_t positions) {
  const size_t want = std::min<size_t>(2000, positions);
  const size_t stride = std::max<size_t>(1, positions / want);
  std::vector<Minibatch> out;
  Minibatch cur;
  cur.likelihood = cfg.likelihood;
  size_t index = 0;
  for (const auto& seg : corpus.segments()) {
    if (seg.tokens.size() < 2) continue;
    for_each_window(seg.tokens, cfg.window,
                    [&](size_t, uint32_t center, const uint32_t* ctx,
                        size_t ctx_len) {
                      size_t i = index++;
                      if (ctx_len == 0 || i % stride != 0) return;
                      Minibatch::Sample s;
                      s.pid = seg.partition;
                      s.center = center;
                      s.context.assign(ctx, ctx + ctx_len);
                      Rng r(mix64(cfg.seed, kMonTag, i));
                      s.negatives.reserve(size_t(cfg.negatives));
                      for (int k = 0; k < cfg.negatives; ++k)
                        s.negatives.push_back(negs.draw(s.pid, r));
                      cur.samples.push_back(std::move(s));
                      if (cur.samples.size() >= 1024) {
                        out.push_back(std::move(cur));
                        cur = Minibatch{};
                        cur.likelihood = cfg.likelihood;
                      }
                    });
  }
  if (!cur.samples.empty()) out.push_back(std::move(cur));
  return out;
}

}  // namespace

TrainResult train(const PartitionedCorpus& corpus, const Vocabulary& vocab,
                  const PriorGraph& graph, const TrainConfig& cfg,
                  const Checkpoint* resume,
                  const std::function<void(const EpochStats&)>& on_epoch) {
  cfg.validate();
  std::vector<NodeKey> keys = model_keys(vocab, corpus, graph, cfg);

  TrainResult res;
  uint64_t start_epoch = 0;
  if (resume) {
    if (resume->config_hash != config_hash(cfg))
      throw DataError("checkpoint was written under a different config");
    if (resume->state.dim() != cfg.dim ||
        resume->state.keys() != keys)
      throw DataError("checkpoint node set does not match this run");
    res.state = resume->state;
    res.opt = resume->opt;
    start_epoch = resume->epochs_done;
  } else {
    res.state = init_state(std::move(keys), cfg);
    res.opt.reset(res.state.data().size());
  }

  LogitContext ctx(res.state, vocab, corpus.partitions(), cfg.alpha_sharing);
  std::vector<ResolvedEdge> edges = resolve_edges(graph, res.state);

  const size_t positions = usable_positions(corpus);
  if (positions == 0) throw DataError("no usable training positions");
  const size_t B = (positions + size_t(cfg.batch_size) - 1) /
                   size_t(cfg.batch_size);
  res.positions = positions;
  res.steps_per_epoch = B;

  NegSource negs(vocab, corpus, cfg);
  std::vector<Minibatch> monitor_batches =
      build_monitor_batches(corpus, negs, cfg, positions);
  auto monitor_value = [&]() {
    double v = log_posterior(monitor_batches, res.state, ctx, graph);
    if (!std::isfinite(v))
      throw NumericError("non-finite monitored posterior at step " +
                         std::to_string(res.opt.step));
    return v;
  };

  if (!resume) {
    EpochStats init_stats{0, monitor_value()};
    res.monitor.push_back(init_stats);
    if (on_epoch) on_epoch(init_stats);
  }

  const int F = cfg.lazy_prior_interval;
  GradientBuffer gb(res.state.size(), cfg.dim);
  std::vector<uint32_t> seg_order(corpus.segments().size());

  for (uint64_t e = start_epoch; e < uint64_t(cfg.epochs); ++e) {
    for (size_t i = 0; i < seg_order.size(); ++i)
      seg_order[i] = uint32_t(i);
    Rng shuffle_rng(mix64(cfg.seed, kShuffleTag, e));
    shuffle_rng.shuffle(seg_order);

    Minibatch batch;
    batch.likelihood = cfg.likelihood;
    size_t sample_index = 0;
    size_t b = 0;  // step within epoch

    auto flush = [&]() {
      likelihood_gradient(batch, res.state, ctx, gb);
      if (b % size_t(F) == 0) {
        size_t covered = std::min<size_t>(size_t(F), B - b);
        accumulate_prior_gradient(res.state, edges, cfg.lambda1, cfg.lambda0,
                                  double(covered) / double(B),
                                  gb.dense_all());
      }
      adam_step(res.state, gb, res.opt, cfg);
      gb.clear();
      batch.samples.clear();
      ++b;
    };

    for (uint32_t si : seg_order) {
      const auto& seg = corpus.segments()[si];
      if (seg.tokens.size() < 2) continue;
      for_each_window(seg.tokens, cfg.window,
                      [&](size_t, uint32_t center, const uint32_t* ctx_ptr,
                          size_t ctx_len) {
                        size_t i = sample_index++;
                        if (ctx_len == 0) return;
                        Minibatch::Sample s;
                        s.pid = seg.partition;
                        s.center = center;
                        s.context.assign(ctx_ptr, ctx_ptr + ctx_len);
                        Rng r(mix64(cfg.seed, kNegTag, e, i));
                        s.negatives.reserve(size_t(cfg.negatives));
                        for (int k = 0; k < cfg.negatives; ++k)
                          s.negatives.push_back(negs.draw(s.pid, r));
                        batch.samples.push_back(std::move(s));
                        if (batch.samples.size() >= size_t(cfg.batch_size))
                          flush();
                      });
    }
    if (!batch.samples.empty()) flush();

    EpochStats stats{int(e) + 1, monitor_value()};
    res.monitor.push_back(stats);
    if (on_epoch) on_epoch(stats);
  }
  return res;
}

}  // namespace pelp
