#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "doctest.h"
#include "pelp/corpus.hpp"
#include "pelp/errors.hpp"
#include "pelp/eval.hpp"
#include "pelp/graph.hpp"
#include "pelp/rng.hpp"
#include "pelp/synth.hpp"
#include "pelp/train.hpp"

using namespace pelp;

namespace {

CorpusLines tiny_lines() {
  return {
      {"_", {"a", "b", "c", "a", "b", "d", "e", "a"}},
      {"_", {"c", "d", "e", "b", "a", "c"}},
      {"_", {"e", "d", "c", "b", "a", "e", "d"}},
  };
}

TrainConfig tiny_config() {
  TrainConfig cfg;
  cfg.dim = 4;
  cfg.window = 2;
  cfg.negatives = 2;
  cfg.epochs = 2;
  cfg.batch_size = 4;
  cfg.lambda0 = 1.0;
  cfg.lambda1 = 0.5;
  cfg.likelihood = Likelihood::kSgns;
  cfg.seed = 11;
  return cfg;
}

PriorGraph tiny_graph(double lambda0 = 1.0, double lambda1 = 0.5) {
  std::vector<GraphEdge> edges = {
      {rho_key("_", "a"), rho_key("_", "b"), 1.0},
      {rho_key("_", "c"), rho_key("_", "d"), 2.0},
  };
  return PriorGraph::from_edges(edges, lambda0, lambda1);
}

std::string temp_path(const char* stem) {
  return std::string("pelp_test_train_") + stem + ".tmp";
}

}  // namespace

TEST_CASE("validate rejects bad fields") {
  TrainConfig cfg = tiny_config();
  CHECK_NOTHROW(cfg.validate());
  auto bad = [&](auto mutate) {
    TrainConfig c = tiny_config();
    mutate(c);
    CHECK_THROWS_AS(c.validate(), DataError);
  };
  bad([](TrainConfig& c) { c.dim = 0; });
  bad([](TrainConfig& c) { c.window = 0; });
  bad([](TrainConfig& c) { c.negatives = 0; });
  bad([](TrainConfig& c) { c.epochs = 0; });
  bad([](TrainConfig& c) { c.batch_size = 0; });
  bad([](TrainConfig& c) { c.learning_rate = 0.0; });
  bad([](TrainConfig& c) { c.lambda0 = 0.0; });
  bad([](TrainConfig& c) { c.lambda1 = -1.0; });
  bad([](TrainConfig& c) { c.init_scale = -0.5; });
  bad([](TrainConfig& c) { c.lazy_prior_interval = 0; });
}

TEST_CASE("config json round trip is canonical and strict") {
  TrainConfig cfg = tiny_config();
  cfg.alpha_sharing = AlphaSharing::kPerPartition;
  cfg.negative_scope = NegativeScope::kPerPartition;
  cfg.optimizer = Optimizer::kSgd;
  std::string js = train_config_to_json(cfg);
  TrainConfig back = parse_train_config_json(js);
  CHECK(train_config_to_json(back) == js);
  CHECK(config_hash(back) == config_hash(cfg));

  CHECK_THROWS_AS(parse_train_config_json("{\"dim\": 8, \"zzz\": 1}"),
                  DataError);
  CHECK_THROWS_AS(parse_train_config_json("{\"dim\": \"eight\"}"), DataError);
  CHECK_THROWS_AS(parse_train_config_json("not json"), DataError);

  // hash is sensitive to every material field
  TrainConfig other = cfg;
  other.lambda1 = cfg.lambda1 + 1.0;
  CHECK(config_hash(other) != config_hash(cfg));
  other = cfg;
  other.seed += 1;
  CHECK(config_hash(other) != config_hash(cfg));
}

TEST_CASE("load_train_config reads a file") {
  TrainConfig cfg = tiny_config();
  std::string path = temp_path("cfg");
  {
    std::ofstream out(path);
    out << train_config_to_json(cfg);
  }
  TrainConfig back = load_train_config(path);
  CHECK(train_config_to_json(back) == train_config_to_json(cfg));
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_train_config(path), DataError);
}

TEST_CASE("model_keys scope and sharing") {
  // word "f" appears only in partition Q
  CorpusLines lines = {
      {"P", {"a", "b", "a"}},
      {"Q", {"a", "f", "b"}},
  };
  LoadedCorpus lc = load_corpus_lines(lines, 1);
  TrainConfig cfg = tiny_config();

  PriorGraph empty = PriorGraph::from_edges({}, 1.0, 0.0);

  cfg.negative_scope = NegativeScope::kGlobal;
  cfg.alpha_sharing = AlphaSharing::kGlobal;
  auto keys = model_keys(lc.vocab, lc.corpus, empty, cfg);
  // global scope: rho for every (partition, word) pair
  size_t rho_n = 0, alpha_n = 0;
  bool rho_p_f = false;
  for (const auto& k : keys) {
    if (k.role == Role::kRho) {
      ++rho_n;
      if (k.partition == "P" && k.word == "f") rho_p_f = true;
    } else {
      ++alpha_n;
      CHECK(k.partition == "_");
    }
  }
  CHECK(rho_n == 2 * lc.vocab.size());
  CHECK(alpha_n == lc.vocab.size());
  CHECK(rho_p_f);

  cfg.negative_scope = NegativeScope::kPerPartition;
  cfg.alpha_sharing = AlphaSharing::kPerPartition;
  keys = model_keys(lc.vocab, lc.corpus, empty, cfg);
  rho_p_f = false;
  bool alpha_q_f = false, alpha_p_f = false;
  for (const auto& k : keys) {
    if (k.role == Role::kRho && k.partition == "P" && k.word == "f")
      rho_p_f = true;
    if (k.role == Role::kAlpha && k.partition == "Q" && k.word == "f")
      alpha_q_f = true;
    if (k.role == Role::kAlpha && k.partition == "P" && k.word == "f")
      alpha_p_f = true;
  }
  CHECK_FALSE(rho_p_f);  // "f" never occurs in P
  CHECK(alpha_q_f);
  CHECK_FALSE(alpha_p_f);

  // graph nodes not in the corpus are appended
  std::vector<GraphEdge> e = {
      {rho_key("P", "a"), rho_key("X", "zzz"), 1.0}};
  PriorGraph g = PriorGraph::from_edges(e, 1.0, 1.0);
  keys = model_keys(lc.vocab, lc.corpus, g, cfg);
  bool found = false;
  for (const auto& k : keys)
    if (k.role == Role::kRho && k.partition == "X" && k.word == "zzz")
      found = true;
  CHECK(found);
}

TEST_CASE("init_state bounds and determinism") {
  TrainConfig cfg = tiny_config();
  cfg.dim = 8;
  cfg.init_scale = 0.5;
  std::vector<NodeKey> keys = {rho_key("_", "a"), rho_key("_", "b"),
                               alpha_key("_", "a"), alpha_key("_", "b")};
  EmbeddingState s1 = init_state(keys, cfg);
  EmbeddingState s2 = init_state(keys, cfg);
  CHECK(s1.data() == s2.data());
  CHECK(s1.size() == 4);
  CHECK(s1.dim() == 8);
  const double bound = cfg.init_scale / double(cfg.dim);
  bool nonzero = false;
  for (double x : s1.data()) {
    CHECK(std::fabs(x) <= bound);
    if (x != 0.0) nonzero = true;
  }
  CHECK(nonzero);

  TrainConfig cfg2 = cfg;
  cfg2.seed += 1;
  EmbeddingState s3 = init_state(keys, cfg2);
  CHECK(s3.data() != s1.data());
}

TEST_CASE("adam_step first-step oracle") {
  TrainConfig cfg = tiny_config();
  cfg.learning_rate = 0.1;
  cfg.beta1 = 0.9;
  cfg.beta2 = 0.999;
  cfg.epsilon = 1e-8;
  std::vector<NodeKey> keys = {rho_key("_", "a"), rho_key("_", "b")};
  cfg.dim = 2;
  EmbeddingState state(keys, 2);
  state.data() = {1.0, 2.0, 3.0, 4.0};
  OptimizerState opt;
  opt.reset(4);

  GradientBuffer gb(2, 2);
  double* r0 = gb.row(0);
  r0[0] = 2.0;
  r0[1] = -0.5;
  adam_step(state, gb, opt, cfg);

  // bias-corrected first step moves lr * g / (|g| + eps) in ascent
  CHECK(state.data()[0] ==
        doctest::Approx(1.0 + 0.1 * 2.0 / (2.0 + 1e-8)).epsilon(1e-12));
  CHECK(state.data()[1] ==
        doctest::Approx(2.0 - 0.1 * 0.5 / (0.5 + 1e-8)).epsilon(1e-12));
  // untouched row stays put
  CHECK(state.data()[2] == 3.0);
  CHECK(state.data()[3] == 4.0);
  CHECK(opt.step == 1);

  // non-finite parameter raises with context
  double* r1 = gb.row(1);
  r1[0] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(adam_step(state, gb, opt, cfg), NumericError);
}

TEST_CASE("train is bit-identical for a fixed seed") {
  LoadedCorpus lc = load_corpus_lines(tiny_lines(), 1);
  TrainConfig cfg = tiny_config();
  PriorGraph g = tiny_graph();
  TrainResult a = train(lc.corpus, lc.vocab, g, cfg);
  TrainResult b = train(lc.corpus, lc.vocab, g, cfg);
  CHECK(a.state.data() == b.state.data());
  CHECK(a.opt.m == b.opt.m);
  CHECK(a.opt.v == b.opt.v);
  CHECK(a.opt.step == b.opt.step);
  REQUIRE(a.monitor.size() == b.monitor.size());
  for (size_t i = 0; i < a.monitor.size(); ++i)
    CHECK(a.monitor[i].monitor_posterior == b.monitor[i].monitor_posterior);
}

TEST_CASE("monitor has epochs+1 entries starting at zero") {
  LoadedCorpus lc = load_corpus_lines(tiny_lines(), 1);
  TrainConfig cfg = tiny_config();
  cfg.epochs = 3;
  PriorGraph g = tiny_graph();
  std::vector<int> seen;
  TrainResult r = train(lc.corpus, lc.vocab, g, cfg, nullptr,
                        [&](const EpochStats& s) { seen.push_back(s.epoch); });
  REQUIRE(r.monitor.size() == 4);
  CHECK(r.monitor[0].epoch == 0);
  CHECK(r.monitor[3].epoch == 3);
  CHECK(seen == std::vector<int>{0, 1, 2, 3});
  for (const auto& m : r.monitor) CHECK(std::isfinite(m.monitor_posterior));
}

TEST_CASE("lazy prior interval is exact when one batch covers an epoch") {
  LoadedCorpus lc = load_corpus_lines(tiny_lines(), 1);
  TrainConfig cfg = tiny_config();
  cfg.batch_size = 1000;  // ≥ positions, so each epoch is one step
  TrainResult a = train(lc.corpus, lc.vocab, tiny_graph(), cfg);
  TrainConfig lazy = cfg;
  lazy.lazy_prior_interval = 7;
  TrainResult b = train(lc.corpus, lc.vocab, tiny_graph(), lazy);
  CHECK(a.state.data() == b.state.data());
}

TEST_CASE("checkpoint round trip is bit exact") {
  TrainConfig cfg = tiny_config();
  std::vector<NodeKey> keys = {rho_key("_", "a"), rho_key("P", "b"),
                               alpha_key("_", "a")};
  Checkpoint ck;
  ck.config_hash = config_hash(cfg);
  ck.config_json = train_config_to_json(cfg);
  ck.epochs_done = 3;
  ck.state = EmbeddingState(keys, 3);
  Rng rng(5);
  for (double& x : ck.state.data()) x = rng.uniform(-2.0, 2.0);
  ck.opt.reset(ck.state.data().size());
  for (double& x : ck.opt.m) x = rng.uniform(-1.0, 1.0);
  for (double& x : ck.opt.v) x = rng.uniform(0.0, 1.0);
  ck.opt.step = 77;

  std::string path = temp_path("ck");
  save_checkpoint(ck, path);
  Checkpoint back = load_checkpoint(path);
  CHECK(back.config_hash == ck.config_hash);
  CHECK(back.config_json == ck.config_json);
  CHECK(back.epochs_done == ck.epochs_done);
  CHECK(back.state.keys() == ck.state.keys());
  CHECK(back.state.dim() == ck.state.dim());
  CHECK(back.state.data() == ck.state.data());
  CHECK(back.opt.m == ck.opt.m);
  CHECK(back.opt.v == ck.opt.v);
  CHECK(back.opt.step == ck.opt.step);
  std::remove(path.c_str());
}

TEST_CASE("checkpoint loader rejects damage") {
  TrainConfig cfg = tiny_config();
  Checkpoint ck;
  ck.config_hash = config_hash(cfg);
  ck.config_json = train_config_to_json(cfg);
  ck.state = EmbeddingState({rho_key("_", "a")}, 2);
  ck.state.data() = {0.5, -0.5};
  ck.opt.reset(2);
  std::string path = temp_path("ckdmg");
  save_checkpoint(ck, path);

  std::ifstream in(path, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  in.close();

  {  // truncated
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), std::streamsize(bytes.size() / 2));
  }
  CHECK_THROWS_AS(load_checkpoint(path), DataError);
  {  // trailing garbage
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), std::streamsize(bytes.size()));
    out << "extra";
  }
  CHECK_THROWS_AS(load_checkpoint(path), DataError);
  {  // wrong magic
    std::string mangled = bytes;
    mangled[0] = 'X';
    std::ofstream out(path, std::ios::binary);
    out.write(mangled.data(), std::streamsize(mangled.size()));
  }
  CHECK_THROWS_AS(load_checkpoint(path), DataError);
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_checkpoint(path), DataError);  // missing file
}

TEST_CASE("resume reproduces the uninterrupted run bit for bit") {
  LoadedCorpus lc = load_corpus_lines(tiny_lines(), 1);
  PriorGraph g = tiny_graph();
  TrainConfig full = tiny_config();
  full.epochs = 4;

  TrainResult straight = train(lc.corpus, lc.vocab, g, full);

  // first leg stops after two epochs; the checkpoint carries the full
  // run's config so the second leg resumes the same trajectory
  TrainConfig first = full;
  first.epochs = 2;
  TrainResult leg1 = train(lc.corpus, lc.vocab, g, first);
  Checkpoint mid;
  mid.config_hash = config_hash(full);
  mid.config_json = train_config_to_json(full);
  mid.epochs_done = 2;
  mid.state = leg1.state;
  mid.opt = leg1.opt;
  TrainResult leg2 = train(lc.corpus, lc.vocab, g, full, &mid);

  CHECK(leg2.state.data() == straight.state.data());
  CHECK(leg2.opt.m == straight.opt.m);
  CHECK(leg2.opt.v == straight.opt.v);
  CHECK(leg2.opt.step == straight.opt.step);

  // wrong config hash is refused
  Checkpoint bad = mid;
  bad.config_hash += 1;
  CHECK_THROWS_AS(train(lc.corpus, lc.vocab, g, full, &bad), DataError);

  // mismatched node set is refused
  Checkpoint wrong_keys = mid;
  wrong_keys.state = EmbeddingState({rho_key("_", "a")}, full.dim);
  wrong_keys.opt.reset(wrong_keys.state.data().size());
  CHECK_THROWS_AS(train(lc.corpus, lc.vocab, g, full, &wrong_keys),
                  DataError);
}

TEST_CASE("training stays finite across the lambda grid") {
  LoadedCorpus lc = load_corpus_lines(tiny_lines(), 1);
  for (Likelihood like : {Likelihood::kSgns, Likelihood::kCbow}) {
    for (double l1 : {0.0, 1.0, 1e4, 1e6}) {
      TrainConfig cfg = tiny_config();
      cfg.likelihood = like;
      cfg.lambda1 = l1;
      PriorGraph g = tiny_graph(cfg.lambda0, l1);
      TrainResult r = train(lc.corpus, lc.vocab, g, cfg);
      for (double x : r.state.data()) REQUIRE(std::isfinite(x));
      CHECK(std::isfinite(r.monitor.back().monitor_posterior));
    }
  }
}

TEST_CASE("sgd optimizer trains and differs from adam") {
  LoadedCorpus lc = load_corpus_lines(tiny_lines(), 1);
  TrainConfig cfg = tiny_config();
  TrainResult adam = train(lc.corpus, lc.vocab, tiny_graph(), cfg);
  cfg.optimizer = Optimizer::kSgd;
  cfg.learning_rate = 0.02;
  TrainResult sgd = train(lc.corpus, lc.vocab, tiny_graph(), cfg);
  for (double x : sgd.state.data()) REQUIRE(std::isfinite(x));
  CHECK(sgd.state.data() != adam.state.data());
}

TEST_CASE("empty corpora are data errors") {
  CorpusLines one_token = {{"_", {"a"}}};
  LoadedCorpus lc = load_corpus_lines(one_token, 1);
  TrainConfig cfg = tiny_config();
  PriorGraph empty = PriorGraph::from_edges({}, 1.0, 0.0);
  CHECK_THROWS_AS(train(lc.corpus, lc.vocab, empty, cfg), DataError);
}

TEST_CASE("planted collocation dominates the co-occurrence logits") {
  synth::TopicOptions topt;
  topt.vocab = 120;
  topt.tokens = 24000;
  topt.topics = 6;
  topt.segment_len = 18;
  topt.zipf = 0.9;
  topt.seed = 202;
  auto coll = synth::planted_collocation(topt, 3);

  CorpusLines lines;
  lines.reserve(coll.lines.size());
  for (const auto& seg : coll.lines) lines.emplace_back("_", seg);
  LoadedCorpus lc = load_corpus_lines(lines, 1);

  TrainConfig cfg;
  cfg.dim = 16;
  cfg.window = 3;
  cfg.negatives = 4;
  cfg.epochs = 12;
  cfg.batch_size = 256;
  cfg.learning_rate = 0.08;
  cfg.lambda0 = 1.0;
  cfg.lambda1 = 0.0;
  cfg.likelihood = Likelihood::kSgns;
  cfg.seed = 33;
  PriorGraph empty = PriorGraph::from_edges({}, cfg.lambda0, 0.0);
  TrainResult r = train(lc.corpus, lc.vocab, empty, cfg);

  // the fit pushes rho(colla) . alpha(w) highest for the planted partner
  int64_t qa = r.state.index_of(rho_key("_", coll.word_a));
  REQUIRE(qa >= 0);
  double best_other = -std::numeric_limits<double>::infinity();
  double partner = 0.0;
  for (size_t i = 0; i < r.state.size(); ++i) {
    const NodeKey& k = r.state.key(i);
    if (k.role != Role::kAlpha || k.word == coll.word_a) continue;
    double s = 0.0;
    for (int d = 0; d < cfg.dim; ++d)
      s += r.state.row(size_t(qa))[d] * r.state.row(i)[d];
    if (k.word == coll.word_b)
      partner = s;
    else if (s > best_other)
      best_other = s;
  }
  CHECK(partner > best_other + 0.5);
}
