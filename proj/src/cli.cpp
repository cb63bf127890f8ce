#include "pelp/cli.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <unordered_set>

#include "CLI11.hpp"
#include "json.hpp"
#include "pelp/corpus.hpp"
#include "pelp/errors.hpp"
#include "pelp/eval.hpp"
#include "pelp/train.hpp"
#include "pelp/verify.hpp"

namespace pelp {

namespace {

constexpr const char* kToolVersion = "pelp 0.1.0";

uint64_t fnv1a64_bytes(const std::string& bytes) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string hex64(uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)h);
  return buf;
}

// Collects inputs/outputs and writes the run manifest next to the artifacts.
struct Manifest {
  explicit Manifest(std::string command)
      : command_(std::move(command)),
        t0_(std::chrono::steady_clock::now()) {}

  void add_input(const std::string& path) {
    inputs_.emplace_back(path, "fnv1a64:" + hex64(fnv1a64_bytes(
                                   read_file_bytes(path))));
  }
  void add_output(const std::string& path) { outputs_.push_back(path); }
  void set_seed(uint64_t s) { seed_ = s; }
  void set_config(nlohmann::json cfg) { config_ = std::move(cfg); }

  void write(const std::string& path) const {
    nlohmann::json j;
    j["tool"] = kToolVersion;
    j["command"] = command_;
    if (seed_) j["seed"] = *seed_;
    if (!config_.is_null()) j["config"] = config_;
    nlohmann::json in = nlohmann::json::object();
    for (const auto& [p, d] : inputs_) in[p] = d;
    j["inputs"] = in;
    j["outputs"] = outputs_;
    double secs = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t0_)
                      .count();
    j["wall_clock_seconds"] = secs;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write manifest: " + path);
    out << j.dump(2) << '\n';
    if (!out) throw DataError("write failure: " + path);
  }

 private:
  std::string command_;
  std::optional<uint64_t> seed_;
  nlohmann::json config_;
  std::vector<std::pair<std::string, std::string>> inputs_;
  std::vector<std::string> outputs_;
  std::chrono::steady_clock::time_point t0_;
};

std::optional<uint64_t> env_seed() {
  const char* s = std::getenv("PELP_SEED");
  if (!s || !*s) return std::nullopt;
  char* end = nullptr;
  unsigned long long v = std::strtoull(s, &end, 10);
  if (end == s || *end != '\0')
    throw DataError("PELP_SEED must be an unsigned integer");
  return uint64_t(v);
}

uint64_t resolve_seed(const std::optional<uint64_t>& flag, uint64_t fallback) {
  if (flag) return *flag;
  if (auto e = env_seed()) return *e;
  return fallback;
}

void note_threads(int threads) {
  if (threads < 1) throw DataError("--threads must be >= 1");
  if (threads > 1)
    std::cerr << "note: this build runs single-threaded; continuing with 1 "
                 "worker\n";
}

// First whitespace token per nonempty line; works for plain lists and for
// vocab TSVs. '#' lines are comments.
std::vector<std::string> read_words_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read file: " + path);
  std::vector<std::string> words;
  std::unordered_set<std::string> seen;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string w;
    if (!(ss >> w)) continue;
    if (seen.insert(w).second) words.push_back(w);
  }
  if (words.empty()) throw DataError("no words in file: " + path);
  return words;
}

std::unordered_set<std::string> read_word_set(const std::string& path) {
  auto words = read_words_file(path);
  return {words.begin(), words.end()};
}

void lower_inplace(std::string& s) {
  for (char& c : s)
    if (c >= 'A' && c <= 'Z') c = char(c - 'A' + 'a');
}

// `head mention mention ...` per line (whitespace separated; the first tab,
// if any, is whitespace too). Repeated heads merge.
std::map<std::string, std::set<std::string>> read_definitions_file(
    const std::string& path, bool lowercase) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read file: " + path);
  std::map<std::string, std::set<std::string>> defs;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string head, w;
    if (!(ss >> head)) continue;
    if (lowercase) lower_inplace(head);
    auto& mentions = defs[head];
    while (ss >> w) {
      if (lowercase) lower_inplace(w);
      mentions.insert(w);
    }
  }
  if (defs.empty()) throw DataError("no definitions in file: " + path);
  return defs;
}

// Stream sink: `--out path` or stdout.
struct OutSink {
  explicit OutSink(const std::string& path) : path_(path) {
    if (!path_.empty()) {
      file_.open(path_, std::ios::binary);
      if (!file_) throw DataError("cannot write file: " + path_);
    }
  }
  std::ostream& stream() { return path_.empty() ? std::cout : file_; }
  void finish(Manifest& man) {
    if (path_.empty()) return;
    file_.flush();
    if (!file_) throw DataError("write failure: " + path_);
    file_.close();
    man.add_output(path_);
    man.write(path_ + ".manifest.json");
  }
  bool to_file() const { return !path_.empty(); }

 private:
  std::string path_;
  std::ofstream file_;
};

EmbeddingState checkpoint_state(const std::string& path, Manifest& man) {
  man.add_input(path);
  return load_checkpoint(path).state;
}

std::vector<std::string> parse_groups(const std::vector<std::string>& groups) {
  if (groups.size() < 2) throw DataError("need at least 2 group labels");
  return groups;
}

// ---- subcommand option bags -------------------------------------------------

struct VocabOpts {
  std::string corpus, out;
  bool partitioned = false, lowercase = false;
  int min_count = 1;
  uint64_t max_vocab = 0;  // 0 = unlimited
};

struct DictOpts {
  std::string definitions, vocab, out;
  bool lowercase = false;
};

struct ChainOpts {
  std::string words, out;
  int timesteps = 2;
};

struct GroupsOpts {
  std::string words, out;
  std::vector<std::string> groups;
  int timesteps = 0;  // dynamic-groups only
};

struct TranslationsOpts {
  std::string pairs, vocab_a, vocab_b, out;
  std::string partition_a = "A", partition_b = "B";
};

struct FromEdgesOpts {
  std::string in, out;
};

struct TrainOpts {
  std::string config, corpus, graph, out, resume;
  bool partitioned = false, lowercase = false;
  int min_count = 1;
  uint64_t max_vocab = 0;
  double subsample = 0.0;
  std::optional<uint64_t> seed;
  int threads = 1;
};

struct EvalSimOpts {
  std::string checkpoint, bench, out;
  std::string partition = "_";
};

struct EvalBliOpts {
  std::string checkpoint, lexicon, source, target, out;
  std::vector<int> k_levels = {1, 5, 15};
};

struct DiffOpts {
  std::string checkpoint, group_a, group_b, words, out;
  uint64_t top = 20;
  bool series = false;
  int timesteps = 0;
};

struct NeighborsOpts {
  std::string checkpoint, query, partition, out;
  uint64_t k = 10;
};

struct VerifyOpts {
  std::string which, out;
  std::optional<uint64_t> seed;
  int threads = 1;
};

struct ExportOpts {
  std::string checkpoint, in, out;
  std::string which = "both";
  std::string partition;
  bool any_partition = true;
};

// ---- subcommand bodies --------------------------------------------------------

int cmd_vocab(const VocabOpts& o) {
  Manifest man("vocab");
  man.add_input(o.corpus);
  CorpusReadOptions ro;
  ro.partitioned = o.partitioned;
  ro.lowercase = o.lowercase;
  size_t max_vocab = o.max_vocab ? size_t(o.max_vocab) : SIZE_MAX;
  LoadedCorpus lc = load_corpus_file(o.corpus, o.min_count, max_vocab, ro);
  OutSink sink(o.out);
  write_vocab_tsv(lc.vocab, sink.stream());
  sink.finish(man);
  std::cerr << "vocab: kept " << lc.vocab.size() << " words\n";
  return 0;
}

int write_edges_out(const std::vector<GraphEdge>& edges, const std::string& out,
                    Manifest& man) {
  // assembling validates structure (duplicates, self-loops, weights)
  PriorGraph::from_edges(edges, 1.0, 1.0);
  OutSink sink(out);
  write_edge_list(edges, sink.stream());
  sink.finish(man);
  std::cerr << "graph: " << edges.size() << " edges\n";
  return 0;
}

int cmd_graph_dict(const DictOpts& o) {
  Manifest man("graph dict");
  man.add_input(o.definitions);
  man.add_input(o.vocab);
  auto defs = read_definitions_file(o.definitions, o.lowercase);
  auto vocab = read_word_set(o.vocab);
  return write_edges_out(build_dict_graph(defs, vocab), o.out, man);
}

int cmd_graph_chain(const ChainOpts& o) {
  Manifest man("graph chain");
  man.add_input(o.words);
  return write_edges_out(
      build_chain_graph(read_words_file(o.words), o.timesteps), o.out, man);
}

int cmd_graph_groups(const GroupsOpts& o) {
  Manifest man("graph groups");
  man.add_input(o.words);
  return write_edges_out(
      build_group_complete_graph(read_words_file(o.words),
                                 parse_groups(o.groups)),
      o.out, man);
}

int cmd_graph_dynamic(const GroupsOpts& o) {
  Manifest man("graph dynamic-groups");
  man.add_input(o.words);
  return write_edges_out(
      build_dynamic_group_graph(read_words_file(o.words),
                                parse_groups(o.groups), o.timesteps),
      o.out, man);
}

int cmd_graph_translations(const TranslationsOpts& o) {
  Manifest man("graph translations");
  man.add_input(o.pairs);
  man.add_input(o.vocab_a);
  man.add_input(o.vocab_b);
  BliLexicon lex = read_lexicon_file(o.pairs);
  size_t skipped = 0;
  auto edges = build_translation_graph(lex.pairs, o.partition_a, o.partition_b,
                                       read_word_set(o.vocab_a),
                                       read_word_set(o.vocab_b), &skipped);
  std::cerr << "graph: skipped " << skipped << " OOV pairs\n";
  return write_edges_out(edges, o.out, man);
}

int cmd_graph_from_edges(const FromEdgesOpts& o) {
  Manifest man("graph from-edges");
  man.add_input(o.in);
  return write_edges_out(read_edge_list_file(o.in), o.out, man);
}

int cmd_train(const TrainOpts& o) {
  note_threads(o.threads);
  Manifest man("train");
  man.add_input(o.config);
  man.add_input(o.corpus);
  TrainConfig cfg = load_train_config(o.config);
  cfg.seed = resolve_seed(o.seed, cfg.seed);
  man.set_seed(cfg.seed);

  CorpusReadOptions ro;
  ro.partitioned = o.partitioned;
  ro.lowercase = o.lowercase;
  ro.subsample_threshold = o.subsample;
  ro.subsample_seed = mix64(cfg.seed, 0x5eedull);
  size_t max_vocab = o.max_vocab ? size_t(o.max_vocab) : SIZE_MAX;
  LoadedCorpus lc = load_corpus_file(o.corpus, o.min_count, max_vocab, ro,
                                     cfg.noise_exponent);

  std::vector<GraphEdge> edges;
  if (!o.graph.empty()) {
    man.add_input(o.graph);
    edges = read_edge_list_file(o.graph);
  }
  PriorGraph graph = PriorGraph::from_edges(edges, cfg.lambda0, cfg.lambda1);

  Checkpoint resume_ck;
  const Checkpoint* resume = nullptr;
  if (!o.resume.empty()) {
    man.add_input(o.resume);
    resume_ck = load_checkpoint(o.resume);
    resume = &resume_ck;
  }

  TrainResult tr =
      train(lc.corpus, lc.vocab, graph, cfg, resume,
            [](const EpochStats& s) {
              std::cerr << "epoch " << s.epoch << " monitor "
                        << s.monitor_posterior << '\n';
            });

  std::filesystem::create_directories(o.out);
  const std::string ck_path = o.out + "/checkpoint.bin";
  Checkpoint ck;
  ck.config_hash = config_hash(cfg);
  ck.config_json = train_config_to_json(cfg);
  ck.epochs_done = uint64_t(cfg.epochs);
  ck.state = std::move(tr.state);
  ck.opt = std::move(tr.opt);
  save_checkpoint(ck, ck_path);
  man.add_output(ck_path);

  const std::string vocab_path = o.out + "/vocab.tsv";
  {
    std::ofstream vf(vocab_path, std::ios::binary);
    if (!vf) throw DataError("cannot write file: " + vocab_path);
    write_vocab_tsv(lc.vocab, vf);
  }
  man.add_output(vocab_path);

  const std::string mon_path = o.out + "/monitor.tsv";
  {
    std::ofstream mf(mon_path, std::ios::binary);
    if (!mf) throw DataError("cannot write file: " + mon_path);
    mf << "epoch\tmonitor_posterior\n";
    mf.precision(17);
    for (const auto& s : tr.monitor)
      mf << s.epoch << '\t' << s.monitor_posterior << '\n';
  }
  man.add_output(mon_path);

  man.set_config(nlohmann::json::parse(ck.config_json));
  man.write(o.out + "/manifest.json");
  std::cerr << "train: " << tr.positions << " positions, "
            << tr.steps_per_epoch << " steps/epoch\n";
  return 0;
}

int cmd_eval_sim(const EvalSimOpts& o) {
  Manifest man("eval-sim");
  EmbeddingState state = checkpoint_state(o.checkpoint, man);
  man.add_input(o.bench);
  SimilarityBenchmark bench = read_similarity_benchmark_file(o.bench);
  SpearmanResult r = spearman_eval(bench, state, o.partition);
  OutSink sink(o.out);
  auto& out = sink.stream();
  out.precision(10);
  out << "metric\tvalue\n";
  out << "spearman\t" << r.rho << '\n';
  out << "pairs_evaluated\t" << r.evaluated << '\n';
  out << "pairs_skipped\t" << r.skipped << '\n';
  out << "coverage\t" << r.coverage << '\n';
  sink.finish(man);
  return 0;
}

int cmd_eval_bli(const EvalBliOpts& o) {
  Manifest man("eval-bli");
  EmbeddingState state = checkpoint_state(o.checkpoint, man);
  man.add_input(o.lexicon);
  BliLexicon lex = read_lexicon_file(o.lexicon);
  BliResult r = bli_eval(lex, state, o.source, o.target, o.k_levels);
  OutSink sink(o.out);
  auto& out = sink.stream();
  out.precision(10);
  out << "metric\tvalue\n";
  for (size_t i = 0; i < r.k_levels.size(); ++i)
    out << "p@" << r.k_levels[i] << '\t' << r.precision[i] << '\n';
  out << "sources_evaluated\t" << r.evaluated << '\n';
  out << "sources_skipped\t" << r.skipped << '\n';
  sink.finish(man);
  return 0;
}

int cmd_neighbors(const NeighborsOpts& o) {
  Manifest man("neighbors");
  EmbeddingState state = checkpoint_state(o.checkpoint, man);
  NodeKey q = parse_node(o.query);
  auto hits = nearest_neighbors(q, state, size_t(o.k), o.partition);
  OutSink sink(o.out);
  auto& out = sink.stream();
  out.precision(10);
  out << "node\tcosine\n";
  for (const auto& h : hits)
    out << format_node(h.key) << '\t' << h.cosine << '\n';
  sink.finish(man);
  return 0;
}

// words present as rho rows in both partitions, sorted
std::vector<std::string> shared_rho_words(const EmbeddingState& state,
                                          const std::string& pa,
                                          const std::string& pb) {
  std::set<std::string> a, b;
  for (const auto& k : state.keys()) {
    if (k.role != Role::kRho) continue;
    if (k.partition == pa) a.insert(k.word);
    if (k.partition == pb) b.insert(k.word);
  }
  std::vector<std::string> words;
  for (const auto& w : a)
    if (b.count(w)) words.push_back(w);
  return words;
}

int cmd_diff_groups(const DiffOpts& o) {
  Manifest man("diff-groups");
  EmbeddingState state = checkpoint_state(o.checkpoint, man);
  if (!o.words.empty()) man.add_input(o.words);

  if (!o.series) {
    std::vector<std::string> words =
        o.words.empty() ? shared_rho_words(state, o.group_a, o.group_b)
                        : read_words_file(o.words);
    if (words.empty())
      throw DataError("no words shared by partitions " + o.group_a + " and " +
                      o.group_b);
    DivergenceReport rep =
        group_divergence(state, words, o.group_a, o.group_b, size_t(o.top));
    OutSink sink(o.out);
    auto& out = sink.stream();
    out.precision(10);
    out << "word\tdistance\n";
    for (const auto& e : rep.ranked)
      out << e.word << '\t' << e.distance << '\n';
    sink.finish(man);
    if (!rep.missing.empty())
      std::cerr << "diff-groups: " << rep.missing.size()
                << " words missing from a partition\n";
    return 0;
  }

  if (o.timesteps < 1)
    throw DataError("--series requires --timesteps >= 1");
  std::vector<std::string> words;
  if (!o.words.empty()) {
    words = read_words_file(o.words);
  } else {
    // words present at every timestep in both groups
    std::set<std::string> keep;
    bool first = true;
    for (int t = 0; t < o.timesteps; ++t) {
      for (const auto* g : {&o.group_a, &o.group_b}) {
        auto step = shared_rho_words(state, *g + "@" + std::to_string(t),
                                     *g + "@" + std::to_string(t));
        std::set<std::string> here(step.begin(), step.end());
        if (first) {
          keep = std::move(here);
          first = false;
        } else {
          std::set<std::string> inter;
          for (const auto& w : keep)
            if (here.count(w)) inter.insert(w);
          keep = std::move(inter);
        }
      }
    }
    words.assign(keep.begin(), keep.end());
  }
  if (words.empty()) throw DataError("no words cover every timestep");

  struct Row {
    std::string word;
    std::vector<double> series;
    double mean = 0.0;
  };
  std::vector<Row> rows;
  for (const auto& w : words) {
    Row r;
    r.word = w;
    r.series =
        divergence_series(state, w, o.group_a, o.group_b, o.timesteps);
    for (double d : r.series) r.mean += d;
    r.mean /= double(r.series.size());
    rows.push_back(std::move(r));
  }
  std::sort(rows.begin(), rows.end(), [](const Row& x, const Row& y) {
    if (x.mean != y.mean) return x.mean > y.mean;
    return x.word < y.word;
  });
  if (rows.size() > o.top) rows.resize(size_t(o.top));

  OutSink sink(o.out);
  auto& out = sink.stream();
  out.precision(10);
  out << "word,timestep,distance\n";
  for (const auto& r : rows)
    for (size_t t = 0; t < r.series.size(); ++t)
      out << r.word << ',' << t << ',' << r.series[t] << '\n';
  sink.finish(man);
  return 0;
}

int cmd_verify(const VerifyOpts& o) {
  note_threads(o.threads);
  Manifest man("verify " + o.which);
  uint64_t seed = resolve_seed(o.seed, 1);
  man.set_seed(seed);
  std::vector<VerifyRow> rows;
  if (o.which == "grad") rows = run_verify_grad(seed);
  else if (o.which == "prop1") rows = run_verify_prop1(seed);
  else if (o.which == "prop2") rows = run_verify_prop2(seed);
  else if (o.which == "prop3") rows = run_verify_prop3(seed);
  else if (o.which == "prop4") rows = run_verify_prop4(seed);
  else if (o.which == "prop5") rows = run_verify_prop5(seed);
  else throw DataError("unknown verify check: " + o.which);
  OutSink sink(o.out);
  write_verify_report(rows, sink.stream());
  sink.finish(man);
  bool all_pass = true;
  for (const auto& r : rows) all_pass = all_pass && r.pass;
  return all_pass ? 0 : 3;
}

int cmd_export(const ExportOpts& o) {
  Manifest man("export");
  if (o.checkpoint.empty() == o.in.empty())
    throw DataError("export needs exactly one of --checkpoint or --in");
  EmbeddingState state;
  if (!o.checkpoint.empty()) {
    state = checkpoint_state(o.checkpoint, man);
  } else {
    man.add_input(o.in);
    state = read_embeddings_text_file(o.in);
  }
  std::vector<size_t> rows;
  for (size_t i = 0; i < state.size(); ++i) {
    const NodeKey& k = state.key(i);
    if (o.which == "rho" && k.role != Role::kRho) continue;
    if (o.which == "alpha" && k.role != Role::kAlpha) continue;
    if (!o.any_partition && k.partition != o.partition) continue;
    rows.push_back(i);
  }
  if (rows.empty()) throw DataError("export filter selected no rows");
  OutSink sink(o.out);
  write_embeddings_text(state, rows, sink.stream());
  sink.finish(man);
  return 0;
}

int run_cli_impl(int argc, const char* const* argv) {
  CLI::App app{std::string(kToolVersion) +
               " - embeddings with graph-Laplacian priors"};
  app.require_subcommand(1);
  int rc = 0;

  VocabOpts vo;
  auto* v = app.add_subcommand("vocab", "Build a vocabulary TSV");
  v->add_option("--corpus", vo.corpus, "Corpus file")
      ->required()
      ->check(CLI::ExistingFile);
  v->add_flag("--partitioned", vo.partitioned, "TSV partition<TAB>text lines");
  v->add_flag("--lowercase", vo.lowercase, "Lowercase ASCII before counting");
  v->add_option("--min-count", vo.min_count, "Minimum word count")
      ->check(CLI::PositiveNumber);
  v->add_option("--max-vocab", vo.max_vocab, "Keep most frequent N (0 = all)");
  v->add_option("--out", vo.out, "Output path (default stdout)");
  v->callback([&] { rc = cmd_vocab(vo); });

  auto* g = app.add_subcommand("graph", "Build prior graph edge lists");
  g->require_subcommand(1);

  DictOpts dicto;
  auto* gd = g->add_subcommand("dict", "Reciprocal dictionary mentions");
  gd->add_option("--definitions", dicto.definitions,
                 "Definitions file: `word mention mention ...` per line")
      ->required()
      ->check(CLI::ExistingFile);
  gd->add_option("--vocab", dicto.vocab, "Vocabulary TSV or word list")
      ->required()
      ->check(CLI::ExistingFile);
  gd->add_flag("--lowercase", dicto.lowercase, "Lowercase definition words");
  gd->add_option("--out", dicto.out, "Output path (default stdout)");
  gd->callback([&] { rc = cmd_graph_dict(dicto); });

  ChainOpts chaino;
  auto* gc = g->add_subcommand("chain", "Per-word temporal chains");
  gc->add_option("--words", chaino.words, "Word list or vocabulary TSV")
      ->required()
      ->check(CLI::ExistingFile);
  gc->add_option("--timesteps", chaino.timesteps, "Number of timesteps")
      ->required()
      ->check(CLI::Range(2, 1 << 20));
  gc->add_option("--out", chaino.out, "Output path (default stdout)");
  gc->callback([&] { rc = cmd_graph_chain(chaino); });

  GroupsOpts groupso;
  auto* gg = g->add_subcommand("groups", "Complete per-word group graphs");
  gg->add_option("--words", groupso.words, "Word list or vocabulary TSV")
      ->required()
      ->check(CLI::ExistingFile);
  gg->add_option("--groups", groupso.groups, "Group labels (comma separated)")
      ->required()
      ->delimiter(',');
  gg->add_option("--out", groupso.out, "Output path (default stdout)");
  gg->callback([&] { rc = cmd_graph_groups(groupso); });

  GroupsOpts dyno;
  auto* gy = g->add_subcommand("dynamic-groups",
                               "Group graphs plus temporal chains");
  gy->add_option("--words", dyno.words, "Word list or vocabulary TSV")
      ->required()
      ->check(CLI::ExistingFile);
  gy->add_option("--groups", dyno.groups, "Group labels (comma separated)")
      ->required()
      ->delimiter(',');
  gy->add_option("--timesteps", dyno.timesteps, "Number of timesteps")
      ->required()
      ->check(CLI::Range(1, 1 << 20));
  gy->add_option("--out", dyno.out, "Output path (default stdout)");
  gy->callback([&] { rc = cmd_graph_dynamic(dyno); });

  TranslationsOpts tro;
  auto* gt = g->add_subcommand("translations", "Cross-lingual pair edges");
  gt->add_option("--pairs", tro.pairs, "Lexicon TSV source<TAB>target")
      ->required()
      ->check(CLI::ExistingFile);
  gt->add_option("--partition-a", tro.partition_a, "Source partition label");
  gt->add_option("--partition-b", tro.partition_b, "Target partition label");
  gt->add_option("--vocab-a", tro.vocab_a, "Source vocabulary TSV")
      ->required()
      ->check(CLI::ExistingFile);
  gt->add_option("--vocab-b", tro.vocab_b, "Target vocabulary TSV")
      ->required()
      ->check(CLI::ExistingFile);
  gt->add_option("--out", tro.out, "Output path (default stdout)");
  gt->callback([&] { rc = cmd_graph_translations(tro); });

  FromEdgesOpts feo;
  auto* gf = g->add_subcommand("from-edges", "Validate and normalize a TSV");
  gf->add_option("--in", feo.in, "Edge list TSV")
      ->required()
      ->check(CLI::ExistingFile);
  gf->add_option("--out", feo.out, "Output path (default stdout)");
  gf->callback([&] { rc = cmd_graph_from_edges(feo); });

  TrainOpts to;
  auto* t = app.add_subcommand("train", "MAP-train embeddings");
  t->add_option("--config", to.config, "Config JSON")
      ->required()
      ->check(CLI::ExistingFile);
  t->add_option("--corpus", to.corpus, "Corpus file")
      ->required()
      ->check(CLI::ExistingFile);
  t->add_flag("--partitioned", to.partitioned, "TSV partition<TAB>text lines");
  t->add_flag("--lowercase", to.lowercase, "Lowercase ASCII");
  t->add_option("--min-count", to.min_count, "Minimum word count")
      ->check(CLI::PositiveNumber);
  t->add_option("--max-vocab", to.max_vocab, "Keep most frequent N (0 = all)");
  t->add_option("--subsample", to.subsample,
                "Frequent-word subsampling threshold (0 disables)");
  t->add_option("--graph", to.graph, "Prior edge list TSV")
      ->check(CLI::ExistingFile);
  t->add_option("--resume", to.resume, "Checkpoint to continue from")
      ->check(CLI::ExistingFile);
  t->add_option("--seed", to.seed, "Overrides PELP_SEED and the config seed");
  t->add_option("--threads", to.threads, "Worker threads");
  t->add_option("--out", to.out, "Run directory")->required();
  t->callback([&] { rc = cmd_train(to); });

  EvalSimOpts eso;
  auto* es = app.add_subcommand("eval-sim", "Word-similarity Spearman");
  es->add_option("--checkpoint", eso.checkpoint, "Checkpoint file")
      ->required()
      ->check(CLI::ExistingFile);
  es->add_option("--bench", eso.bench, "Benchmark `word1 word2 score`")
      ->required()
      ->check(CLI::ExistingFile);
  es->add_option("--partition", eso.partition, "Rho partition to score");
  es->add_option("--out", eso.out, "Output path (default stdout)");
  es->callback([&] { rc = cmd_eval_sim(eso); });

  EvalBliOpts ebo;
  auto* eb = app.add_subcommand("eval-bli", "Bilingual lexicon induction");
  eb->add_option("--checkpoint", ebo.checkpoint, "Checkpoint file")
      ->required()
      ->check(CLI::ExistingFile);
  eb->add_option("--lexicon", ebo.lexicon, "Held-out lexicon TSV")
      ->required()
      ->check(CLI::ExistingFile);
  eb->add_option("--source", ebo.source, "Source partition")->required();
  eb->add_option("--target", ebo.target, "Target partition")->required();
  eb->add_option("--k", ebo.k_levels, "Precision levels (comma separated)")
      ->delimiter(',');
  eb->add_option("--out", ebo.out, "Output path (default stdout)");
  eb->callback([&] { rc = cmd_eval_bli(ebo); });

  DiffOpts dgo;
  auto* dg = app.add_subcommand("diff-groups", "Group divergence ranking");
  dg->add_option("--checkpoint", dgo.checkpoint, "Checkpoint file")
      ->required()
      ->check(CLI::ExistingFile);
  dg->add_option("--group-a", dgo.group_a, "First group label")->required();
  dg->add_option("--group-b", dgo.group_b, "Second group label")->required();
  dg->add_option("--words", dgo.words, "Word list (default: shared words)")
      ->check(CLI::ExistingFile);
  dg->add_option("--top", dgo.top, "Keep top N words");
  dg->add_flag("--series", dgo.series, "Per-timestep CSV over g@t partitions");
  dg->add_option("--timesteps", dgo.timesteps, "Timesteps for --series");
  dg->add_option("--out", dgo.out, "Output path (default stdout)");
  dg->callback([&] { rc = cmd_diff_groups(dgo); });

  NeighborsOpts no;
  auto* nb = app.add_subcommand("neighbors", "Nearest neighbors by cosine");
  nb->add_option("--checkpoint", no.checkpoint, "Checkpoint file")
      ->required()
      ->check(CLI::ExistingFile);
  nb->add_option("--query", no.query, "Node key, e.g. rho:_:dog")->required();
  nb->add_option("--k", no.k, "Neighbor count");
  nb->add_option("--partition", no.partition, "Restrict pool to a partition");
  nb->add_option("--out", no.out, "Output path (default stdout)");
  nb->callback([&] { rc = cmd_neighbors(no); });

  VerifyOpts vro;
  auto* vr = app.add_subcommand("verify", "Run a proposition oracle");
  vr->require_subcommand(1);
  for (const char* which :
       {"grad", "prop1", "prop2", "prop3", "prop4", "prop5"}) {
    auto* s = vr->add_subcommand(which, "");
    s->add_option("--seed", vro.seed, "Check seed (default PELP_SEED or 1)");
    s->add_option("--threads", vro.threads, "Worker threads");
    s->add_option("--out", vro.out, "Report path (default stdout)");
    s->callback([&, which] {
      vro.which = which;
      rc = cmd_verify(vro);
    });
  }

  ExportOpts xo;
  auto* x = app.add_subcommand("export", "Write embeddings as text");
  x->add_option("--checkpoint", xo.checkpoint, "Checkpoint file")
      ->check(CLI::ExistingFile);
  x->add_option("--in", xo.in, "Previously exported text file")
      ->check(CLI::ExistingFile);
  x->add_option("--which", xo.which, "rho, alpha, or both")
      ->check(CLI::IsMember({"rho", "alpha", "both"}));
  auto* part =
      x->add_option("--partition", xo.partition, "Only keys of this partition");
  x->add_option("--out", xo.out, "Output path (default stdout)");
  x->callback([&] {
    xo.any_partition = part->count() == 0;
    rc = cmd_export(xo);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  return rc;
}

}  // namespace

void write_embeddings_text(const EmbeddingState& state,
                           const std::vector<size_t>& rows,
                           std::ostream& out) {
  const int d = state.dim();
  out << rows.size() << ' ' << d << '\n';
  char buf[64];
  for (size_t r : rows) {
    out << format_node(state.key(r));
    const double* v = state.row(r);
    for (int i = 0; i < d; ++i) {
      std::snprintf(buf, sizeof buf, "%.6g", v[i]);
      out << ' ' << buf;
    }
    out << '\n';
  }
}

EmbeddingState read_embeddings_text(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty embedding file");
  size_t n = 0;
  int d = 0;
  {
    std::istringstream ss(line);
    std::string extra;
    if (!(ss >> n >> d) || (ss >> extra))
      throw DataError("embedding header must be `N D`");
  }
  if (d < 1) throw DataError("embedding dimension must be >= 1");
  std::vector<NodeKey> keys;
  std::vector<double> values;
  keys.reserve(n);
  values.reserve(n * size_t(d));
  for (size_t r = 0; r < n; ++r) {
    if (!std::getline(in, line))
      throw DataError("embedding file truncated at row " + std::to_string(r));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ss(line);
    std::string key;
    if (!(ss >> key))
      throw DataError("embedding row " + std::to_string(r) + " is empty");
    keys.push_back(parse_node(key));
    for (int i = 0; i < d; ++i) {
      double v = 0.0;
      if (!(ss >> v))
        throw DataError("embedding row " + std::to_string(r) +
                        " has fewer than " + std::to_string(d) + " values");
      values.push_back(v);
    }
    std::string extra;
    if (ss >> extra)
      throw DataError("embedding row " + std::to_string(r) +
                      " has trailing content");
  }
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty())
      throw DataError("embedding file has trailing content");
  }
  EmbeddingState state(std::move(keys), d);
  std::copy(values.begin(), values.end(), state.data().begin());
  return state;
}

EmbeddingState read_embeddings_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read file: " + path);
  return read_embeddings_text(in);
}

int run_cli(int argc, const char* const* argv) {
  try {
    return run_cli_impl(argc, argv);
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(int(argv.size()), argv.data());
}

}  // namespace pelp
