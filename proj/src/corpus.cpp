#include "pelp/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "pelp/errors.hpp"

namespace pelp {

Vocabulary::Vocabulary(std::vector<std::string> words,
                       std::vector<uint64_t> counts, double noise_exponent)
    : words_(std::move(words)), counts_(std::move(counts)) {
  if (words_.size() != counts_.size())
    throw DataError("vocabulary words/counts size mismatch");
  index_.reserve(words_.size());
  for (uint32_t i = 0; i < words_.size(); ++i) {
    if (!index_.emplace(words_[i], i).second)
      throw DataError("duplicate word in vocabulary: " + words_[i]);
  }
  set_noise_exponent(noise_exponent);
}

uint32_t Vocabulary::id_of(const std::string& w) const {
  auto it = index_.find(w);
  return it == index_.end() ? kNoWord : it->second;
}

void Vocabulary::set_noise_exponent(double e) {
  noise_exponent_ = e;
  noise_weights_.resize(counts_.size());
  for (size_t i = 0; i < counts_.size(); ++i)
    noise_weights_[i] = std::pow(double(counts_[i]), e);
}

static Vocabulary vocab_from_counts(
    const std::unordered_map<std::string, uint64_t>& raw_counts, int min_count,
    size_t max_vocab, double noise_exponent) {
  if (min_count < 1) throw DataError("min_count must be >= 1");
  std::vector<std::pair<std::string, uint64_t>> kept;
  kept.reserve(raw_counts.size());
  for (const auto& [w, c] : raw_counts)
    if (c >= uint64_t(min_count)) kept.emplace_back(w, c);
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (kept.size() > max_vocab) kept.resize(max_vocab);
  if (kept.empty()) throw DataError("empty vocabulary");
  std::vector<std::string> words;
  std::vector<uint64_t> counts;
  words.reserve(kept.size());
  counts.reserve(kept.size());
  for (auto& [w, c] : kept) {
    words.push_back(std::move(w));
    counts.push_back(c);
  }
  return Vocabulary(std::move(words), std::move(counts), noise_exponent);
}

Vocabulary build_vocab(const std::vector<std::string>& tokens, int min_count,
                       size_t max_vocab, double noise_exponent) {
  std::unordered_map<std::string, uint64_t> counts;
  for (const auto& t : tokens) ++counts[t];
  return vocab_from_counts(counts, min_count, max_vocab, noise_exponent);
}

Vocabulary build_vocab_from_counts(
    const std::unordered_map<std::string, uint64_t>& raw_counts, int min_count,
    size_t max_vocab, double noise_exponent) {
  return vocab_from_counts(raw_counts, min_count, max_vocab, noise_exponent);
}

void PartitionedCorpus::add_segment(const std::string& partition_label,
                                    std::vector<uint32_t> tokens,
                                    size_t vocab_size) {
  auto it = partition_index_.find(partition_label);
  uint32_t pid;
  if (it == partition_index_.end()) {
    pid = uint32_t(partitions_.size());
    partitions_.push_back(partition_label);
    partition_index_.emplace(partition_label, pid);
    partition_counts_.emplace_back();
  } else {
    pid = it->second;
  }
  auto& pc = partition_counts_[pid];
  for (uint32_t t : tokens) {
    if (t >= vocab_size) throw DataError("token id out of vocabulary range");
    ++pc[t];
  }
  total_tokens_ += tokens.size();
  segments_.push_back(Segment{pid, std::move(tokens)});
}

uint32_t PartitionedCorpus::partition_id(const std::string& label) const {
  auto it = partition_index_.find(label);
  return it == partition_index_.end() ? UINT32_MAX : it->second;
}

uint64_t PartitionedCorpus::partition_count(uint32_t pid,
                                            uint32_t word) const {
  if (pid >= partition_counts_.size()) return 0;
  const auto& pc = partition_counts_[pid];
  auto it = pc.find(word);
  return it == pc.end() ? 0 : it->second;
}

void for_each_window(
    const std::vector<uint32_t>& tokens, int m,
    const std::function<void(size_t pos, uint32_t center, const uint32_t* ctx,
                             size_t ctx_len)>& fn) {
  if (m < 1) throw DataError("window size must be >= 1");
  const size_t n = tokens.size();
  std::vector<uint32_t> ctx;
  ctx.reserve(2 * size_t(m));
  for (size_t i = 0; i < n; ++i) {
    ctx.clear();
    size_t lo = i >= size_t(m) ? i - size_t(m) : 0;
    size_t hi = std::min(n, i + size_t(m) + 1);
    for (size_t j = lo; j < hi; ++j)
      if (j != i) ctx.push_back(tokens[j]);
    fn(i, tokens[i], ctx.data(), ctx.size());
  }
}

std::vector<WindowSample> iter_windows(const PartitionedCorpus& corpus,
                                       int m) {
  std::vector<WindowSample> out;
  out.reserve(corpus.total_tokens());
  for (const auto& seg : corpus.segments()) {
    const std::string& label = corpus.partition_label(seg.partition);
    for_each_window(seg.tokens, m,
                    [&](size_t, uint32_t center, const uint32_t* ctx,
                        size_t ctx_len) {
                      WindowSample s;
                      s.center = center;
                      s.context.assign(ctx, ctx + ctx_len);
                      s.partition = label;
                      out.push_back(std::move(s));
                    });
  }
  return out;
}

NegativeSampler::NegativeSampler(const std::vector<double>& weights) {
  if (weights.empty()) throw DataError("negative sampler needs a vocabulary");
  cumulative_.resize(weights.size());
  double run = 0.0;
  for (size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0.0))
      throw DataError("noise weights must be positive");
    run += weights[i];
    cumulative_[i] = run;
  }
}

uint32_t NegativeSampler::draw(Rng& rng) const {
  double u = rng.uniform01() * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) --it;
  return uint32_t(it - cumulative_.begin());
}

std::vector<uint32_t> draw_negatives(const Vocabulary& vocab, int k,
                                     Rng& rng) {
  NegativeSampler sampler(vocab.noise_weights());
  std::vector<uint32_t> out;
  out.reserve(size_t(std::max(k, 0)));
  for (int i = 0; i < k; ++i) out.push_back(sampler.draw(rng));
  return out;
}

// --- file formats -----------------------------------------------------------

static void lowercase_inplace(std::string& s) {
  for (char& c : s) c = char(std::tolower(uint8_t(c)));
}

static std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(std::move(tok));
  return out;
}

namespace {
struct RawSegment {
  std::string partition;
  std::vector<std::string> tokens;
};
}  // namespace

static std::vector<RawSegment> read_raw_segments(const std::string& path,
                                                 const CorpusReadOptions& opts) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file: " + path);
  std::vector<RawSegment> segs;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    RawSegment seg;
    std::string text;
    if (opts.partitioned) {
      auto tab = line.find('\t');
      if (tab == std::string::npos) {
        if (line.empty()) continue;
        throw DataError("corpus line " + std::to_string(lineno) +
                        ": expected partition<TAB>text");
      }
      seg.partition = line.substr(0, tab);
      if (seg.partition.empty())
        throw DataError("corpus line " + std::to_string(lineno) +
                        ": empty partition label");
      text = line.substr(tab + 1);
    } else {
      seg.partition = "_";
      text = line;
    }
    if (opts.lowercase) lowercase_inplace(text);
    seg.tokens = split_ws(text);
    if (seg.tokens.empty()) continue;
    segs.push_back(std::move(seg));
  }
  return segs;
}

// word2vec-style discard: keep with prob min(1, sqrt(t/f) + t/f), f the
// corpus frequency. Applied during encoding so vocabulary counts stay raw.
static std::vector<uint32_t> encode_tokens(
    const std::vector<std::string>& tokens, const Vocabulary& vocab,
    const CorpusReadOptions& opts, uint64_t total_count, size_t seg_index) {
  std::vector<uint32_t> ids;
  ids.reserve(tokens.size());
  Rng rng(mix64(opts.subsample_seed, 0x5ab5a3713ull, seg_index));
  for (size_t i = 0; i < tokens.size(); ++i) {
    uint32_t id = vocab.id_of(tokens[i]);
    if (id == kNoWord) continue;
    if (opts.subsample_threshold > 0.0 && total_count > 0) {
      double f = double(vocab.count(id)) / double(total_count);
      double t = opts.subsample_threshold;
      double keep = std::sqrt(t / f) + t / f;
      if (keep < 1.0 && rng.uniform01() >= keep) continue;
    }
    ids.push_back(id);
  }
  return ids;
}

LoadedCorpus load_corpus_file(const std::string& path, int min_count,
                              size_t max_vocab, const CorpusReadOptions& opts,
                              double noise_exponent) {
  auto segs = read_raw_segments(path, opts);
  std::unordered_map<std::string, uint64_t> counts;
  uint64_t total = 0;
  for (const auto& s : segs)
    for (const auto& t : s.tokens) {
      ++counts[t];
      ++total;
    }
  LoadedCorpus lc{vocab_from_counts(counts, min_count, max_vocab,
                                    noise_exponent),
                  {}};
  uint64_t kept_total = 0;
  for (uint64_t c : lc.vocab.counts()) kept_total += c;
  for (size_t si = 0; si < segs.size(); ++si) {
    auto ids = encode_tokens(segs[si].tokens, lc.vocab, opts, kept_total, si);
    if (ids.empty()) continue;
    lc.corpus.add_segment(segs[si].partition, std::move(ids),
                          lc.vocab.size());
  }
  if (lc.corpus.total_tokens() == 0)
    throw DataError("corpus is empty after encoding");
  return lc;
}

LoadedCorpus load_corpus_lines(const CorpusLines& lines, int min_count,
                               size_t max_vocab, double noise_exponent) {
  std::unordered_map<std::string, uint64_t> counts;
  for (const auto& [label, tokens] : lines)
    for (const auto& t : tokens) ++counts[t];
  LoadedCorpus lc{
      vocab_from_counts(counts, min_count, max_vocab, noise_exponent), {}};
  for (const auto& [label, tokens] : lines) {
    std::vector<uint32_t> ids;
    ids.reserve(tokens.size());
    for (const auto& t : tokens) {
      uint32_t id = lc.vocab.id_of(t);
      if (id != kNoWord) ids.push_back(id);
    }
    if (ids.empty()) continue;
    lc.corpus.add_segment(label, std::move(ids), lc.vocab.size());
  }
  if (lc.corpus.total_tokens() == 0)
    throw DataError("corpus is empty after encoding");
  return lc;
}

PartitionedCorpus encode_corpus_file(const std::string& path,
                                     const Vocabulary& vocab,
                                     const CorpusReadOptions& opts) {
  auto segs = read_raw_segments(path, opts);
  uint64_t kept_total = 0;
  for (uint64_t c : vocab.counts()) kept_total += c;
  PartitionedCorpus corpus;
  for (size_t si = 0; si < segs.size(); ++si) {
    auto ids = encode_tokens(segs[si].tokens, vocab, opts, kept_total, si);
    if (ids.empty()) continue;
    corpus.add_segment(segs[si].partition, std::move(ids), vocab.size());
  }
  return corpus;
}

void write_vocab_tsv(const Vocabulary& vocab, std::ostream& out) {
  for (size_t i = 0; i < vocab.size(); ++i)
    out << vocab.word(uint32_t(i)) << '\t' << vocab.count(uint32_t(i))
        << '\n';
}

Vocabulary read_vocab_tsv(std::istream& in, double noise_exponent) {
  std::vector<std::string> words;
  std::vector<uint64_t> counts;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw DataError("vocab line " + std::to_string(lineno) +
                      ": expected word<TAB>count");
    words.push_back(line.substr(0, tab));
    try {
      counts.push_back(std::stoull(line.substr(tab + 1)));
    } catch (const std::exception&) {
      throw DataError("vocab line " + std::to_string(lineno) +
                      ": bad count");
    }
  }
  if (words.empty()) throw DataError("empty vocabulary");
  return Vocabulary(std::move(words), std::move(counts), noise_exponent);
}

}  // namespace pelp
