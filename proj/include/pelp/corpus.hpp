#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "pelp/rng.hpp"

namespace pelp {

constexpr uint32_t kNoWord = UINT32_MAX;

// Word types with counts, dense ids 0..V-1 (descending count, ties
// lexicographic) and the smoothed unigram weights used for negative sampling.
class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<std::string> words, std::vector<uint64_t> counts,
             double noise_exponent = 0.75);

  size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }
  const std::vector<uint64_t>& counts() const { return counts_; }
  const std::string& word(uint32_t id) const { return words_[id]; }
  uint64_t count(uint32_t id) const { return counts_[id]; }
  uint32_t id_of(const std::string& w) const;  // kNoWord if absent
  bool contains(const std::string& w) const { return id_of(w) != kNoWord; }

  double noise_exponent() const { return noise_exponent_; }
  const std::vector<double>& noise_weights() const { return noise_weights_; }
  void set_noise_exponent(double e);

 private:
  std::vector<std::string> words_;
  std::vector<uint64_t> counts_;
  std::unordered_map<std::string, uint32_t> index_;
  std::vector<double> noise_weights_;
  double noise_exponent_ = 0.75;
};

// min_count >= 1; words below it are dropped, then the max_vocab most
// frequent survive (ties kept lexicographically smaller first).
Vocabulary build_vocab(const std::vector<std::string>& tokens, int min_count,
                       size_t max_vocab = SIZE_MAX,
                       double noise_exponent = 0.75);
Vocabulary build_vocab_from_counts(
    const std::unordered_map<std::string, uint64_t>& raw_counts, int min_count,
    size_t max_vocab = SIZE_MAX, double noise_exponent = 0.75);

// Encoded corpus: one token-id sequence per segment (line), each tagged with
// a partition label. Single-partition corpora use the label "_".
class PartitionedCorpus {
 public:
  struct Segment {
    uint32_t partition;  // index into partitions()
    std::vector<uint32_t> tokens;
  };

  void add_segment(const std::string& partition_label,
                   std::vector<uint32_t> tokens, size_t vocab_size);

  const std::vector<Segment>& segments() const { return segments_; }
  const std::vector<std::string>& partitions() const { return partitions_; }
  const std::string& partition_label(uint32_t pid) const {
    return partitions_[pid];
  }
  uint32_t partition_id(const std::string& label) const;  // UINT32_MAX absent
  size_t total_tokens() const { return total_tokens_; }

  // occurrence counts of word w within partition pid
  uint64_t partition_count(uint32_t pid, uint32_t word) const;
  bool occurs_in(uint32_t pid, uint32_t word) const {
    return partition_count(pid, word) > 0;
  }

 private:
  std::vector<Segment> segments_;
  std::vector<std::string> partitions_;
  std::unordered_map<std::string, uint32_t> partition_index_;
  std::vector<std::unordered_map<uint32_t, uint64_t>> partition_counts_;
  size_t total_tokens_ = 0;
};

struct WindowSample {
  uint32_t center = 0;
  std::vector<uint32_t> context;  // at most 2M ids, never crosses a segment
  std::string partition;
};

// One sample per token position, segments in corpus order. Windows are
// clipped at segment boundaries.
std::vector<WindowSample> iter_windows(const PartitionedCorpus& corpus, int m);

// Streaming variant used by the trainer; fn(segment_index, position,
// center, context pointer, context length).
void for_each_window(
    const std::vector<uint32_t>& tokens, int m,
    const std::function<void(size_t pos, uint32_t center, const uint32_t* ctx,
                             size_t ctx_len)>& fn);

// Draws from counts^exponent. Allows repeats; never excludes the positive.
class NegativeSampler {
 public:
  explicit NegativeSampler(const std::vector<double>& weights);
  uint32_t draw(Rng& rng) const;
  size_t size() const { return cumulative_.size(); }

 private:
  std::vector<double> cumulative_;
};

std::vector<uint32_t> draw_negatives(const Vocabulary& vocab, int k, Rng& rng);

// --- file formats -----------------------------------------------------------

struct CorpusReadOptions {
  bool partitioned = false;  // TSV partition<TAB>text, else plain lines
  bool lowercase = false;
  double subsample_threshold = 0.0;  // 0 disables frequent-word subsampling
  uint64_t subsample_seed = 1;
};

// Two-pass load: builds the vocabulary, then encodes segments (OOV dropped).
struct LoadedCorpus {
  Vocabulary vocab;
  PartitionedCorpus corpus;
};
LoadedCorpus load_corpus_file(const std::string& path, int min_count,
                              size_t max_vocab, const CorpusReadOptions& opts,
                              double noise_exponent = 0.75);

// In-memory variant: (partition label, tokens) per segment.
using CorpusLines =
    std::vector<std::pair<std::string, std::vector<std::string>>>;
LoadedCorpus load_corpus_lines(const CorpusLines& lines, int min_count,
                               size_t max_vocab = SIZE_MAX,
                               double noise_exponent = 0.75);

// Encode with an existing vocabulary.
PartitionedCorpus encode_corpus_file(const std::string& path,
                                     const Vocabulary& vocab,
                                     const CorpusReadOptions& opts);

void write_vocab_tsv(const Vocabulary& vocab, std::ostream& out);
Vocabulary read_vocab_tsv(std::istream& in, double noise_exponent = 0.75);

}  // namespace pelp
