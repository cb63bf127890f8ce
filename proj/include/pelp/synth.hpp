#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pelp/corpus.hpp"
#include "pelp/eval.hpp"
#include "pelp/graph.hpp"

namespace pelp {
namespace synth {

// Topic-structured Zipf text: every segment draws one topic; tokens come
// from that topic's word subset (interleaved assignment word i -> topic
// i % topics) except for a `leak` fraction drawn from the whole vocabulary.
struct TopicOptions {
  size_t vocab = 2000;
  size_t tokens = 100000;
  int topics = 20;
  int segment_len = 20;
  double leak = 0.1;
  double zipf = 1.0;  // weight of rank r is (r+1)^-zipf
  uint64_t seed = 1;
  std::string word_prefix = "w";
};

int topic_of_word(size_t word_index, int topics);
std::string word_name(const TopicOptions& opt, size_t word_index);

std::vector<std::vector<std::string>> topic_corpus(const TopicOptions& opt);

// Language B is a token-relabeled copy of language A, so `pairs` are exact
// ground-truth translations.
struct BilingualCorpus {
  CorpusLines lines;
  std::vector<std::pair<std::string, std::string>> pairs;  // (A word, B word)
  std::string label_a;
  std::string label_b;
};
BilingualCorpus mirrored_bilingual(const TopicOptions& opt,
                                   const std::string& label_a = "A",
                                   const std::string& label_b = "B");

// Two groups share the topic model except for `planted` words, which are
// attached to different host topics per group; those words acquire
// group-contrastive contexts while the rest of the vocabulary stays neutral.
struct TwoGroupOptions {
  TopicOptions base;
  int planted = 10;
  std::string group_a = "R";
  std::string group_b = "D";
  double plant_rate = 0.5;  // insertion probability per host-topic segment
};
struct TwoGroupCorpus {
  CorpusLines lines;
  std::vector<std::string> planted_words;
};
TwoGroupCorpus two_group_contrastive(const TwoGroupOptions& opt);

// Appends "<prefix>colla <prefix>collb" to every n-th segment, so the pair
// co-occurs far above chance.
struct CollocationCorpus {
  std::vector<std::vector<std::string>> lines;
  std::string word_a;
  std::string word_b;
};
CollocationCorpus planted_collocation(const TopicOptions& opt,
                                      size_t every_n_segments = 4);

// Dictionary-style study: reciprocal strong-pair edges between same-topic
// words plus a benchmark of held-out same-topic (high score) and cross-topic
// (low score) pairs, disjoint from the edge pairs.
struct SimStudy {
  std::vector<GraphEdge> edges;
  SimilarityBenchmark bench;
};
SimStudy topic_similarity_study(const TopicOptions& opt,
                                size_t edge_pairs_per_topic,
                                size_t bench_same, size_t bench_cross,
                                uint64_t seed);

void write_partitioned(const CorpusLines& lines, std::ostream& out);
void write_plain(const std::vector<std::vector<std::string>>& lines,
                 std::ostream& out);

}  // namespace synth
}  // namespace pelp
