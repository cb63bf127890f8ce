#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pelp/graph.hpp"

namespace pelp {

struct SimilarityBenchmark {
  struct Pair {
    std::string word1;
    std::string word2;
    double score = 0.0;
  };
  std::vector<Pair> pairs;
};

// Whitespace/TSV `word1 word2 score`; a non-numeric third column on the
// first line is treated as a header and skipped. '#' lines ignored.
SimilarityBenchmark read_similarity_benchmark(std::istream& in);
SimilarityBenchmark read_similarity_benchmark_file(const std::string& path);

struct BliLexicon {
  std::vector<std::pair<std::string, std::string>> pairs;  // source, target
  std::string direction;
};

// TSV `source<TAB>target` (or whitespace-separated); '#' lines ignored.
BliLexicon read_lexicon(std::istream& in);
BliLexicon read_lexicon_file(const std::string& path);

// Spearman rank correlation with average ranks for ties. Requires >= 2
// observations; returns 0 when either side has zero rank variance.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

double cosine_similarity(const double* a, const double* b, size_t n);

struct SpearmanResult {
  double rho = 0.0;
  double coverage = 0.0;  // evaluated pairs / all pairs
  size_t evaluated = 0;
  size_t skipped = 0;
};

// Model score per pair = cosine of the rho vectors in `partition`; pairs
// with an OOV member are skipped. Zero evaluable pairs is an error.
SpearmanResult spearman_eval(const SimilarityBenchmark& bench,
                             const EmbeddingState& state,
                             const std::string& partition = "_");

struct Neighbor {
  NodeKey key;
  double cosine = 0.0;
};

// Pool = rows with the query's role, minus the query itself; optionally
// restricted to one partition. Descending cosine, ties lexicographic.
std::vector<Neighbor> nearest_neighbors(const NodeKey& query,
                                        const EmbeddingState& state, size_t k,
                                        const std::string& partition_filter =
                                            std::string());

struct BliResult {
  std::vector<int> k_levels;
  std::vector<double> precision;  // aligned with k_levels
  size_t evaluated = 0;           // distinct source words scored
  size_t skipped = 0;             // sources dropped by OOV filtering
};

// Hit at level k when any gold target of the source word appears among the
// k nearest rho vectors of the target partition.
BliResult bli_eval(const BliLexicon& lexicon, const EmbeddingState& state,
                   const std::string& source_partition,
                   const std::string& target_partition,
                   std::vector<int> k_levels = {1, 5, 15});

// Orthogonal W (d x d, row-major) minimizing sum_i ||x_i W - y_i||^2, rows
// x_i of X and y_i of Y (both n x d row-major): W = U V^T from the SVD of
// X^T Y. Rank-0 input is an error.
std::vector<double> procrustes_map(const std::vector<double>& X,
                                   const std::vector<double>& Y, size_t n,
                                   size_t d);

double procrustes_residual(const std::vector<double>& X,
                           const std::vector<double>& Y,
                           const std::vector<double>& W, size_t n, size_t d);

struct DivergenceReport {
  struct Entry {
    std::string word;
    double distance = 0.0;
  };
  std::vector<Entry> ranked;          // descending, lexicographic ties
  std::vector<std::string> missing;   // words absent from either partition
};

// Euclidean distance ||rho_{w,a} - rho_{w,b}|| per word; top_k kept.
DivergenceReport group_divergence(const EmbeddingState& state,
                                  const std::vector<std::string>& words,
                                  const std::string& partition_a,
                                  const std::string& partition_b,
                                  size_t top_k);

// ||rho_{a@t,w} - rho_{b@t,w}|| for t = 0..timesteps-1 (dynamic-group runs).
std::vector<double> divergence_series(const EmbeddingState& state,
                                      const std::string& word,
                                      const std::string& group_a,
                                      const std::string& group_b,
                                      int timesteps);

}  // namespace pelp
