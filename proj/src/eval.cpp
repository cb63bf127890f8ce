#include "pelp/eval.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>

#include "pelp/errors.hpp"
#include "pelp/kernels.hpp"

namespace pelp {

SimilarityBenchmark read_similarity_benchmark(std::istream& in) {
  SimilarityBenchmark bench;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string w1, w2, score_str;
    if (!(ss >> w1 >> w2 >> score_str)) {
      if (lineno == 1) continue;  // short header line
      throw DataError("benchmark line " + std::to_string(lineno) +
                      ": expected word1 word2 score");
    }
    try {
      size_t used = 0;
      double score = std::stod(score_str, &used);
      if (used != score_str.size()) throw std::invalid_argument("trailing");
      bench.pairs.push_back({w1, w2, score});
    } catch (const std::exception&) {
      if (lineno == 1) continue;  // header row like "Word1 Word2 Human"
      throw DataError("benchmark line " + std::to_string(lineno) +
                      ": bad score '" + score_str + "'");
    }
  }
  return bench;
}

SimilarityBenchmark read_similarity_benchmark_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open benchmark: " + path);
  return read_similarity_benchmark(in);
}

BliLexicon read_lexicon(std::istream& in) {
  BliLexicon lex;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string src, tgt;
    if (!(ss >> src >> tgt))
      throw DataError("lexicon line " + std::to_string(lineno) +
                      ": expected source and target words");
    lex.pairs.emplace_back(std::move(src), std::move(tgt));
  }
  return lex;
}

BliLexicon read_lexicon_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open lexicon: " + path);
  return read_lexicon(in);
}

namespace {

// average ranks, 1-based
std::vector<double> avg_ranks(const std::vector<double>& v) {
  const size_t n = v.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t(0));
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    double r = 0.5 * double(i + j) + 1.0;  // mean of ranks i+1..j+1
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw DataError("spearman inputs differ in size");
  const size_t n = a.size();
  if (n < 2) throw DataError("spearman needs at least 2 observations");
  std::vector<double> ra = avg_ranks(a), rb = avg_ranks(b);
  double ma = 0, mb = 0;
  for (size_t i = 0; i < n; ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= double(n);
  mb /= double(n);
  double num = 0, va = 0, vb = 0;
  for (size_t i = 0; i < n; ++i) {
    double da = ra[i] - ma, db = rb[i] - mb;
    num += da * db;
    va += da * da;
    vb += db * db;
  }
  if (va == 0.0 || vb == 0.0) return 0.0;
  return num / std::sqrt(va * vb);
}

double cosine_similarity(const double* a, const double* b, size_t n) {
  double na = kernels::squared_norm(a, n);
  double nb = kernels::squared_norm(b, n);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return kernels::dot(a, b, n) / std::sqrt(na * nb);
}

SpearmanResult spearman_eval(const SimilarityBenchmark& bench,
                             const EmbeddingState& state,
                             const std::string& partition) {
  SpearmanResult res;
  std::vector<double> model, human;
  for (const auto& p : bench.pairs) {
    int64_t i1 = state.index_of(rho_key(partition, p.word1));
    int64_t i2 = state.index_of(rho_key(partition, p.word2));
    if (i1 < 0 || i2 < 0) {
      ++res.skipped;
      continue;
    }
    model.push_back(cosine_similarity(state.row(size_t(i1)),
                                      state.row(size_t(i2)),
                                      size_t(state.dim())));
    human.push_back(p.score);
  }
  res.evaluated = model.size();
  if (res.evaluated == 0)
    throw DataError("no benchmark pair is covered by the vocabulary");
  if (res.evaluated < 2)
    throw DataError("fewer than 2 evaluable benchmark pairs");
  res.coverage = bench.pairs.empty()
                     ? 0.0
                     : double(res.evaluated) / double(bench.pairs.size());
  res.rho = spearman(model, human);
  return res;
}

std::vector<Neighbor> nearest_neighbors(const NodeKey& query,
                                        const EmbeddingState& state, size_t k,
                                        const std::string& partition_filter) {
  int64_t qi = state.index_of(query);
  if (qi < 0) throw DataError("unknown query node: " + format_node(query));
  const double* q = state.row(size_t(qi));
  const size_t d = size_t(state.dim());
  std::vector<Neighbor> all;
  for (size_t i = 0; i < state.size(); ++i) {
    if (int64_t(i) == qi) continue;
    const NodeKey& key = state.key(i);
    if (key.role != query.role) continue;
    if (!partition_filter.empty() && key.partition != partition_filter)
      continue;
    all.push_back({key, cosine_similarity(q, state.row(i), d)});
  }
  auto better = [](const Neighbor& a, const Neighbor& b) {
    if (a.cosine != b.cosine) return a.cosine > b.cosine;
    return a.key < b.key;
  };
  if (all.size() > k) {
    std::partial_sort(all.begin(), all.begin() + std::ptrdiff_t(k), all.end(),
                      better);
    all.resize(k);
  } else {
    std::sort(all.begin(), all.end(), better);
  }
  return all;
}

BliResult bli_eval(const BliLexicon& lexicon, const EmbeddingState& state,
                   const std::string& source_partition,
                   const std::string& target_partition,
                   std::vector<int> k_levels) {
  if (k_levels.empty()) throw DataError("bli_eval needs precision levels");
  std::sort(k_levels.begin(), k_levels.end());
  const int k_max = k_levels.back();
  if (k_max < 1) throw DataError("precision levels must be >= 1");

  // group gold targets per source word, keeping only resolvable entries
  std::vector<std::pair<std::string, std::vector<std::string>>> gold;
  size_t skipped = 0;
  for (const auto& [src, tgt] : lexicon.pairs) {
    if (state.index_of(rho_key(source_partition, src)) < 0 ||
        state.index_of(rho_key(target_partition, tgt)) < 0) {
      ++skipped;
      continue;
    }
    auto it = std::find_if(gold.begin(), gold.end(),
                           [&](const auto& g) { return g.first == src; });
    if (it == gold.end())
      gold.push_back({src, {tgt}});
    else if (std::find(it->second.begin(), it->second.end(), tgt) ==
             it->second.end())
      it->second.push_back(tgt);
  }
  if (gold.empty())
    throw DataError("no lexicon pair is covered by the embedding state");

  BliResult res;
  res.k_levels = k_levels;
  res.precision.assign(k_levels.size(), 0.0);
  res.skipped = skipped;
  for (const auto& [src, tgts] : gold) {
    auto nn = nearest_neighbors(rho_key(source_partition, src), state,
                                size_t(k_max), target_partition);
    // rank of the best-ranked gold target, or k_max+1 when absent
    size_t best = size_t(k_max) + 1;
    for (size_t r = 0; r < nn.size(); ++r) {
      for (const auto& t : tgts)
        if (nn[r].key.word == t) {
          best = r + 1;
          break;
        }
      if (best <= r + 1) break;
    }
    for (size_t li = 0; li < k_levels.size(); ++li)
      if (best <= size_t(k_levels[li])) res.precision[li] += 1.0;
  }
  res.evaluated = gold.size();
  for (double& p : res.precision) p /= double(res.evaluated);
  return res;
}

std::vector<double> procrustes_map(const std::vector<double>& X,
                                   const std::vector<double>& Y, size_t n,
                                   size_t d) {
  if (X.size() != n * d || Y.size() != n * d)
    throw DataError("procrustes matrices must both be n x d");
  if (n == 0 || d == 0) throw DataError("procrustes input is empty");
  using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                            Eigen::RowMajor>;
  Eigen::Map<const Mat> mx(X.data(), Eigen::Index(n), Eigen::Index(d));
  Eigen::Map<const Mat> my(Y.data(), Eigen::Index(n), Eigen::Index(d));
  Mat m = mx.transpose() * my;  // d x d
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (!(svd.singularValues().maxCoeff() > 0.0))
    throw DataError("degenerate procrustes input (rank 0)");
  Mat w = svd.matrixU() * svd.matrixV().transpose();
  return std::vector<double>(w.data(), w.data() + d * d);
}

double procrustes_residual(const std::vector<double>& X,
                           const std::vector<double>& Y,
                           const std::vector<double>& W, size_t n, size_t d) {
  if (X.size() != n * d || Y.size() != n * d || W.size() != d * d)
    throw DataError("procrustes residual shape mismatch");
  double total = 0.0;
  std::vector<double> mapped(d);
  for (size_t i = 0; i < n; ++i) {
    const double* x = X.data() + i * d;
    const double* y = Y.data() + i * d;
    for (size_t j = 0; j < d; ++j) {
      double v = 0.0;
      for (size_t c = 0; c < d; ++c) v += x[c] * W[c * d + j];
      mapped[j] = v;
    }
    total += kernels::squared_dist(mapped.data(), y, d);
  }
  return total;
}

DivergenceReport group_divergence(const EmbeddingState& state,
                                  const std::vector<std::string>& words,
                                  const std::string& partition_a,
                                  const std::string& partition_b,
                                  size_t top_k) {
  DivergenceReport report;
  for (const auto& w : words) {
    int64_t ia = state.index_of(rho_key(partition_a, w));
    int64_t ib = state.index_of(rho_key(partition_b, w));
    if (ia < 0 || ib < 0) {
      report.missing.push_back(w);
      continue;
    }
    double dist = std::sqrt(kernels::squared_dist(
        state.row(size_t(ia)), state.row(size_t(ib)), size_t(state.dim())));
    report.ranked.push_back({w, dist});
  }
  std::sort(report.ranked.begin(), report.ranked.end(),
            [](const auto& a, const auto& b) {
              if (a.distance != b.distance) return a.distance > b.distance;
              return a.word < b.word;
            });
  if (report.ranked.size() > top_k) report.ranked.resize(top_k);
  return report;
}

std::vector<double> divergence_series(const EmbeddingState& state,
                                      const std::string& word,
                                      const std::string& group_a,
                                      const std::string& group_b,
                                      int timesteps) {
  if (timesteps < 1) throw DataError("divergence series needs timesteps >= 1");
  std::vector<double> series;
  series.reserve(size_t(timesteps));
  for (int t = 0; t < timesteps; ++t) {
    NodeKey ka = rho_key(group_a + "@" + std::to_string(t), word);
    NodeKey kb = rho_key(group_b + "@" + std::to_string(t), word);
    int64_t ia = state.index_of(ka);
    int64_t ib = state.index_of(kb);
    if (ia < 0) throw DataError("missing node: " + format_node(ka));
    if (ib < 0) throw DataError("missing node: " + format_node(kb));
    series.push_back(std::sqrt(kernels::squared_dist(
        state.row(size_t(ia)), state.row(size_t(ib)), size_t(state.dim()))));
  }
  return series;
}

}  // namespace pelp
