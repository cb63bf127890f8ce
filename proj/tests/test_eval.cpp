#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "pelp/errors.hpp"
#include "pelp/eval.hpp"
#include "pelp/graph.hpp"
#include "pelp/rng.hpp"

#include <Eigen/Dense>

using namespace pelp;

namespace {

// n x d row-major random orthogonal-ish data helpers
std::vector<double> random_matrix(size_t n, size_t d, uint64_t seed) {
  Rng rng(seed);
  std::vector<double> m(n * d);
  for (double& x : m) x = rng.uniform(-1.0, 1.0);
  return m;
}

// random d x d orthogonal matrix via Householder QR
std::vector<double> random_orthogonal(size_t d, uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd A(d, d);
  for (size_t i = 0; i < d; ++i)
    for (size_t j = 0; j < d; ++j) A(i, j) = rng.uniform(-1.0, 1.0);
  Eigen::MatrixXd Q = Eigen::HouseholderQR<Eigen::MatrixXd>(A).householderQ();
  std::vector<double> W(d * d);
  for (size_t i = 0; i < d; ++i)
    for (size_t j = 0; j < d; ++j) W[i * d + j] = Q(i, j);
  return W;
}

std::vector<double> apply_map(const std::vector<double>& X,
                              const std::vector<double>& W, size_t n,
                              size_t d) {
  std::vector<double> Y(n * d, 0.0);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < d; ++j)
      for (size_t k = 0; k < d; ++k)
        Y[i * d + j] += X[i * d + k] * W[k * d + j];
  return Y;
}

EmbeddingState state_with(const std::vector<NodeKey>& keys,
                          const std::vector<double>& data, int dim) {
  EmbeddingState s(keys, dim);
  s.data() = data;
  return s;
}

}  // namespace

TEST_CASE("spearman basics") {
  CHECK(spearman({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
  CHECK(spearman({1, 2, 3, 4}, {9, 7, 5, 3}) == doctest::Approx(-1.0));
  // monotone transforms leave rho unchanged
  CHECK(spearman({1, 5, 2, 9}, {2, 6, 3, 10}) == doctest::Approx(1.0));
  CHECK(spearman({0.1, 0.5, 0.2, 0.9}, {std::exp(0.1), std::exp(0.5),
                                         std::exp(0.2), std::exp(0.9)}) ==
        doctest::Approx(1.0));
}

TEST_CASE("spearman tie handling matches the closed form") {
  // ranks a = 1,2,3; b = 1.5,1.5,3 -> rho = sqrt(3)/2
  double rho = spearman({1, 2, 3}, {1, 1, 2});
  CHECK(rho == doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-12));
}

TEST_CASE("spearman degenerate inputs") {
  CHECK(spearman({1, 2, 3}, {5, 5, 5}) == 0.0);
  CHECK(spearman({7, 7, 7}, {1, 2, 3}) == 0.0);
  CHECK_THROWS_AS(spearman({1.0}, {2.0}), DataError);
  CHECK_THROWS_AS(spearman({1, 2}, {1, 2, 3}), DataError);
}

TEST_CASE("cosine similarity oracle") {
  std::vector<double> a = {1, 0, 0};
  std::vector<double> b = {0, 1, 0};
  std::vector<double> c = {2, 0, 0};
  CHECK(cosine_similarity(a.data(), b.data(), 3) == doctest::Approx(0.0));
  CHECK(cosine_similarity(a.data(), c.data(), 3) == doctest::Approx(1.0));
  std::vector<double> d = {1, 1, 0};
  CHECK(cosine_similarity(a.data(), d.data(), 3) ==
        doctest::Approx(1.0 / std::sqrt(2.0)));
}

TEST_CASE("spearman_eval scores cosine against the benchmark") {
  // two aligned pairs and one OOV pair
  std::vector<NodeKey> keys = {rho_key("_", "a"), rho_key("_", "b"),
                               rho_key("_", "c"), rho_key("_", "d")};
  // cos(a,b)=1, cos(c,d)=0
  EmbeddingState s = state_with(
      keys, {1, 0, 2, 0, 0, 3, 1, 0}, 2);
  SimilarityBenchmark bench;
  bench.pairs = {{"a", "b", 0.9}, {"c", "d", 0.1}, {"a", "zzz", 0.5}};
  SpearmanResult r = spearman_eval(bench, s);
  CHECK(r.evaluated == 2);
  CHECK(r.skipped == 1);
  CHECK(r.coverage == doctest::Approx(2.0 / 3.0));
  CHECK(r.rho == doctest::Approx(1.0));

  SimilarityBenchmark none;
  none.pairs = {{"x", "y", 1.0}};
  CHECK_THROWS_AS(spearman_eval(none, s), DataError);
}

TEST_CASE("benchmark reader skips a header and comments") {
  std::istringstream in(
      "word1\tword2\tscore\n"
      "# comment\n"
      "cat\tfeline\t9.5\n"
      "cat dog 4.0\n");
  SimilarityBenchmark b = read_similarity_benchmark(in);
  REQUIRE(b.pairs.size() == 2);
  CHECK(b.pairs[0].word1 == "cat");
  CHECK(b.pairs[0].word2 == "feline");
  CHECK(b.pairs[0].score == doctest::Approx(9.5));
  CHECK(b.pairs[1].score == doctest::Approx(4.0));

  std::istringstream noheader("cat feline 9.5\n");
  CHECK(read_similarity_benchmark(noheader).pairs.size() == 1);

  // a malformed first line passes as a header; later lines must parse
  std::istringstream bad("cat feline 9.5\ncat dog\n");
  CHECK_THROWS_AS(read_similarity_benchmark(bad), DataError);
  std::istringstream badscore("cat feline 9.5\ncat dog x\n");
  CHECK_THROWS_AS(read_similarity_benchmark(badscore), DataError);
}

TEST_CASE("lexicon reader") {
  std::istringstream in(
      "# en-de\n"
      "dog\thund\n"
      "cat katze\n");
  BliLexicon lx = read_lexicon(in);
  REQUIRE(lx.pairs.size() == 2);
  CHECK(lx.pairs[0].first == "dog");
  CHECK(lx.pairs[0].second == "hund");
  std::istringstream bad("loneword\n");
  CHECK_THROWS_AS(read_lexicon(bad), DataError);
}

TEST_CASE("nearest neighbors pool, exclusion and tie order") {
  std::vector<NodeKey> keys = {rho_key("_", "q"),  rho_key("_", "far"),
                               rho_key("_", "bb"), rho_key("_", "aa"),
                               alpha_key("_", "alpha_twin"),
                               rho_key("P", "other_part")};
  // q=(1,0); aa and bb both at (2,0): cosine 1 ties, lexicographic order;
  // far=(0,1); alpha twin would be cosine 1 but has the wrong role;
  // other_part matches role but sits in partition P, pointing away
  EmbeddingState s = state_with(
      keys, {1, 0, 0, 1, 2, 0, 2, 0, 1, 0, -1, 0}, 2);

  auto top = nearest_neighbors(rho_key("_", "q"), s, 10);
  REQUIRE(top.size() == 4);  // far, aa, bb, other_part; q and alpha excluded
  CHECK(top[0].key.word == "aa");
  CHECK(top[1].key.word == "bb");
  CHECK(top[0].cosine == doctest::Approx(1.0));

  auto filtered = nearest_neighbors(rho_key("_", "q"), s, 10, "_");
  REQUIRE(filtered.size() == 3);
  for (const auto& nb : filtered) CHECK(nb.key.partition == "_");

  auto capped = nearest_neighbors(rho_key("_", "q"), s, 2);
  CHECK(capped.size() == 2);

  CHECK_THROWS_AS(nearest_neighbors(rho_key("_", "zzz"), s, 3), DataError);
}

TEST_CASE("bli precision at k") {
  // A-side sources, B-side targets; gold: s1->t1, s2->t2, oov->t1
  std::vector<NodeKey> keys = {rho_key("A", "s1"), rho_key("A", "s2"),
                               rho_key("B", "t1"), rho_key("B", "t2"),
                               rho_key("B", "t3")};
  // s1 exactly on t1; s2 closest to t3 then t2
  EmbeddingState s = state_with(keys,
                                {1, 0,      // s1
                                 0.6, 0.8,  // s2
                                 2, 0,      // t1
                                 0.5, 1.0,  // t2 (cos with s2 ~ .98)
                                 0.6, 0.9,  // t3 (cos with s2 ~ .999)
                                 },
                                2);
  BliLexicon lx;
  lx.pairs = {{"s1", "t1"}, {"s2", "t2"}, {"oov", "t1"}};
  BliResult r = bli_eval(lx, s, "A", "B", {1, 2, 3});
  CHECK(r.evaluated == 2);
  CHECK(r.skipped == 1);
  REQUIRE(r.precision.size() == 3);
  CHECK(r.precision[0] == doctest::Approx(0.5));  // only s1 hits at 1
  CHECK(r.precision[1] == doctest::Approx(1.0));  // s2's t2 enters at 2
  CHECK(r.precision[2] == doctest::Approx(1.0));
  // precision is non-decreasing in k
  for (size_t i = 1; i < r.precision.size(); ++i)
    CHECK(r.precision[i] >= r.precision[i - 1]);

  BliLexicon empty;
  empty.pairs = {{"oov", "t1"}};
  CHECK_THROWS_AS(bli_eval(empty, s, "A", "B"), DataError);
}

TEST_CASE("procrustes recovers a planted orthogonal map") {
  const size_t n = 40, d = 6;
  std::vector<double> X = random_matrix(n, d, 91);
  std::vector<double> Wstar = random_orthogonal(d, 92);
  std::vector<double> Y = apply_map(X, Wstar, n, d);

  std::vector<double> W = procrustes_map(X, Y, n, d);
  REQUIRE(W.size() == d * d);
  for (size_t i = 0; i < W.size(); ++i)
    CHECK(W[i] == doctest::Approx(Wstar[i]).epsilon(1e-9));
  CHECK(procrustes_residual(X, Y, W, n, d) ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("procrustes map is orthogonal and optimal") {
  const size_t n = 50, d = 5;
  std::vector<double> X = random_matrix(n, d, 31);
  std::vector<double> Y = random_matrix(n, d, 32);  // unrelated: noisy case
  std::vector<double> W = procrustes_map(X, Y, n, d);

  // ||W^T W - I||_max < 1e-8
  double max_dev = 0.0;
  for (size_t i = 0; i < d; ++i)
    for (size_t j = 0; j < d; ++j) {
      double dot = 0.0;
      for (size_t k = 0; k < d; ++k) dot += W[k * d + i] * W[k * d + j];
      max_dev = std::max(max_dev, std::fabs(dot - (i == j ? 1.0 : 0.0)));
    }
  CHECK(max_dev < 1e-8);

  double best = procrustes_residual(X, Y, W, n, d);
  CHECK(best > 0.0);
  // no random orthogonal candidate beats the closed form
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> Q = random_orthogonal(d, 1000 + uint64_t(trial));
    CHECK(procrustes_residual(X, Y, Q, n, d) >= best - 1e-9);
  }
}

TEST_CASE("procrustes residual is invariant under pre-rotation") {
  const size_t n = 30, d = 4;
  std::vector<double> X = random_matrix(n, d, 77);
  std::vector<double> Y = random_matrix(n, d, 78);
  double base = procrustes_residual(X, Y, procrustes_map(X, Y, n, d), n, d);

  std::vector<double> Q = random_orthogonal(d, 79);
  std::vector<double> XQ = apply_map(X, Q, n, d);
  double rotated =
      procrustes_residual(XQ, Y, procrustes_map(XQ, Y, n, d), n, d);
  CHECK(rotated == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("procrustes rejects empty input") {
  CHECK_THROWS_AS(procrustes_map({}, {}, 0, 3), DataError);
}

TEST_CASE("group divergence ranks planted movers") {
  std::vector<NodeKey> keys = {rho_key("R", "w1"), rho_key("D", "w1"),
                               rho_key("R", "w2"), rho_key("D", "w2"),
                               rho_key("R", "w3")};
  EmbeddingState s = state_with(keys,
                                {0, 0,   // R w1
                                 3, 4,   // D w1: distance 5
                                 1, 1,   // R w2
                                 1, 2,   // D w2: distance 1
                                 0, 0},  // R w3 only
                                2);
  DivergenceReport rep =
      group_divergence(s, {"w1", "w2", "w3"}, "R", "D", 10);
  REQUIRE(rep.ranked.size() == 2);
  CHECK(rep.ranked[0].word == "w1");
  CHECK(rep.ranked[0].distance == doctest::Approx(5.0));
  CHECK(rep.ranked[1].word == "w2");
  CHECK(rep.ranked[1].distance == doctest::Approx(1.0));
  REQUIRE(rep.missing.size() == 1);
  CHECK(rep.missing[0] == "w3");

  DivergenceReport top1 = group_divergence(s, {"w1", "w2"}, "R", "D", 1);
  CHECK(top1.ranked.size() == 1);
  CHECK(top1.ranked[0].word == "w1");
}

TEST_CASE("divergence series walks the timesteps") {
  std::vector<NodeKey> keys = {
      rho_key("R@0", "w"), rho_key("D@0", "w"),
      rho_key("R@1", "w"), rho_key("D@1", "w")};
  EmbeddingState s = state_with(keys,
                                {0, 0,  // R@0
                                 1, 0,  // D@0: 1
                                 0, 0,  // R@1
                                 0, 2}, // D@1: 2
                                2);
  std::vector<double> series = divergence_series(s, "w", "R", "D", 2);
  REQUIRE(series.size() == 2);
  CHECK(series[0] == doctest::Approx(1.0));
  CHECK(series[1] == doctest::Approx(2.0));

  CHECK_THROWS_AS(divergence_series(s, "w", "R", "D", 3), DataError);
}
