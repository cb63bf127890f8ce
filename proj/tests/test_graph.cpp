#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "pelp/errors.hpp"
#include "pelp/graph.hpp"
#include "pelp/rng.hpp"

using namespace pelp;

namespace {

EmbeddingState random_state(std::vector<NodeKey> keys, int dim,
                            uint64_t seed) {
  EmbeddingState s(std::move(keys), dim);
  Rng rng(seed);
  for (double& x : s.data()) x = rng.uniform(-1.0, 1.0);
  return s;
}

// random orthogonal matrix via QR of a Gaussian matrix
Eigen::MatrixXd random_orthogonal(int d, uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  return Eigen::MatrixXd(qr.householderQ());
}

}  // namespace

TEST_CASE("node key syntax round trips") {
  NodeKey k = rho_key("left@3", "word");
  CHECK(format_node(k) == "rho:left@3:word");
  CHECK(parse_node("rho:left@3:word") == k);
  // word may contain colons: split happens at the first two only
  NodeKey c = parse_node("alpha:_:a:b:c");
  CHECK(c.role == Role::kAlpha);
  CHECK(c.partition == "_");
  CHECK(c.word == "a:b:c");
  CHECK_THROWS_AS(parse_node("sigma:_:w"), DataError);
  CHECK_THROWS_AS(parse_node("rho:nocolon"), DataError);
}

TEST_CASE("prior graph validates its inputs") {
  NodeKey u = rho_key("_", "u"), v = rho_key("_", "v");
  CHECK_THROWS_AS(PriorGraph::from_edges({{u, u, 1.0}}, 1.0, 1.0), DataError);
  CHECK_THROWS_AS(PriorGraph::from_edges({{u, v, 1.0}, {v, u, 2.0}}, 1.0, 1.0),
                  DataError);
  CHECK_THROWS_AS(PriorGraph::from_edges({{u, v, 0.0}}, 1.0, 1.0), DataError);
  CHECK_THROWS_AS(PriorGraph::from_edges({{u, v, 1.0}}, 0.0, 1.0), DataError);
  CHECK_THROWS_AS(PriorGraph::from_edges({{u, v, 1.0}}, 1.0, -1.0), DataError);
  // lambda1 = 0 with edges is fine (edges simply contribute nothing)
  CHECK_NOTHROW(PriorGraph::from_edges({{u, v, 1.0}}, 1.0, 0.0));
}

TEST_CASE("one-edge prior value and gradient by hand") {
  NodeKey u = rho_key("_", "u"), v = rho_key("_", "v");
  PriorGraph g({u, v}, {{u, v, 1.0}}, 1e-9, 1.0);
  EmbeddingState s({u, v}, 2);
  s.row(0)[0] = 1.0;
  s.row(0)[1] = 0.0;
  s.row(1)[0] = -1.0;
  s.row(1)[1] = 0.0;
  // -(1/2) * ||(2,0)||^2 = -2, ridge term negligible
  CHECK(log_prior(s, g) == doctest::Approx(-2.0).epsilon(1e-8));
  std::vector<double> grad;
  prior_gradient(s, g, grad);
  CHECK(grad[0] == doctest::Approx(-2.0).epsilon(1e-8));
  CHECK(grad[1] == doctest::Approx(0.0));
  CHECK(grad[2] == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(grad[3] == doctest::Approx(0.0));
}

TEST_CASE("ridge-only prior value and gradient by hand") {
  NodeKey u = rho_key("_", "u");
  PriorGraph g({u}, {}, 2.0, 0.0);
  EmbeddingState s({u}, 2);
  s.row(0)[0] = 3.0;
  s.row(0)[1] = 4.0;
  CHECK(log_prior(s, g) == doctest::Approx(-25.0));
  std::vector<double> grad;
  prior_gradient(s, g, grad);
  CHECK(grad[0] == doctest::Approx(-6.0));
  CHECK(grad[1] == doctest::Approx(-8.0));
}

TEST_CASE("prior matches a dense augmented-Laplacian quadratic form") {
  // L+ = lambda1 (D - A) + lambda0 I over the state rows; the log prior is
  // -(1/2) sum_dims theta_d^T L+ theta_d and the gradient is -L+ theta
  Rng rng(17);
  const int n = 23, dim = 3;
  std::vector<NodeKey> keys;
  for (int i = 0; i < n; ++i) keys.push_back(rho_key("_", "w" + std::to_string(i)));
  std::vector<GraphEdge> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.uniform01() < 0.2)
        edges.push_back({keys[i], keys[j], rng.uniform(0.1, 2.0)});
  const double l0 = 0.7, l1 = 1.3;
  PriorGraph g(keys, edges, l0, l1);
  EmbeddingState s = random_state(keys, dim, 18);

  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : edges) {
    int a = int(s.index_of(e.a)), b = int(s.index_of(e.b));
    L(a, a) += l1 * e.weight;
    L(b, b) += l1 * e.weight;
    L(a, b) -= l1 * e.weight;
    L(b, a) -= l1 * e.weight;
  }
  for (int i = 0; i < n; ++i) L(i, i) += l0;

  Eigen::MatrixXd T(n, dim);
  for (int i = 0; i < n; ++i)
    for (int d = 0; d < dim; ++d) T(i, d) = s.row(i)[d];
  double expected = -0.5 * (T.transpose() * L * T).trace();
  CHECK(log_prior(s, g) == doctest::Approx(expected).epsilon(1e-12));

  Eigen::MatrixXd G = -L * T;
  std::vector<double> grad;
  prior_gradient(s, g, grad);
  for (int i = 0; i < n; ++i)
    for (int d = 0; d < dim; ++d)
      CHECK(grad[size_t(i) * dim + d] ==
            doctest::Approx(G(i, d)).epsilon(1e-10));
}

TEST_CASE("prior gradient matches finite differences") {
  std::vector<NodeKey> keys = {rho_key("_", "a"), rho_key("_", "b"),
                               rho_key("_", "c"), alpha_key("_", "a")};
  std::vector<GraphEdge> edges = {{keys[0], keys[1], 0.5},
                                  {keys[1], keys[2], 2.0},
                                  {keys[0], keys[3], 1.0}};
  PriorGraph g(keys, edges, 0.9, 1.7);
  EmbeddingState s = random_state(keys, 3, 4);
  std::vector<double> grad;
  prior_gradient(s, g, grad);
  const double h = 1e-6;
  for (size_t i = 0; i < s.data().size(); ++i) {
    double orig = s.data()[i];
    s.data()[i] = orig + h;
    double up = log_prior(s, g);
    s.data()[i] = orig - h;
    double dn = log_prior(s, g);
    s.data()[i] = orig;
    CHECK(grad[i] == doctest::Approx((up - dn) / (2 * h)).epsilon(1e-5));
  }
}

TEST_CASE("log prior is rotation invariant") {
  std::vector<NodeKey> keys;
  for (int i = 0; i < 8; ++i) keys.push_back(rho_key("_", "w" + std::to_string(i)));
  std::vector<GraphEdge> edges;
  for (int i = 0; i < 7; ++i) edges.push_back({keys[i], keys[i + 1], 1.0 + i});
  PriorGraph g(keys, edges, 0.4, 1.1);
  const int dim = 4;
  EmbeddingState s = random_state(keys, dim, 7);
  double before = log_prior(s, g);

  Eigen::MatrixXd Q = random_orthogonal(dim, 8);
  EmbeddingState r = s;
  for (size_t i = 0; i < s.size(); ++i) {
    Eigen::VectorXd row(dim);
    for (int d = 0; d < dim; ++d) row(d) = s.row(i)[d];
    Eigen::VectorXd rot = Q * row;
    for (int d = 0; d < dim; ++d) r.row(i)[d] = rot(d);
  }
  CHECK(log_prior(r, g) == doctest::Approx(before).epsilon(1e-8));
}

TEST_CASE("dict builder keeps reciprocal mentions only") {
  std::map<std::string, std::set<std::string>> defs;
  defs["cat"] = {"feline", "pet"};
  defs["feline"] = {"cat"};
  defs["pet"] = {"animal"};  // one-way: cat mentions pet, pet does not reply
  defs["ghost"] = {"cat"};   // OOV head below
  std::unordered_set<std::string> vocab = {"cat", "feline", "pet", "animal"};
  auto edges = build_dict_graph(defs, vocab);
  // only cat<->feline is reciprocal: two directed strong-pair edges
  REQUIRE(edges.size() == 2);
  CHECK(edges[0].a == rho_key("_", "cat"));
  CHECK(edges[0].b == alpha_key("_", "feline"));
  CHECK(edges[1].a == rho_key("_", "feline"));
  CHECK(edges[1].b == alpha_key("_", "cat"));
  CHECK(edges[0].weight == 1.0);
}

TEST_CASE("chain builder links consecutive timesteps") {
  auto edges = build_chain_graph({"a", "b"}, 3);
  REQUIRE(edges.size() == 4);  // 2 words x (3-1) steps
  CHECK(edges[0].a == rho_key("0", "a"));
  CHECK(edges[0].b == rho_key("1", "a"));
  CHECK(edges[1].a == rho_key("1", "a"));
  CHECK(edges[1].b == rho_key("2", "a"));
  CHECK(build_chain_graph({"a"}, 1).empty());
}

TEST_CASE("group builder makes complete subgraphs") {
  auto edges = build_group_complete_graph({"w"}, {"r", "d", "x"});
  REQUIRE(edges.size() == 3);  // C(3,2)
  auto all = build_group_complete_graph({"u", "v"}, {"r", "d"});
  CHECK(all.size() == 2);  // C(2,2) per word
  CHECK(all[0].a == rho_key("r", "u"));
  CHECK(all[0].b == rho_key("d", "u"));
}

TEST_CASE("dynamic group builder joins group@timestep partitions") {
  auto edges = build_dynamic_group_graph({"w"}, {"r", "d"}, 2);
  // per timestep: C(2,2)=1 cross-group edge (x2 timesteps); per group: 1
  // chain edge (x2 groups)
  REQUIRE(edges.size() == 4);
  size_t cross = 0, chain = 0;
  for (const auto& e : edges) {
    if (e.a.partition == "r@0" && e.b.partition == "d@0") ++cross;
    if (e.a.partition == "r@1" && e.b.partition == "d@1") ++cross;
    if (e.a.partition == "r@0" && e.b.partition == "r@1") ++chain;
    if (e.a.partition == "d@0" && e.b.partition == "d@1") ++chain;
  }
  CHECK(cross == 2);
  CHECK(chain == 2);
  // degenerate cases collapse to the simpler builders
  CHECK(build_dynamic_group_graph({"w"}, {"r", "d"}, 1).size() == 1);
  CHECK(build_dynamic_group_graph({"w"}, {"g"}, 3).size() == 2);
}

TEST_CASE("translation builder links both roles and skips OOV") {
  std::unordered_set<std::string> va = {"one", "two"};
  std::unordered_set<std::string> vb = {"uno", "dos"};
  size_t skipped = 0;
  auto edges = build_translation_graph(
      {{"one", "uno"}, {"two", "tres"}, {"one", "uno"}}, "A", "B", va, vb,
      &skipped);
  CHECK(skipped == 1);          // "tres" is OOV in B
  REQUIRE(edges.size() == 2);   // duplicate pair collapses; rho + alpha
  CHECK(edges[0].a == rho_key("A", "one"));
  CHECK(edges[0].b == rho_key("B", "uno"));
  CHECK(edges[1].a == alpha_key("A", "one"));
  CHECK(edges[1].b == alpha_key("B", "uno"));
}

TEST_CASE("edge list tsv round trips") {
  std::vector<GraphEdge> edges = {
      {rho_key("_", "a"), rho_key("_", "b"), 2.5},
      {rho_key("R", "x:y"), alpha_key("D", "z"), 1.0}};
  std::stringstream ss;
  write_edge_list(edges, ss);
  auto back = read_edge_list(ss);
  REQUIRE(back.size() == 2);
  CHECK(back[0].a == edges[0].a);
  CHECK(back[0].b == edges[0].b);
  CHECK(back[0].weight == doctest::Approx(2.5));
  CHECK(back[1].a == edges[1].a);
  CHECK(back[1].weight == doctest::Approx(1.0));
}

TEST_CASE("edge list reader defaults weight and skips comments") {
  std::stringstream ss(
      "# strong pairs\n"
      "rho:_:a\trho:_:b\n"
      "rho:_:a\trho:_:c\t0.25\n");
  auto edges = read_edge_list(ss);
  REQUIRE(edges.size() == 2);
  CHECK(edges[0].weight == doctest::Approx(1.0));
  CHECK(edges[1].weight == doctest::Approx(0.25));
  std::stringstream bad("rho:_:a\n");
  CHECK_THROWS_AS(read_edge_list(bad), DataError);
}

TEST_CASE("state and resolve_edges agree on indices") {
  std::vector<NodeKey> keys = {rho_key("_", "a"), rho_key("_", "b")};
  PriorGraph g(keys, {{keys[0], keys[1], 1.5}}, 1.0, 1.0);
  EmbeddingState s(keys, 2);
  auto res = resolve_edges(g, s);
  REQUIRE(res.size() == 1);
  CHECK(res[0].a == 0);
  CHECK(res[0].b == 1);
  CHECK(res[0].weight == doctest::Approx(1.5));
  // a graph node missing from the state is a data error
  EmbeddingState tiny({keys[0]}, 2);
  CHECK_THROWS_AS(resolve_edges(g, tiny), DataError);
}

TEST_CASE("duplicate state keys are rejected") {
  std::vector<NodeKey> keys = {rho_key("_", "a"), rho_key("_", "a")};
  CHECK_THROWS_AS(EmbeddingState(keys, 2), DataError);
}

TEST_CASE("from_edges preserves first-appearance node order") {
  NodeKey a = rho_key("_", "a"), b = rho_key("_", "b"), c = rho_key("_", "c");
  auto g = PriorGraph::from_edges({{b, c, 1.0}, {a, b, 1.0}}, 1.0, 1.0, {a});
  REQUIRE(g.nodes().size() == 3);
  CHECK(g.nodes()[0] == b);
  CHECK(g.nodes()[1] == c);
  CHECK(g.nodes()[2] == a);
  CHECK(g.has_node(a));
}
