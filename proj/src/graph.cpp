#include "pelp/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "pelp/errors.hpp"
#include "pelp/kernels.hpp"
#include "pelp/rng.hpp"

namespace pelp {

size_t NodeKeyHash::operator()(const NodeKey& k) const {
  uint64_t h = 0xcbf29ce484222325ull;
  auto mix_str = [&h](const std::string& s) {
    for (char c : s) {
      h ^= uint8_t(c);
      h *= 0x100000001b3ull;
    }
    h ^= 0xff;
    h *= 0x100000001b3ull;
  };
  h ^= uint64_t(k.role);
  h *= 0x100000001b3ull;
  mix_str(k.partition);
  mix_str(k.word);
  return size_t(h);
}

std::string format_node(const NodeKey& k) {
  std::string out = k.role == Role::kRho ? "rho:" : "alpha:";
  out += k.partition;
  out += ':';
  out += k.word;
  return out;
}

NodeKey parse_node(const std::string& s) {
  auto c1 = s.find(':');
  if (c1 == std::string::npos)
    throw DataError("bad node key (want role:partition:word): " + s);
  auto c2 = s.find(':', c1 + 1);
  if (c2 == std::string::npos)
    throw DataError("bad node key (want role:partition:word): " + s);
  NodeKey k;
  std::string role = s.substr(0, c1);
  if (role == "rho")
    k.role = Role::kRho;
  else if (role == "alpha")
    k.role = Role::kAlpha;
  else
    throw DataError("bad node role (want rho or alpha): " + s);
  k.partition = s.substr(c1 + 1, c2 - c1 - 1);
  k.word = s.substr(c2 + 1);
  if (k.partition.empty()) throw DataError("empty partition in node: " + s);
  if (k.word.empty()) throw DataError("empty word in node: " + s);
  return k;
}

namespace {
// canonical unordered-pair key for duplicate detection
std::string pair_token(const NodeKey& a, const NodeKey& b) {
  std::string sa = format_node(a), sb = format_node(b);
  if (sb < sa) std::swap(sa, sb);
  sa += '\x01';
  sa += sb;
  return sa;
}
}  // namespace

PriorGraph::PriorGraph(std::vector<NodeKey> nodes, std::vector<GraphEdge> edges,
                       double lambda0, double lambda1)
    : nodes_(std::move(nodes)),
      edges_(std::move(edges)),
      lambda0_(lambda0),
      lambda1_(lambda1) {
  if (!(lambda0_ > 0.0)) throw DataError("lambda0 must be > 0");
  if (!(lambda1_ >= 0.0)) throw DataError("lambda1 must be >= 0");
  node_index_.reserve(nodes_.size());
  for (uint32_t i = 0; i < nodes_.size(); ++i) {
    if (!node_index_.emplace(nodes_[i], i).second)
      throw DataError("duplicate graph node: " + format_node(nodes_[i]));
  }
  std::unordered_set<std::string> seen;
  seen.reserve(edges_.size());
  for (const auto& e : edges_) {
    if (e.a == e.b)
      throw DataError("self-loop on node: " + format_node(e.a));
    if (!(e.weight > 0.0))
      throw DataError("non-positive edge weight on (" + format_node(e.a) +
                      ", " + format_node(e.b) + ")");
    if (!node_index_.count(e.a))
      throw DataError("edge endpoint not in node list: " + format_node(e.a));
    if (!node_index_.count(e.b))
      throw DataError("edge endpoint not in node list: " + format_node(e.b));
    if (!seen.insert(pair_token(e.a, e.b)).second)
      throw DataError("duplicate edge (" + format_node(e.a) + ", " +
                      format_node(e.b) + ")");
  }
}

PriorGraph PriorGraph::from_edges(std::vector<GraphEdge> edges, double lambda0,
                                  double lambda1,
                                  const std::vector<NodeKey>& extra_nodes) {
  std::vector<NodeKey> nodes;
  std::unordered_set<NodeKey, NodeKeyHash> seen;
  auto add = [&](const NodeKey& k) {
    if (seen.insert(k).second) nodes.push_back(k);
  };
  for (const auto& e : edges) {
    add(e.a);
    add(e.b);
  }
  for (const auto& k : extra_nodes) add(k);
  return PriorGraph(std::move(nodes), std::move(edges), lambda0, lambda1);
}

EmbeddingState::EmbeddingState(std::vector<NodeKey> keys, int dim)
    : keys_(std::move(keys)), dim_(dim) {
  if (dim_ < 1) throw DataError("embedding dimension must be >= 1");
  index_.reserve(keys_.size());
  for (uint32_t i = 0; i < keys_.size(); ++i) {
    if (!index_.emplace(keys_[i], i).second)
      throw DataError("duplicate state key: " + format_node(keys_[i]));
  }
  data_.assign(keys_.size() * size_t(dim_), 0.0);
}

int64_t EmbeddingState::index_of(const NodeKey& k) const {
  auto it = index_.find(k);
  return it == index_.end() ? -1 : int64_t(it->second);
}

bool EmbeddingState::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

std::vector<ResolvedEdge> resolve_edges(const PriorGraph& g,
                                        const EmbeddingState& state) {
  std::vector<ResolvedEdge> out;
  out.reserve(g.edges().size());
  for (const auto& e : g.edges()) {
    int64_t ia = state.index_of(e.a);
    int64_t ib = state.index_of(e.b);
    if (ia < 0)
      throw DataError("edge endpoint not in state: " + format_node(e.a));
    if (ib < 0)
      throw DataError("edge endpoint not in state: " + format_node(e.b));
    out.push_back(ResolvedEdge{uint32_t(ia), uint32_t(ib), e.weight});
  }
  return out;
}

double log_prior(const EmbeddingState& state, const PriorGraph& g) {
  const int d = state.dim();
  double edge_sum = 0.0;
  for (const auto& e : g.edges()) {
    int64_t ia = state.index_of(e.a);
    int64_t ib = state.index_of(e.b);
    if (ia < 0)
      throw DataError("edge endpoint not in state: " + format_node(e.a));
    if (ib < 0)
      throw DataError("edge endpoint not in state: " + format_node(e.b));
    edge_sum +=
        e.weight * kernels::squared_dist(state.row(size_t(ia)),
                                         state.row(size_t(ib)), size_t(d));
  }
  double ridge = 0.0;
  for (size_t i = 0; i < state.size(); ++i)
    ridge += kernels::squared_norm(state.row(i), size_t(d));
  return -0.5 * g.lambda1() * edge_sum - 0.5 * g.lambda0() * ridge;
}

void prior_gradient(const EmbeddingState& state, const PriorGraph& g,
                    std::vector<double>& grad) {
  grad.assign(state.data().size(), 0.0);
  auto edges = resolve_edges(g, state);
  accumulate_prior_gradient(state, edges, g.lambda1(), g.lambda0(), 1.0,
                            grad.data());
}

void accumulate_prior_gradient(const EmbeddingState& state,
                               const std::vector<ResolvedEdge>& edges,
                               double lambda1, double lambda0, double scale,
                               double* grad) {
  const size_t d = size_t(state.dim());
  const double* theta = state.data().data();
  if (lambda1 != 0.0) {
    for (const auto& e : edges) {
      double w = scale * lambda1 * e.weight;
      kernels::edge_grad(w, theta + e.a * d, theta + e.b * d, grad + e.a * d,
                         grad + e.b * d, d);
    }
  }
  if (lambda0 != 0.0)
    kernels::axpy(grad, theta, -scale * lambda0, state.data().size());
}

// --- builders ----------------------------------------------------------------

std::vector<GraphEdge> build_dict_graph(
    const std::map<std::string, std::set<std::string>>& definitions,
    const std::unordered_set<std::string>& vocab) {
  std::vector<GraphEdge> edges;
  for (const auto& [v, defs] : definitions) {
    if (!vocab.count(v)) continue;
    for (const auto& w : defs) {
      if (w <= v) continue;  // each unordered pair once; skips v==w
      if (!vocab.count(w)) continue;
      auto wit = definitions.find(w);
      if (wit == definitions.end() || !wit->second.count(v)) continue;
      edges.push_back({rho_key("_", v), alpha_key("_", w), 1.0});
      edges.push_back({rho_key("_", w), alpha_key("_", v), 1.0});
    }
  }
  return edges;
}

std::vector<GraphEdge> build_chain_graph(const std::vector<std::string>& words,
                                         int timesteps) {
  if (timesteps < 2) throw DataError("chain graph needs timesteps >= 2");
  std::vector<GraphEdge> edges;
  edges.reserve(words.size() * size_t(timesteps - 1));
  for (const auto& w : words)
    for (int t = 0; t + 1 < timesteps; ++t)
      edges.push_back({rho_key(std::to_string(t), w),
                       rho_key(std::to_string(t + 1), w), 1.0});
  return edges;
}

std::vector<GraphEdge> build_group_complete_graph(
    const std::vector<std::string>& words,
    const std::vector<std::string>& groups) {
  if (groups.size() < 2)
    throw DataError("group graph needs at least 2 groups");
  std::vector<GraphEdge> edges;
  edges.reserve(words.size() * groups.size() * (groups.size() - 1) / 2);
  for (const auto& w : words)
    for (size_t i = 0; i < groups.size(); ++i)
      for (size_t j = i + 1; j < groups.size(); ++j)
        edges.push_back({rho_key(groups[i], w), rho_key(groups[j], w), 1.0});
  return edges;
}

std::vector<GraphEdge> build_dynamic_group_graph(
    const std::vector<std::string>& words,
    const std::vector<std::string>& groups, int timesteps) {
  if (groups.empty()) throw DataError("dynamic group graph needs groups");
  if (timesteps < 1)
    throw DataError("dynamic group graph needs timesteps >= 1");
  if (groups.size() < 2 && timesteps < 2)
    throw DataError("dynamic group graph needs 2 groups or 2 timesteps");
  auto label = [](const std::string& g, int t) {
    return g + "@" + std::to_string(t);
  };
  std::vector<GraphEdge> edges;
  for (const auto& w : words) {
    for (int t = 0; t < timesteps; ++t)
      for (size_t i = 0; i < groups.size(); ++i)
        for (size_t j = i + 1; j < groups.size(); ++j)
          edges.push_back({rho_key(label(groups[i], t), w),
                           rho_key(label(groups[j], t), w), 1.0});
    for (const auto& g : groups)
      for (int t = 0; t + 1 < timesteps; ++t)
        edges.push_back(
            {rho_key(label(g, t), w), rho_key(label(g, t + 1), w), 1.0});
  }
  return edges;
}

std::vector<GraphEdge> build_translation_graph(
    const std::vector<std::pair<std::string, std::string>>& pairs,
    const std::string& partition_a, const std::string& partition_b,
    const std::unordered_set<std::string>& vocab_a,
    const std::unordered_set<std::string>& vocab_b, size_t* skipped) {
  if (partition_a == partition_b)
    throw DataError("translation graph needs two distinct partitions");
  std::vector<GraphEdge> edges;
  std::set<std::pair<std::string, std::string>> seen;
  size_t oov = 0;
  for (const auto& [va, wb] : pairs) {
    if (!vocab_a.count(va) || !vocab_b.count(wb)) {
      ++oov;
      continue;
    }
    if (!seen.emplace(va, wb).second) continue;
    edges.push_back({rho_key(partition_a, va), rho_key(partition_b, wb), 1.0});
    edges.push_back(
        {alpha_key(partition_a, va), alpha_key(partition_b, wb), 1.0});
  }
  if (skipped) *skipped = oov;
  return edges;
}

// --- edge-list TSV -------------------------------------------------------------

std::vector<GraphEdge> read_edge_list(std::istream& in) {
  std::vector<GraphEdge> edges;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cols;
    size_t start = 0;
    while (true) {
      auto tab = line.find('\t', start);
      if (tab == std::string::npos) {
        cols.push_back(line.substr(start));
        break;
      }
      cols.push_back(line.substr(start, tab - start));
      start = tab + 1;
    }
    if (cols.size() < 2 || cols.size() > 3)
      throw DataError("edge list line " + std::to_string(lineno) +
                      ": expected node_a<TAB>node_b[<TAB>weight]");
    GraphEdge e;
    e.a = parse_node(cols[0]);
    e.b = parse_node(cols[1]);
    if (cols.size() == 3) {
      try {
        size_t used = 0;
        e.weight = std::stod(cols[2], &used);
        if (used != cols[2].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw DataError("edge list line " + std::to_string(lineno) +
                        ": bad weight '" + cols[2] + "'");
      }
    }
    edges.push_back(std::move(e));
  }
  return edges;
}

std::vector<GraphEdge> read_edge_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open edge list: " + path);
  return read_edge_list(in);
}

void write_edge_list(const std::vector<GraphEdge>& edges, std::ostream& out) {
  out.precision(17);
  for (const auto& e : edges)
    out << format_node(e.a) << '\t' << format_node(e.b) << '\t' << e.weight
        << '\n';
}

}  // namespace pelp
