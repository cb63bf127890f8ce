#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace pelp {

enum class Role : uint8_t { kRho = 0, kAlpha = 1 };

// Identifies one parameter vector: role x partition x word. Partition "_"
// is the global/default partition; dynamic-group partitions join group and
// timestep with "@" (e.g. "left@3").
struct NodeKey {
  Role role = Role::kRho;
  std::string partition = "_";
  std::string word;

  bool operator==(const NodeKey& o) const {
    return role == o.role && partition == o.partition && word == o.word;
  }
  bool operator!=(const NodeKey& o) const { return !(*this == o); }
  bool operator<(const NodeKey& o) const {
    if (role != o.role) return role < o.role;
    if (partition != o.partition) return partition < o.partition;
    return word < o.word;
  }
};

inline NodeKey rho_key(std::string partition, std::string word) {
  return NodeKey{Role::kRho, std::move(partition), std::move(word)};
}
inline NodeKey alpha_key(std::string partition, std::string word) {
  return NodeKey{Role::kAlpha, std::move(partition), std::move(word)};
}

struct NodeKeyHash {
  size_t operator()(const NodeKey& k) const;
};

// "role:partition:word"; the word part may itself contain colons.
std::string format_node(const NodeKey& k);
NodeKey parse_node(const std::string& s);

struct GraphEdge {
  NodeKey a;
  NodeKey b;
  double weight = 1.0;
};

// Immutable weighted undirected graph plus the prior strengths. Validates
// on construction: no self-loops, no repeated unordered pair, weights > 0,
// lambda0 > 0 and lambda1 >= 0 (so lambda1*L + lambda0*I is positive
// definite).
class PriorGraph {
 public:
  PriorGraph(std::vector<NodeKey> nodes, std::vector<GraphEdge> edges,
             double lambda0, double lambda1);

  // Nodes inferred from edge endpoints in first-appearance order, then any
  // extra (possibly isolated) nodes.
  static PriorGraph from_edges(std::vector<GraphEdge> edges, double lambda0,
                               double lambda1,
                               const std::vector<NodeKey>& extra_nodes = {});

  const std::vector<NodeKey>& nodes() const { return nodes_; }
  const std::vector<GraphEdge>& edges() const { return edges_; }
  double lambda0() const { return lambda0_; }
  double lambda1() const { return lambda1_; }
  bool has_node(const NodeKey& k) const {
    return node_index_.count(k) != 0;
  }

 private:
  std::vector<NodeKey> nodes_;
  std::vector<GraphEdge> edges_;
  std::unordered_map<NodeKey, uint32_t, NodeKeyHash> node_index_;
  double lambda0_ = 1.0;
  double lambda1_ = 0.0;
};

// Ordered keys plus one row of dimension D per key, stored row-major.
class EmbeddingState {
 public:
  EmbeddingState() = default;
  EmbeddingState(std::vector<NodeKey> keys, int dim);

  size_t size() const { return keys_.size(); }
  int dim() const { return dim_; }
  const std::vector<NodeKey>& keys() const { return keys_; }
  const NodeKey& key(size_t i) const { return keys_[i]; }
  double* row(size_t i) { return data_.data() + i * size_t(dim_); }
  const double* row(size_t i) const { return data_.data() + i * size_t(dim_); }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  // -1 when absent
  int64_t index_of(const NodeKey& k) const;
  bool all_finite() const;

 private:
  std::vector<NodeKey> keys_;
  std::unordered_map<NodeKey, uint32_t, NodeKeyHash> index_;
  std::vector<double> data_;
  int dim_ = 0;
};

// Edge endpoints resolved to state row indices (done once per training run).
struct ResolvedEdge {
  uint32_t a = 0;
  uint32_t b = 0;
  double weight = 1.0;
};
std::vector<ResolvedEdge> resolve_edges(const PriorGraph& g,
                                        const EmbeddingState& state);

// -(lambda1/2) sum_edges a_vw ||theta_v - theta_w||^2
// -(lambda0/2) sum_{state rows} ||theta_v||^2
double log_prior(const EmbeddingState& state, const PriorGraph& g);

// Row v: -lambda1 sum_{(v,w) in E} a_vw (theta_v - theta_w) - lambda0 theta_v.
// grad is resized to match state.data() and overwritten.
void prior_gradient(const EmbeddingState& state, const PriorGraph& g,
                    std::vector<double>& grad);

// Adds scale * d(log_prior)/d(theta) into grad (dense, same layout as state).
void accumulate_prior_gradient(const EmbeddingState& state,
                               const std::vector<ResolvedEdge>& edges,
                               double lambda1, double lambda0, double scale,
                               double* grad);

// --- builders (edge lists; assemble with PriorGraph::from_edges) ------------

// Reciprocal definition mentions only: when v's definition contains w and
// w's definition contains v (v != w, both in vocab), adds
// (rho:_:v, alpha:_:w) and (rho:_:w, alpha:_:v), weight 1.
std::vector<GraphEdge> build_dict_graph(
    const std::map<std::string, std::set<std::string>>& definitions,
    const std::unordered_set<std::string>& vocab);

// (rho:t:w, rho:t+1:w) for t = 0..T-2; timestep partitions are "0".."T-1".
std::vector<GraphEdge> build_chain_graph(const std::vector<std::string>& words,
                                         int timesteps);

// All C(|S|,2) pairs among {rho:s:w} per word.
std::vector<GraphEdge> build_group_complete_graph(
    const std::vector<std::string>& words,
    const std::vector<std::string>& groups);

// Partitions "g@t": per-timestep complete group graphs plus per-group
// temporal chains. T=1 degenerates to the group graph, |S|=1 to the chain.
std::vector<GraphEdge> build_dynamic_group_graph(
    const std::vector<std::string>& words,
    const std::vector<std::string>& groups, int timesteps);

// Per in-vocab pair (v, w): (rho:A:v, rho:B:w) and (alpha:A:v, alpha:B:w).
// Pairs with an OOV member are skipped and counted; exact duplicate pairs
// collapse to the first occurrence.
std::vector<GraphEdge> build_translation_graph(
    const std::vector<std::pair<std::string, std::string>>& pairs,
    const std::string& partition_a, const std::string& partition_b,
    const std::unordered_set<std::string>& vocab_a,
    const std::unordered_set<std::string>& vocab_b,
    size_t* skipped = nullptr);

// --- edge-list TSV -----------------------------------------------------------
// node_a<TAB>node_b<TAB>weight (weight optional, default 1.0); '#' comments.
std::vector<GraphEdge> read_edge_list(std::istream& in);
std::vector<GraphEdge> read_edge_list_file(const std::string& path);
void write_edge_list(const std::vector<GraphEdge>& edges, std::ostream& out);

}  // namespace pelp
