#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "layerlq/types.hpp"

namespace layerlq {

struct Edge {
  Index tail = 0;
  Index head = 0;
  double weight = 1.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Weighted, possibly signed interaction graph of one layer.
///
/// Edges are stored directed. An undirected graph stores both orientations of every
/// edge with the same weight; the factories below take care of that.
class Graph {
 public:
  /// Each entry is one unordered edge. Listing both orientations with equal weight is
  /// accepted; conflicting weights are not.
  static Graph undirected(Index node_count, const std::vector<Edge>& edges);
  static Graph directed(Index node_count, const std::vector<Edge>& edges);

  /// A single node without edges, the identity for cartesian_product.
  static Graph single_node() { return undirected(1, {}); }

  Index node_count() const noexcept { return node_count_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  bool is_undirected() const noexcept { return undirected_; }

 private:
  Graph(Index node_count, std::vector<Edge> edges, bool undirected);

  Index node_count_;
  std::vector<Edge> edges_;  // sorted by (tail, head)
  bool undirected_;
};

struct GraphMatrices {
  Matrix adjacency;
  Matrix degree;
  Matrix laplacian;
};

/// Adjacency, degree and Laplacian. The degree is the algebraic sum of outgoing
/// weights, so signed graphs keep zero Laplacian row sums.
GraphMatrices matrices_of(const Graph& g);

/// Cartesian product g1 □ g2. Node (v1, v2) gets flat index v1 * n2 + v2, which makes
/// adjacency(g1 □ g2) == adjacency(g1) ⊕ adjacency(g2) hold literally.
Graph cartesian_product(const Graph& g1, const Graph& g2);

/// Parses the edge-list format:
///
///     # comment
///     nodes N undirected true|false
///     tail head weight
///
/// Throws ParseError with the offending line number.
Graph parse_graph(std::istream& in);
Graph load_graph(const std::string& path);
void write_graph(std::ostream& out, const Graph& g);

}  // namespace layerlq
