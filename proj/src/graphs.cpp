#include "layerlq/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <utility>

#include "layerlq/error.hpp"

namespace layerlq {

namespace {

void check_edge(Index node_count, const Edge& e) {
  if (e.tail < 0 || e.tail >= node_count || e.head < 0 || e.head >= node_count) {
    throw DimensionError("edge (" + std::to_string(e.tail) + ", " + std::to_string(e.head) +
                         ") references a node outside [0, " + std::to_string(node_count) + ")");
  }
  if (e.tail == e.head) {
    throw DimensionError("self-loop at node " + std::to_string(e.tail));
  }
  if (!std::isfinite(e.weight) || e.weight == 0.0) {
    throw DimensionError("edge (" + std::to_string(e.tail) + ", " + std::to_string(e.head) +
                         ") has a zero or non-finite weight");
  }
}

}  // namespace

Graph::Graph(Index node_count, std::vector<Edge> edges, bool undirected)
    : node_count_(node_count), edges_(std::move(edges)), undirected_(undirected) {}

Graph Graph::undirected(Index node_count, const std::vector<Edge>& edges) {
  if (node_count <= 0) throw DimensionError("graph needs at least one node");
  std::map<std::pair<Index, Index>, double> by_pair;
  for (const Edge& e : edges) {
    check_edge(node_count, e);
    for (auto key : {std::pair{e.tail, e.head}, std::pair{e.head, e.tail}}) {
      auto [it, inserted] = by_pair.emplace(key, e.weight);
      if (!inserted && it->second != e.weight) {
        throw DimensionError("conflicting weights for undirected edge (" + std::to_string(e.tail) +
                             ", " + std::to_string(e.head) + ")");
      }
    }
  }
  std::vector<Edge> stored;
  stored.reserve(by_pair.size());
  for (const auto& [key, w] : by_pair) stored.push_back({key.first, key.second, w});
  return Graph(node_count, std::move(stored), true);
}

Graph Graph::directed(Index node_count, const std::vector<Edge>& edges) {
  if (node_count <= 0) throw DimensionError("graph needs at least one node");
  std::map<std::pair<Index, Index>, double> by_pair;
  for (const Edge& e : edges) {
    check_edge(node_count, e);
    if (!by_pair.emplace(std::pair{e.tail, e.head}, e.weight).second) {
      throw DimensionError("duplicate edge (" + std::to_string(e.tail) + ", " +
                           std::to_string(e.head) + ")");
    }
  }
  std::vector<Edge> stored;
  stored.reserve(by_pair.size());
  for (const auto& [key, w] : by_pair) stored.push_back({key.first, key.second, w});
  return Graph(node_count, std::move(stored), false);
}

GraphMatrices matrices_of(const Graph& g) {
  const Index n = g.node_count();
  GraphMatrices m;
  m.adjacency = Matrix::Zero(n, n);
  for (const Edge& e : g.edges()) m.adjacency(e.tail, e.head) = e.weight;
  m.degree = m.adjacency.rowwise().sum().asDiagonal();
  m.laplacian = m.degree - m.adjacency;
  return m;
}

Graph cartesian_product(const Graph& g1, const Graph& g2) {
  const Index n1 = g1.node_count();
  const Index n2 = g2.node_count();
  std::vector<Edge> edges;
  edges.reserve(g1.edges().size() * n2 + g2.edges().size() * n1);
  for (const Edge& e : g1.edges()) {
    for (Index v2 = 0; v2 < n2; ++v2) edges.push_back({e.tail * n2 + v2, e.head * n2 + v2, e.weight});
  }
  for (const Edge& e : g2.edges()) {
    for (Index v1 = 0; v1 < n1; ++v1) edges.push_back({v1 * n2 + e.tail, v1 * n2 + e.head, e.weight});
  }
  // Stored edges already carry both orientations for undirected factors.
  if (g1.is_undirected() && g2.is_undirected()) return Graph::undirected(n1 * n2, edges);
  return Graph::directed(n1 * n2, edges);
}

Graph parse_graph(std::istream& in) {
  std::string line;
  int line_no = 0;
  Index node_count = -1;
  bool undirected = true;
  std::vector<Edge> edges;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    if (node_count < 0) {
      std::string kw_nodes, kw_undirected, flag;
      long long n = 0;
      if (!(fields >> kw_nodes >> n >> kw_undirected >> flag) || kw_nodes != "nodes" ||
          kw_undirected != "undirected" || (flag != "true" && flag != "false")) {
        throw ParseError("expected header 'nodes N undirected true|false'", line_no);
      }
      if (n <= 0) throw ParseError("node count must be positive", line_no);
      node_count = static_cast<Index>(n);
      undirected = flag == "true";
    } else {
      long long tail = 0, head = 0;
      double weight = 0.0;
      if (!(fields >> tail >> head >> weight)) {
        throw ParseError("expected 'tail head weight'", line_no);
      }
      std::string rest;
      if (fields >> rest) throw ParseError("trailing characters after edge", line_no);
      const Edge e{static_cast<Index>(tail), static_cast<Index>(head), weight};
      try {
        check_edge(node_count, e);
      } catch (const DimensionError& err) {
        throw ParseError(err.what(), line_no);
      }
      edges.push_back(e);
    }
  }
  if (node_count < 0) throw ParseError("missing 'nodes' header", line_no);
  return undirected ? Graph::undirected(node_count, edges) : Graph::directed(node_count, edges);
}

Graph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open graph file '" + path + "'");
  try {
    return parse_graph(in);
  } catch (const ParseError& err) {
    throw ParseError(err.detail(), err.line(), path);
  }
}

void write_graph(std::ostream& out, const Graph& g) {
  out << "nodes " << g.node_count() << " undirected " << (g.is_undirected() ? "true" : "false")
      << '\n';
  for (const Edge& e : g.edges()) {
    if (g.is_undirected() && e.tail > e.head) continue;
    out << e.tail << ' ' << e.head << ' ' << e.weight << '\n';
  }
}

}  // namespace layerlq
