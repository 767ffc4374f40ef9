// Copyright 2026 The lrsim Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LRSIM_LATTICE_GRAPH_HPP
#define LRSIM_LATTICE_GRAPH_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "lrsim/error.hpp"

namespace lrsim {

using Site = int;
using VertexSet = std::set<Site>;

inline std::string to_string(const VertexSet& set) {
  std::string out = "{";
  bool first = true;
  for (Site s : set) {
    if (!first) out += ",";
    out += std::to_string(s);
    first = false;
  }
  return out + "}";
}

inline bool intersects(const VertexSet& a, const VertexSet& b) {
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia == *ib) return true;
    if (*ia < *ib) ++ia; else ++ib;
  }
  return false;
}

inline bool is_subset(const VertexSet& inner, const VertexSet& outer) {
  return std::includes(outer.begin(), outer.end(), inner.begin(), inner.end());
}

/// Hyperedge-path distance between vertex sets. Disconnected sets are at an
/// explicit infinite distance rather than a large finite sentinel.
class Distance {
 public:
  constexpr Distance() = default;
  constexpr explicit Distance(std::size_t value) : value_(value) {}

  static constexpr Distance infinite() {
    Distance d;
    d.infinite_ = true;
    return d;
  }

  constexpr bool is_infinite() const { return infinite_; }
  constexpr std::size_t value() const { return value_; }

  /// Real-valued view for use in exponents; +inf when disconnected.
  double as_double() const {
    return infinite_ ? std::numeric_limits<double>::infinity()
                     : static_cast<double>(value_);
  }

  friend constexpr bool operator==(const Distance& a, const Distance& b) {
    return a.infinite_ == b.infinite_ && (a.infinite_ || a.value_ == b.value_);
  }
  friend constexpr bool operator<(const Distance& a, const Distance& b) {
    if (a.infinite_) return false;
    if (b.infinite_) return true;
    return a.value_ < b.value_;
  }
  friend constexpr bool operator<=(const Distance& a, const Distance& b) {
    return a < b || a == b;
  }

 private:
  std::size_t value_ = 0;
  bool infinite_ = false;
};

/// Interaction hypergraph (V, E) with per-site Hilbert-space dimensions.
///
/// Vertices keep their declared order, which also fixes the tensor-factor
/// order of the global Hilbert space (first vertex = most significant factor).
/// Immutable after construction.
class InteractionGraph {
 public:
  InteractionGraph(std::vector<Site> vertices, std::vector<VertexSet> hyperedges,
                   std::map<Site, int> local_dims)
      : vertices_(std::move(vertices)) {
    std::set<Site> seen;
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
      if (!seen.insert(vertices_[i]).second) {
        throw Error(ErrorKind::InvalidArgument,
                    "duplicate vertex " + std::to_string(vertices_[i]));
      }
      position_[vertices_[i]] = i;
    }
    for (Site v : vertices_) {
      auto it = local_dims.find(v);
      if (it == local_dims.end()) {
        throw Error(ErrorKind::BadDimension,
                    "no local dimension declared for vertex " + std::to_string(v));
      }
      if (it->second < 2) {
        throw Error(ErrorKind::BadDimension,
                    "vertex " + std::to_string(v) + " has dimension " +
                        std::to_string(it->second));
      }
      dims_.push_back(it->second);
    }
    for (const auto& [v, dim] : local_dims) {
      if (!position_.count(v)) {
        throw Error(ErrorKind::UnknownVertex,
                    "dimension declared for unknown vertex " + std::to_string(v));
      }
    }
    std::set<VertexSet> unique;
    for (auto& edge : hyperedges) {
      if (edge.empty()) throw Error(ErrorKind::EmptyEdge, "hyperedge is empty");
      for (Site v : edge) {
        if (!position_.count(v)) {
          throw Error(ErrorKind::UnknownVertex,
                      "hyperedge " + to_string(edge) + " references vertex " +
                          std::to_string(v));
        }
      }
      if (unique.insert(edge).second) edges_.push_back(edge);
    }
    adjacency_.resize(edges_.size());
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      for (std::size_t j = i + 1; j < edges_.size(); ++j) {
        if (intersects(edges_[i], edges_[j])) {
          adjacency_[i].push_back(j);
          adjacency_[j].push_back(i);
        }
      }
    }
  }

  const std::vector<Site>& vertices() const { return vertices_; }
  const std::vector<VertexSet>& hyperedges() const { return edges_; }
  const std::vector<int>& dims() const { return dims_; }
  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_edges() const { return edges_.size(); }

  bool has_vertex(Site v) const { return position_.count(v) != 0; }

  /// Tensor-factor position of a vertex.
  std::size_t position(Site v) const {
    auto it = position_.find(v);
    if (it == position_.end()) {
      throw Error(ErrorKind::UnknownVertex, "vertex " + std::to_string(v));
    }
    return it->second;
  }

  int local_dim(Site v) const { return dims_[position(v)]; }

  /// Product of local dimensions over a set of sites (1 for the empty set).
  std::size_t dimension_of(const VertexSet& sites) const {
    std::size_t d = 1;
    for (Site v : sites) d *= static_cast<std::size_t>(local_dim(v));
    return d;
  }

  std::size_t hilbert_dim() const {
    std::size_t d = 1;
    for (int x : dims_) d *= static_cast<std::size_t>(x);
    return d;
  }

  std::optional<std::size_t> edge_index(const VertexSet& edge) const {
    auto it = std::find(edges_.begin(), edges_.end(), edge);
    if (it == edges_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - edges_.begin());
  }

  /// Neighbours of edge i in the edge intersection graph (self excluded).
  const std::vector<std::size_t>& edge_neighbors(std::size_t i) const {
    return adjacency_[i];
  }

  VertexSet all_vertices() const { return {vertices_.begin(), vertices_.end()}; }

  VertexSet complement(const VertexSet& region) const {
    VertexSet out;
    for (Site v : vertices_) {
      if (!region.count(v)) out.insert(v);
    }
    return out;
  }

  /// Same vertex order and dimensions (edges may differ).
  bool same_space(const InteractionGraph& other) const {
    return vertices_ == other.vertices_ && dims_ == other.dims_;
  }

  /// Copy with the same vertices and dimensions but a new hyperedge set.
  InteractionGraph with_edges(std::vector<VertexSet> hyperedges) const {
    std::map<Site, int> dims;
    for (std::size_t i = 0; i < vertices_.size(); ++i) dims[vertices_[i]] = dims_[i];
    return InteractionGraph(vertices_, std::move(hyperedges), std::move(dims));
  }

 private:
  std::vector<Site> vertices_;
  std::vector<int> dims_;
  std::map<Site, std::size_t> position_;
  std::vector<VertexSet> edges_;
  std::vector<std::vector<std::size_t>> adjacency_;
};

inline InteractionGraph build_graph(std::vector<Site> vertices,
                                    std::vector<VertexSet> hyperedges,
                                    std::map<Site, int> local_dims) {
  return InteractionGraph(std::move(vertices), std::move(hyperedges),
                          std::move(local_dims));
}

inline InteractionGraph build_graph(std::vector<Site> vertices,
                                    std::vector<VertexSet> hyperedges,
                                    int local_dim) {
  std::map<Site, int> dims;
  for (Site v : vertices) dims[v] = local_dim;
  return InteractionGraph(std::move(vertices), std::move(hyperedges), std::move(dims));
}

namespace detail {

inline void check_sets(const InteractionGraph& g, const VertexSet& x,
                       const VertexSet& y) {
  if (x.empty() || y.empty()) {
    throw Error(ErrorKind::EmptySet, "distance queried with an empty set");
  }
  for (const auto* set : {&x, &y}) {
    for (Site v : *set) {
      if (!g.has_vertex(v)) {
        throw Error(ErrorKind::UnknownVertex, "vertex " + std::to_string(v));
      }
    }
  }
}

}  // namespace detail

/// d(X, Y): 0 iff the sets intersect, otherwise the number of hyperedges in
/// the shortest chain whose first edge meets X, last edge meets Y and
/// consecutive edges overlap. Multi-source BFS on the edge intersection graph.
inline Distance distance(const InteractionGraph& g, const VertexSet& x,
                         const VertexSet& y) {
  detail::check_sets(g, x, y);
  if (intersects(x, y)) return Distance(0);
  const auto& edges = g.hyperedges();
  constexpr std::size_t kUnseen = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> level(edges.size(), kUnseen);
  std::queue<std::size_t> frontier;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (intersects(edges[i], x)) {
      level[i] = 1;
      frontier.push(i);
    }
  }
  while (!frontier.empty()) {
    const std::size_t i = frontier.front();
    frontier.pop();
    if (intersects(edges[i], y)) return Distance(level[i]);
    for (std::size_t j : g.edge_neighbors(i)) {
      if (level[j] == kUnseen) {
        level[j] = level[i] + 1;
        frontier.push(j);
      }
    }
  }
  return Distance::infinite();
}

/// S_X(n) = { Y in E : d(Y, X) = n } for a hyperedge X.
inline std::vector<VertexSet> sphere(const InteractionGraph& g, const VertexSet& x,
                                     std::size_t n) {
  if (!g.edge_index(x)) {
    throw Error(ErrorKind::NotAnEdge, to_string(x) + " is not a hyperedge");
  }
  std::vector<VertexSet> out;
  for (const auto& e : g.hyperedges()) {
    if (distance(g, e, x) == Distance(n)) out.push_back(e);
  }
  return out;
}

/// Z: the largest number of hyperedges meeting a given hyperedge, itself
/// included.
inline std::size_t max_neighbors(const InteractionGraph& g) {
  if (g.num_edges() == 0) throw Error(ErrorKind::NoEdges, "graph has no hyperedges");
  std::size_t z = 0;
  for (std::size_t i = 0; i < g.num_edges(); ++i) {
    z = std::max(z, g.edge_neighbors(i).size() + 1);
  }
  return z;
}

inline bool edges_connected(const InteractionGraph& g) {
  if (g.num_edges() == 0) return false;
  std::vector<bool> seen(g.num_edges(), false);
  std::queue<std::size_t> frontier;
  frontier.push(0);
  seen[0] = true;
  std::size_t count = 1;
  while (!frontier.empty()) {
    const std::size_t i = frontier.front();
    frontier.pop();
    for (std::size_t j : g.edge_neighbors(i)) {
      if (!seen[j]) {
        seen[j] = true;
        ++count;
        frontier.push(j);
      }
    }
  }
  return count == g.num_edges();
}

/// Sphere sizes |S_X(n)| for n = 0..max, indexed [edge][n].
inline std::vector<std::vector<std::size_t>> sphere_profile(const InteractionGraph& g) {
  std::vector<std::vector<std::size_t>> profile;
  const auto& edges = g.hyperedges();
  for (const auto& x : edges) {
    std::vector<std::size_t> sizes;
    for (const auto& y : edges) {
      const Distance d = distance(g, y, x);
      if (d.is_infinite()) continue;
      if (sizes.size() <= d.value()) sizes.resize(d.value() + 1, 0);
      ++sizes[d.value()];
    }
    profile.push_back(std::move(sizes));
  }
  return profile;
}

/// Smallest M with |S_X(n)| <= M n^(mu-1) for every hyperedge X and every
/// radius 1 <= n <= diameter. Returns 1 for graphs of diameter zero.
inline double spatial_dimension_constant(const InteractionGraph& g, int mu) {
  if (mu < 1) throw Error(ErrorKind::InvalidArgument, "mu must be >= 1");
  if (g.num_edges() == 0) throw Error(ErrorKind::NoEdges, "graph has no hyperedges");
  if (!edges_connected(g)) {
    throw Error(ErrorKind::Disconnected, "interaction graph is disconnected");
  }
  double m = 0.0;
  for (const auto& sizes : sphere_profile(g)) {
    for (std::size_t n = 1; n < sizes.size(); ++n) {
      const double bound = static_cast<double>(sizes[n]) /
                           std::pow(static_cast<double>(n), mu - 1);
      m = std::max(m, bound);
    }
  }
  return m > 0.0 ? m : 1.0;
}

/// Growth exponent guess: 1 + rounded log-log slope of the largest sphere
/// size against n + 1, fitted from n = 1 up to the radius where the largest
/// sphere peaks (beyond it finite-size boundaries shrink the spheres).
/// Clamped to at least 1.
inline int estimate_spatial_dimension(const InteractionGraph& g) {
  if (g.num_edges() == 0) throw Error(ErrorKind::NoEdges, "graph has no hyperedges");
  std::vector<double> largest;
  for (const auto& sizes : sphere_profile(g)) {
    if (largest.size() < sizes.size()) largest.resize(sizes.size(), 0.0);
    for (std::size_t n = 1; n < sizes.size(); ++n) {
      largest[n] = std::max(largest[n], static_cast<double>(sizes[n]));
    }
  }
  std::size_t peak = 1;
  for (std::size_t n = 1; n < largest.size(); ++n) {
    if (largest[n] > largest[peak]) peak = n;
  }
  const std::size_t last = std::min(std::max<std::size_t>(peak, 2), largest.size() - 1);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (std::size_t n = 1; n <= last; ++n) {
    if (largest[n] <= 0) continue;
    const double lx = std::log(static_cast<double>(n + 1));
    const double ly = std::log(largest[n]);
    sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
    ++count;
  }
  if (count < 2) return 1;
  const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  return std::max(1, 1 + static_cast<int>(std::lround(slope)));
}

/// Open chain 1..n with nearest-neighbour edges, optionally with one
/// single-site edge per vertex.
inline InteractionGraph chain_graph(int n, bool site_edges = false, int local_dim = 2) {
  std::vector<Site> vertices;
  std::vector<VertexSet> edges;
  for (int j = 1; j <= n; ++j) vertices.push_back(j);
  for (int j = 1; j < n; ++j) edges.push_back({j, j + 1});
  if (site_edges) {
    for (int j = 1; j <= n; ++j) edges.push_back({j});
  }
  return build_graph(vertices, edges, local_dim);
}

/// side x side open square lattice with nearest-neighbour edges; vertex
/// (r, c) has id r * side + c + 1.
inline InteractionGraph square_lattice_graph(int side, int local_dim = 2) {
  std::vector<Site> vertices;
  std::vector<VertexSet> edges;
  auto id = [side](int r, int c) { return r * side + c + 1; };
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) {
      vertices.push_back(id(r, c));
      if (c + 1 < side) edges.push_back({id(r, c), id(r, c + 1)});
      if (r + 1 < side) edges.push_back({id(r, c), id(r + 1, c)});
    }
  }
  return build_graph(vertices, edges, local_dim);
}

}  // namespace lrsim

#endif  // LRSIM_LATTICE_GRAPH_HPP
