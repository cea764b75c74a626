// Copyright 2026 The aggmia Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "aggmia/delaunay.h"

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <numeric>
#include <optional>
#include <queue>
#include <unordered_map>

#include "absl/status/status.h"

namespace aggmia {
namespace {

uint64_t EdgeKey(int a, int b) {
  return (static_cast<uint64_t>(static_cast<uint32_t>(a)) << 32) |
         static_cast<uint32_t>(b);
}

std::vector<int> LexicographicOrder(std::span<const Point> points) {
  std::vector<int> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    const Point& a = points[static_cast<std::size_t>(i)];
    const Point& b = points[static_cast<std::size_t>(j)];
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  return order;
}

// Mesh state for the sweep. Triangles are stored CCW and indexed by their
// directed edges, so the triangle across edge a->b is the owner of b->a.
class SweepMesh {
 public:
  explicit SweepMesh(std::span<const Point> points) : points_(points) {}

  absl::Status Run() {
    const std::vector<int> order = LexicographicOrder(points_);
    const std::size_t n = order.size();
    std::size_t k = 2;
    while (k < n && Orient(order[0], order[1], order[k]) == 0) ++k;
    if (k == n) {
      return absl::FailedPreconditionError("all points are collinear");
    }
    // Fan from the first non-collinear point over the collinear prefix.
    const int apex = order[k];
    const bool apex_left = Orient(order[0], order[k - 1], apex) > 0;
    for (std::size_t i = 0; i + 1 < k; ++i) {
      if (apex_left) {
        AddTriangle(order[i], order[i + 1], apex);
      } else {
        AddTriangle(order[i + 1], order[i], apex);
      }
    }
    if (apex_left) {
      for (std::size_t i = 0; i < k; ++i) hull_.push_back(order[i]);
      hull_.push_back(apex);
    } else {
      hull_.push_back(order[0]);
      hull_.push_back(apex);
      for (std::size_t i = k - 1; i >= 1; --i) hull_.push_back(order[i]);
    }
    for (std::size_t i = k + 1; i < n; ++i) Insert(order[i]);
    return absl::OkStatus();
  }

  std::vector<Triangle> Triangles() const {
    std::vector<Triangle> out;
    for (std::size_t t = 0; t < tris_.size(); ++t) {
      if (alive_[t]) out.push_back(tris_[t]);
    }
    return out;
  }

 private:
  long double Orient(int a, int b, int c) const {
    return Orient2d(P(a), P(b), P(c));
  }
  const Point& P(int i) const { return points_[static_cast<std::size_t>(i)]; }

  int AddTriangle(int a, int b, int c) {
    assert(Orient(a, b, c) > 0);
    const int id = static_cast<int>(tris_.size());
    tris_.push_back({a, b, c});
    alive_.push_back(true);
    owner_[EdgeKey(a, b)] = id;
    owner_[EdgeKey(b, c)] = id;
    owner_[EdgeKey(c, a)] = id;
    return id;
  }

  void RemoveTriangle(int id) {
    const Triangle& t = tris_[static_cast<std::size_t>(id)];
    for (int e = 0; e < 3; ++e) {
      auto it = owner_.find(EdgeKey(t[e], t[(e + 1) % 3]));
      if (it != owner_.end() && it->second == id) owner_.erase(it);
    }
    alive_[static_cast<std::size_t>(id)] = false;
  }

  std::optional<int> Owner(int a, int b) const {
    auto it = owner_.find(EdgeKey(a, b));
    if (it == owner_.end()) return std::nullopt;
    return it->second;
  }

  static int Apex(const Triangle& t, int a, int b) {
    for (int v : t) {
      if (v != a && v != b) return v;
    }
    return -1;
  }

  // Restores local Delaunayness starting from edge a->b; the inserted point is
  // the apex of the triangle on its left.
  void Legalize(int a, int b) {
    std::vector<std::pair<int, int>> stack = {{a, b}};
    while (!stack.empty()) {
      const auto [x, y] = stack.back();
      stack.pop_back();
      std::optional<int> left = Owner(x, y);
      std::optional<int> right = Owner(y, x);
      if (!left || !right) continue;
      const int c = Apex(tris_[static_cast<std::size_t>(*left)], x, y);
      const int d = Apex(tris_[static_cast<std::size_t>(*right)], x, y);
      if (InCircle(P(x), P(y), P(c), P(d)) <= 0) continue;
      RemoveTriangle(*left);
      RemoveTriangle(*right);
      AddTriangle(x, d, c);
      AddTriangle(d, y, c);
      stack.push_back({x, d});
      stack.push_back({d, y});
    }
  }

  void Insert(int p) {
    const std::size_t h = hull_.size();
    std::vector<bool> visible(h);
    for (std::size_t i = 0; i < h; ++i) {
      visible[i] = Orient(hull_[i], hull_[(i + 1) % h], p) < 0;
    }
    // Visible edges form one circular run; find where it starts.
    std::size_t start = 0;
    while (start < h && !(visible[start] && !visible[(start + h - 1) % h])) {
      ++start;
    }
    assert(start < h);
    std::size_t count = 0;
    while (count < h && visible[(start + count) % h]) ++count;

    std::vector<std::pair<int, int>> new_edges;
    for (std::size_t j = 0; j < count; ++j) {
      const int a = hull_[(start + j) % h];
      const int b = hull_[(start + j + 1) % h];
      AddTriangle(b, a, p);
      new_edges.push_back({b, a});
    }
    for (const auto& [x, y] : new_edges) Legalize(x, y);

    // Vertices strictly inside the visible run leave the hull.
    std::vector<int> next;
    next.reserve(h + 1);
    const std::size_t last = (start + count) % h;
    for (std::size_t j = 0; j < h; ++j) {
      const std::size_t i = (last + j) % h;
      next.push_back(hull_[i]);
      if (i == start) break;
    }
    next.push_back(p);
    hull_ = std::move(next);
  }

  std::span<const Point> points_;
  std::vector<Triangle> tris_;
  std::vector<bool> alive_;
  std::unordered_map<uint64_t, int> owner_;
  std::vector<int> hull_;  // counter-clockwise
};

}  // namespace

long double Orient2d(const Point& a, const Point& b, const Point& c) {
  const long double abx = static_cast<long double>(b.x) - a.x;
  const long double aby = static_cast<long double>(b.y) - a.y;
  const long double acx = static_cast<long double>(c.x) - a.x;
  const long double acy = static_cast<long double>(c.y) - a.y;
  return abx * acy - aby * acx;
}

long double InCircle(const Point& a, const Point& b, const Point& c,
                     const Point& d) {
  const long double adx = static_cast<long double>(a.x) - d.x;
  const long double ady = static_cast<long double>(a.y) - d.y;
  const long double bdx = static_cast<long double>(b.x) - d.x;
  const long double bdy = static_cast<long double>(b.y) - d.y;
  const long double cdx = static_cast<long double>(c.x) - d.x;
  const long double cdy = static_cast<long double>(c.y) - d.y;
  const long double ad = adx * adx + ady * ady;
  const long double bd = bdx * bdx + bdy * bdy;
  const long double cd = cdx * cdx + cdy * cdy;
  return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) +
         ad * (bdx * cdy - bdy * cdx);
}

absl::StatusOr<std::vector<Triangle>> DelaunayTriangulate(
    std::span<const Point> points) {
  if (points.size() < 3) {
    return absl::InvalidArgumentError("triangulation needs at least 3 points");
  }
  SweepMesh mesh(points);
  if (absl::Status s = mesh.Run(); !s.ok()) return s;
  return mesh.Triangles();
}

DelaunayGraph DelaunayGraph::FromEdges(std::size_t n_vertices,
                                       std::vector<std::pair<int, int>> edges,
                                       bool degenerate) {
  DelaunayGraph g;
  g.degenerate_ = degenerate;
  for (auto& [u, v] : edges) {
    if (u > v) std::swap(u, v);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  g.adjacency_.assign(n_vertices, {});
  for (const auto& [u, v] : edges) {
    if (u == v) continue;
    g.adjacency_[static_cast<std::size_t>(u)].push_back(v);
    g.adjacency_[static_cast<std::size_t>(v)].push_back(u);
    g.edges_.push_back({u, v});
  }
  for (auto& nbrs : g.adjacency_) std::sort(nbrs.begin(), nbrs.end());
  return g;
}

bool DelaunayGraph::IsConnected() const {
  if (adjacency_.empty()) return true;
  std::vector<bool> seen(adjacency_.size(), false);
  std::queue<int> q;
  q.push(0);
  seen[0] = true;
  std::size_t reached = 1;
  while (!q.empty()) {
    const int v = q.front();
    q.pop();
    for (int w : neighbors(v)) {
      if (!seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = true;
        ++reached;
        q.push(w);
      }
    }
  }
  return reached == adjacency_.size();
}

absl::StatusOr<DelaunayGraph> BuildDelaunay(const RoiGeometry& geometry) {
  absl::StatusOr<std::vector<Triangle>> tris =
      DelaunayTriangulate(geometry.positions());
  if (!tris.ok()) return tris.status();
  std::vector<std::pair<int, int>> edges;
  edges.reserve(tris->size() * 3);
  for (const Triangle& t : *tris) {
    edges.push_back({t[0], t[1]});
    edges.push_back({t[1], t[2]});
    edges.push_back({t[2], t[0]});
  }
  return DelaunayGraph::FromEdges(geometry.size(), std::move(edges));
}

DelaunayGraph BuildDelaunayOrPath(const RoiGeometry& geometry) {
  absl::StatusOr<DelaunayGraph> g = BuildDelaunay(geometry);
  if (g.ok()) return *std::move(g);
  const std::vector<int> order = LexicographicOrder(geometry.positions());
  std::vector<std::pair<int, int>> edges;
  for (std::size_t i = 0; i + 1 < order.size(); ++i) {
    edges.push_back({order[i], order[i + 1]});
  }
  return DelaunayGraph::FromEdges(geometry.size(), std::move(edges),
                                  /*degenerate=*/true);
}

std::vector<int> ConnectedSubgraph(const DelaunayGraph& graph, int seed,
                                   int n_rois, Rng& rng) {
  std::vector<int> members = {seed};
  if (n_rois <= 1) return members;
  std::vector<bool> in_set(graph.num_vertices(), false);
  std::vector<bool> in_frontier(graph.num_vertices(), false);
  in_set[static_cast<std::size_t>(seed)] = true;
  std::vector<int> frontier;
  auto extend = [&](int v) {
    for (int w : graph.neighbors(v)) {
      const auto wi = static_cast<std::size_t>(w);
      if (!in_set[wi] && !in_frontier[wi]) {
        in_frontier[wi] = true;
        frontier.push_back(w);
      }
    }
  };
  extend(seed);
  while (static_cast<int>(members.size()) < n_rois && !frontier.empty()) {
    const std::size_t pick = rng.UniformInt(frontier.size());
    const int v = frontier[pick];
    frontier[pick] = frontier.back();
    frontier.pop_back();
    in_frontier[static_cast<std::size_t>(v)] = false;
    in_set[static_cast<std::size_t>(v)] = true;
    members.push_back(v);
    extend(v);
  }
  return members;
}

}  // namespace aggmia
