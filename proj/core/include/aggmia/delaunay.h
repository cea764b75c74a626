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

#ifndef AGGMIA_DELAUNAY_H_
#define AGGMIA_DELAUNAY_H_

#include <array>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "aggmia/mobility.h"
#include "aggmia/random.h"

namespace aggmia {

// Triangle as three point indices in counter-clockwise order.
using Triangle = std::array<int, 3>;

// Orientation of (a, b, c): > 0 counter-clockwise, < 0 clockwise, 0 collinear.
long double Orient2d(const Point& a, const Point& b, const Point& c);

// > 0 iff d lies strictly inside the circumcircle of counter-clockwise (a, b, c).
long double InCircle(const Point& a, const Point& b, const Point& c,
                     const Point& d);

// Delaunay triangulation by lexicographic sweep insertion with Lawson edge
// flips. Points must be distinct and not all collinear. Cocircular ties are
// resolved by never flipping on a zero in-circle test, so the result depends
// only on the lexicographic order of the input.
absl::StatusOr<std::vector<Triangle>> DelaunayTriangulate(
    std::span<const Point> points);

// Undirected ROI adjacency derived from a triangulation.
class DelaunayGraph {
 public:
  DelaunayGraph() = default;
  // Edges may be given in any order or orientation; duplicates are merged.
  static DelaunayGraph FromEdges(std::size_t n_vertices,
                                 std::vector<std::pair<int, int>> edges,
                                 bool degenerate = false);

  std::size_t num_vertices() const { return adjacency_.size(); }
  // Sorted (u < v) unique edge list.
  std::span<const std::pair<int, int>> edges() const { return edges_; }
  std::span<const int> neighbors(int v) const {
    return adjacency_[static_cast<std::size_t>(v)];
  }
  // True when built by the collinear fallback (a path along the line).
  bool degenerate() const { return degenerate_; }
  bool IsConnected() const;

 private:
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> adjacency_;
  bool degenerate_ = false;
};

// Fails with FailedPrecondition for all-collinear geometry.
absl::StatusOr<DelaunayGraph> BuildDelaunay(const RoiGeometry& geometry);

// Like BuildDelaunay, but all-collinear geometry yields a path graph through
// the points in lexicographic order with degenerate() set.
DelaunayGraph BuildDelaunayOrPath(const RoiGeometry& geometry);

// Grows a connected vertex set from `seed` by repeatedly adding a uniformly
// chosen frontier vertex, until it has `n_rois` vertices or the component is
// exhausted.
std::vector<int> ConnectedSubgraph(const DelaunayGraph& graph, int seed,
                                   int n_rois, Rng& rng);

}  // namespace aggmia

#endif  // AGGMIA_DELAUNAY_H_
