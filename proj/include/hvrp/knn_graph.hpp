#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "hvrp/instances.hpp"

namespace hvrp {

/// Node 0 is the depot, node i+1 is customer i.
struct KnnGraph {
  Eigen::MatrixXd features;  // (N+1) x 3: normalized x, normalized y, q / Q
  // Neighbors of node i are neighbor_index[neighbor_offset[i] .. neighbor_offset[i+1]).
  std::vector<int> neighbor_offset;
  std::vector<int> neighbor_index;
  double scale_factor = 1.0;

  int num_nodes() const { return static_cast<int>(features.rows()); }
  std::span<const int> neighbors(int i) const {
    return {neighbor_index.data() + neighbor_offset[i], neighbor_index.data() + neighbor_offset[i + 1]};
  }
};

/// Coordinates are shifted so each axis minimum is 0, then divided by the
/// largest shifted coordinate (scale_factor, 1 when all points coincide).
/// Each node links to its min(k, N) nearest other nodes. Ties are broken by
/// node content (position, then demand, depot first), never by input order,
/// so a customer permutation yields the same neighbor sets.
KnnGraph build_knn_graph(const CvrpInstance& inst, int k);

}  // namespace hvrp
