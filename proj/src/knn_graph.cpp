#include "hvrp/knn_graph.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "hvrp/error.hpp"

namespace hvrp {

KnnGraph build_knn_graph(const CvrpInstance& inst, int k) {
  if (k < 1) throw ConfigError("knn: k must be at least 1");
  if (inst.capacity <= 0) throw ConfigError("knn: capacity must be positive");
  const int n = static_cast<int>(inst.size()) + 1;
  std::vector<Point> pts{inst.depot};
  std::vector<double> q{0.0};
  for (const auto& c : inst.customers) {
    pts.push_back(c.pos);
    q.push_back(static_cast<double>(c.demand) / inst.capacity);
  }
  double min_x = pts[0].x, min_y = pts[0].y;
  for (const auto& p : pts) {
    min_x = std::min(min_x, p.x);
    min_y = std::min(min_y, p.y);
  }
  double scale = 0.0;
  for (const auto& p : pts) scale = std::max({scale, p.x - min_x, p.y - min_y});
  if (scale <= 0.0) scale = 1.0;

  KnnGraph g;
  g.scale_factor = scale;
  g.features.resize(n, 3);
  // Neighbor selection runs on a fixed-point image of the normalized
  // coordinates so that translated copies of an instance, whose shifted
  // coordinates can differ in the last bits, produce identical orderings.
  std::vector<long long> qx(n), qy(n), qd(n);
  for (int i = 0; i < n; ++i) {
    const double x = (pts[i].x - min_x) / scale, y = (pts[i].y - min_y) / scale;
    g.features.row(i) << x, y, q[i];
    qx[i] = std::llround(x * 1e9);
    qy[i] = std::llround(y * 1e9);
    qd[i] = std::llround(q[i] * 1e9);
  }
  auto key = [&](int i, int j) {
    const long long dx = qx[i] - qx[j], dy = qy[i] - qy[j];
    return std::make_tuple(dx * dx + dy * dy, qx[j], qy[j], qd[j], j != 0, j);
  };
  const int kk = std::min(k, n - 1);
  g.neighbor_offset.assign(n + 1, 0);
  g.neighbor_index.reserve(static_cast<std::size_t>(n) * kk);
  std::vector<int> others;
  for (int i = 0; i < n; ++i) {
    others.clear();
    for (int j = 0; j < n; ++j)
      if (j != i) others.push_back(j);
    std::partial_sort(others.begin(), others.begin() + kk, others.end(),
                      [&](int a, int b) { return key(i, a) < key(i, b); });
    g.neighbor_index.insert(g.neighbor_index.end(), others.begin(), others.begin() + kk);
    g.neighbor_offset[i + 1] = static_cast<int>(g.neighbor_index.size());
  }
  return g;
}

}  // namespace hvrp
