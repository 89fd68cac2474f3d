#include "mrseg/kdtree.hpp"

#include <algorithm>
#include <numeric>
#include <queue>

#include "mrseg/error.hpp"

namespace mrseg {

namespace {

constexpr std::uint32_t kLeafSize = 16;

double dist2(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

}  // namespace

NeighborIndex::NeighborIndex(std::span<const Vec3> points)
    : points_(points.begin(), points.end()) {
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  nodes_.reserve(points_.empty() ? 1 : 2 * points_.size() / kLeafSize + 2);
  root_ = build(0, static_cast<std::uint32_t>(points_.size()));
}

std::uint32_t NeighborIndex::build(std::uint32_t begin, std::uint32_t end) {
  if (end - begin <= kLeafSize) {
    nodes_.push_back(Node{0.0, -1, begin, end});
    return static_cast<std::uint32_t>(nodes_.size() - 1);
  }

  Vec3 lo = points_[order_[begin]];
  Vec3 hi = lo;
  for (std::uint32_t i = begin + 1; i < end; ++i) {
    const Vec3& p = points_[order_[i]];
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  }
  int axis = 0;
  for (int a = 1; a < 3; ++a)
    if (hi[a] - lo[a] > hi[axis] - lo[axis]) axis = a;

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     return points_[a][axis] < points_[b][axis];
                   });

  const std::uint32_t id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back(Node{points_[order_[mid]][axis], axis, 0, 0});
  const std::uint32_t left = build(begin, mid);
  const std::uint32_t right = build(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

std::vector<std::uint32_t> NeighborIndex::knn(const Vec3& query, std::size_t k) const {
  if (k < 1) throw ValidationError("k must be at least 1");
  if (k > points_.size())
    throw ValidationError("k=" + std::to_string(k) + " exceeds the indexed cloud size of " +
                          std::to_string(points_.size()));

  using Entry = std::pair<double, std::uint32_t>;  // (squared distance, index)
  std::priority_queue<Entry> heap;                 // top is the current worst

  // (node, lower bound on squared distance to the node's region)
  std::vector<std::pair<std::uint32_t, double>> stack;
  stack.emplace_back(root_, 0.0);

  while (!stack.empty()) {
    const auto [id, bound] = stack.back();
    stack.pop_back();
    if (heap.size() == k && bound > heap.top().first) continue;

    const Node& node = nodes_[id];
    if (node.axis < 0) {
      for (std::uint32_t i = node.left; i < node.right; ++i) {
        const std::uint32_t idx = order_[i];
        const Entry e{dist2(points_[idx], query), idx};
        if (heap.size() < k) {
          heap.push(e);
        } else if (e < heap.top()) {
          heap.pop();
          heap.push(e);
        }
      }
      continue;
    }

    const double diff = query[node.axis] - node.split;
    const std::uint32_t near = diff <= 0.0 ? node.left : node.right;
    const std::uint32_t far = diff <= 0.0 ? node.right : node.left;
    stack.emplace_back(far, diff * diff);
    stack.emplace_back(near, 0.0);
  }

  std::vector<std::uint32_t> out(heap.size());
  for (std::size_t i = heap.size(); i-- > 0;) {
    out[i] = heap.top().second;
    heap.pop();
  }
  return out;
}

std::uint32_t NeighborIndex::nearest(const Vec3& query) const { return knn(query, 1)[0]; }

std::uint64_t NeighborIndex::memory_bytes() const {
  return points_.size() * sizeof(Vec3) + order_.size() * sizeof(std::uint32_t) +
         nodes_.size() * sizeof(Node);
}

}  // namespace mrseg
