#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <queue>
#include <span>
#include <vector>

namespace wheelplan::detail {

/// Static k-d tree over points of dimension Dim; k-nearest queries by squared distance.
template <std::size_t Dim>
class KdTree {
public:
    using Point = std::array<double, Dim>;

    explicit KdTree(std::span<const Point> points) : points_(points.begin(), points.end()) {
        index_.resize(points_.size());
        for (std::size_t i = 0; i < index_.size(); ++i) index_[i] = i;
        if (!index_.empty()) build(0, index_.size(), 0);
    }

    /// Squared distances of the k nearest neighbors of points_[self], excluding self,
    /// sorted ascending.
    std::vector<double> knn_sq_excluding(std::size_t self, std::size_t k) const {
        Heap heap;
        search(0, index_.size(), 0, points_[self], self, k, heap);
        std::vector<double> out;
        out.reserve(heap.size());
        while (!heap.empty()) {
            out.push_back(heap.top().first);
            heap.pop();
        }
        std::reverse(out.begin(), out.end());
        return out;
    }

private:
    using Entry = std::pair<double, std::size_t>;
    using Heap = std::priority_queue<Entry>;
    static constexpr std::size_t kLeaf = 8;

    struct Node {
        std::size_t axis;
        double split;
    };

    void build(std::size_t lo, std::size_t hi, std::size_t node_id) {
        if (hi - lo <= kLeaf) return;
        // Split along the axis of largest spread.
        Point mn = points_[index_[lo]], mx = mn;
        for (std::size_t i = lo; i < hi; ++i) {
            for (std::size_t d = 0; d < Dim; ++d) {
                mn[d] = std::min(mn[d], points_[index_[i]][d]);
                mx[d] = std::max(mx[d], points_[index_[i]][d]);
            }
        }
        std::size_t axis = 0;
        for (std::size_t d = 1; d < Dim; ++d) {
            if (mx[d] - mn[d] > mx[axis] - mn[axis]) axis = d;
        }
        const std::size_t mid = lo + (hi - lo) / 2;
        std::nth_element(index_.begin() + lo, index_.begin() + mid, index_.begin() + hi,
                         [&](std::size_t a, std::size_t b) { return points_[a][axis] < points_[b][axis]; });
        if (nodes_.size() <= node_id) nodes_.resize(node_id + 1);
        nodes_[node_id] = Node{axis, points_[index_[mid]][axis]};
        build(lo, mid, 2 * node_id + 1);
        build(mid, hi, 2 * node_id + 2);
    }

    void search(std::size_t lo, std::size_t hi, std::size_t node_id, const Point& q, std::size_t self, std::size_t k, Heap& heap) const {
        if (hi - lo <= kLeaf) {
            for (std::size_t i = lo; i < hi; ++i) {
                const std::size_t idx = index_[i];
                if (idx == self) continue;
                double d2 = 0.0;
                for (std::size_t d = 0; d < Dim; ++d) {
                    const double diff = points_[idx][d] - q[d];
                    d2 += diff * diff;
                }
                if (heap.size() < k) {
                    heap.emplace(d2, idx);
                } else if (d2 < heap.top().first) {
                    heap.pop();
                    heap.emplace(d2, idx);
                }
            }
            return;
        }
        const Node& node = nodes_[node_id];
        const std::size_t mid = lo + (hi - lo) / 2;
        const double diff = q[node.axis] - node.split;
        const bool left_first = diff < 0.0;
        if (left_first) {
            search(lo, mid, 2 * node_id + 1, q, self, k, heap);
            if (heap.size() < k || diff * diff < heap.top().first) search(mid, hi, 2 * node_id + 2, q, self, k, heap);
        } else {
            search(mid, hi, 2 * node_id + 2, q, self, k, heap);
            if (heap.size() < k || diff * diff <= heap.top().first) search(lo, mid, 2 * node_id + 1, q, self, k, heap);
        }
    }

    std::vector<Point> points_;
    std::vector<std::size_t> index_;
    // Heap-ordered split records: children of node i are 2i+1 and 2i+2.
    std::vector<Node> nodes_;
};

}  // namespace wheelplan::detail
