#include "varbound/knn_tree.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "varbound/simd/kernels.hpp"

namespace varbound {
namespace {
constexpr std::size_t kMaxLeaf = 64;
constexpr std::size_t kMaxK = 64;
}  // namespace

KnnTree::KnnTree(std::span<const double> points, std::size_t dim, Metric metric,
                 std::size_t leaf_size)
    : n_(dim == 0 ? 0 : points.size() / dim),
      dim_(dim),
      metric_(metric),
      leaf_size_(std::clamp<std::size_t>(leaf_size, 4, kMaxLeaf)),
      points_(points.begin(), points.end()) {
  if (dim == 0 || points.size() % dim != 0) throw std::invalid_argument("KnnTree: bad point buffer");
  if (n_ < 2) throw std::invalid_argument("KnnTree: need at least two points");
  order_.resize(n_);
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  nodes_.reserve(2 * n_ / leaf_size_ + 2);
  build(0, n_);

  slot_.resize(n_);
  soa_.resize(dim_ * n_);
  for (std::size_t s = 0; s < n_; ++s) {
    slot_[order_[s]] = s;
    for (std::size_t c = 0; c < dim_; ++c) soa_[c * n_ + s] = points_[order_[s] * dim_ + c];
  }
}

std::size_t KnnTree::build(std::size_t begin, std::size_t end) {
  const std::size_t id = nodes_.size();
  nodes_.push_back({begin, end, -1, -1});
  lo_.resize((id + 1) * dim_);
  hi_.resize((id + 1) * dim_);
  for (std::size_t c = 0; c < dim_; ++c) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t s = begin; s < end; ++s) {
      const double v = points_[order_[s] * dim_ + c];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    lo_[id * dim_ + c] = lo;
    hi_[id * dim_ + c] = hi;
  }
  if (end - begin <= leaf_size_) return id;

  std::size_t split_dim = 0;
  double spread = -1.0;
  for (std::size_t c = 0; c < dim_; ++c) {
    const double s = hi_[id * dim_ + c] - lo_[id * dim_ + c];
    if (s > spread) {
      spread = s;
      split_dim = c;
    }
  }
  if (spread <= 0.0) return id;  // all points identical: keep as one leaf
  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                   order_.begin() + static_cast<std::ptrdiff_t>(mid),
                   order_.begin() + static_cast<std::ptrdiff_t>(end),
                   [&](std::size_t a, std::size_t b) {
                     const double va = points_[a * dim_ + split_dim];
                     const double vb = points_[b * dim_ + split_dim];
                     return va < vb || (va == vb && a < b);
                   });
  const std::size_t left = build(begin, mid);
  const std::size_t right = build(mid, end);
  nodes_[id].left = static_cast<long>(left);
  nodes_[id].right = static_cast<long>(right);
  return id;
}

double KnnTree::box_min(std::size_t node, const double* q) const {
  const double* lo = &lo_[node * dim_];
  const double* hi = &hi_[node * dim_];
  double acc = 0.0;
  for (std::size_t c = 0; c < dim_; ++c) {
    const double d = q[c] < lo[c] ? lo[c] - q[c] : (q[c] > hi[c] ? q[c] - hi[c] : 0.0);
    if (metric_ == Metric::Euclidean) {
      acc += d * d;
    } else {
      acc = std::max(acc, d);
    }
  }
  return acc;
}

double KnnTree::box_max(std::size_t node, const double* q) const {
  const double* lo = &lo_[node * dim_];
  const double* hi = &hi_[node * dim_];
  double acc = 0.0;
  for (std::size_t c = 0; c < dim_; ++c) {
    const double d = std::max(std::fabs(q[c] - lo[c]), std::fabs(q[c] - hi[c]));
    if (metric_ == Metric::Euclidean) {
      acc += d * d;
    } else {
      acc = std::max(acc, d);
    }
  }
  return acc;
}

void KnnTree::block_distances(std::size_t begin, std::size_t count, const double* q,
                              double* out) const {
  const auto& kern = simd::active();
  if (metric_ == Metric::Euclidean) {
    kern.sq_l2_block(q, soa_.data() + begin, n_, count, dim_, out);
  } else {
    kern.linf_block(q, soa_.data() + begin, n_, count, dim_, out);
  }
}

double KnnTree::kth_neighbor_distance(std::size_t i, std::size_t k) const {
  if (k == 0 || k >= n_ || k > kMaxK) throw std::invalid_argument("KnnTree: k out of range");
  const double* q = &points_[i * dim_];
  const std::size_t self = slot_[i];

  std::array<double, kMaxK> best;
  best.fill(std::numeric_limits<double>::infinity());
  std::array<double, kMaxLeaf> dist;
  std::vector<std::size_t> stack;
  stack.reserve(64);
  stack.push_back(0);
  while (!stack.empty()) {
    const std::size_t id = stack.back();
    stack.pop_back();
    if (box_min(id, q) >= best[k - 1] && best[k - 1] < std::numeric_limits<double>::infinity()) continue;
    const Node& nd = nodes_[id];
    if (nd.left < 0) {
      // oversized leaves only occur when every point coincides
      for (std::size_t b = nd.begin; b < nd.end; b += kMaxLeaf) {
        const std::size_t cnt = std::min(kMaxLeaf, nd.end - b);
        block_distances(b, cnt, q, dist.data());
        for (std::size_t j = 0; j < cnt; ++j) {
          if (b + j == self) continue;
          const double d = dist[j];
          if (d >= best[k - 1]) continue;
          std::size_t pos = k - 1;
          while (pos > 0 && best[pos - 1] > d) {
            best[pos] = best[pos - 1];
            --pos;
          }
          best[pos] = d;
        }
      }
      continue;
    }
    const auto l = static_cast<std::size_t>(nd.left);
    const auto r = static_cast<std::size_t>(nd.right);
    const double dl = box_min(l, q);
    const double dr = box_min(r, q);
    // nearer child popped first
    if (dl <= dr) {
      stack.push_back(r);
      stack.push_back(l);
    } else {
      stack.push_back(l);
      stack.push_back(r);
    }
  }
  const double raw = best[k - 1];
  return metric_ == Metric::Euclidean ? std::sqrt(raw) : raw;
}

std::size_t KnnTree::count_within(std::size_t i, double radius) const {
  const double* q = &points_[i * dim_];
  const std::size_t self = slot_[i];
  const double limit = metric_ == Metric::Euclidean ? radius * radius : radius;
  if (!(limit > 0.0)) return 0;

  std::array<double, kMaxLeaf> dist;
  std::size_t count = 0;
  std::vector<std::size_t> stack;
  stack.reserve(64);
  stack.push_back(0);
  while (!stack.empty()) {
    const std::size_t id = stack.back();
    stack.pop_back();
    if (box_min(id, q) >= limit) continue;
    const Node& nd = nodes_[id];
    if (box_max(id, q) < limit) {
      count += nd.end - nd.begin;
      if (self >= nd.begin && self < nd.end) --count;
      continue;
    }
    if (nd.left < 0) {
      for (std::size_t b = nd.begin; b < nd.end; b += kMaxLeaf) {
        const std::size_t cnt = std::min(kMaxLeaf, nd.end - b);
        block_distances(b, cnt, q, dist.data());
        for (std::size_t j = 0; j < cnt; ++j) {
          if (b + j != self && dist[j] < limit) ++count;
        }
      }
      continue;
    }
    stack.push_back(static_cast<std::size_t>(nd.left));
    stack.push_back(static_cast<std::size_t>(nd.right));
  }
  return count;
}

}  // namespace varbound
