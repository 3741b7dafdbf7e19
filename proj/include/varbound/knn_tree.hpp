#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace varbound {

enum class Metric { Euclidean, Chebyshev };

// Static kd-tree over the points it was built from. Queries are always
// about a stored point (self excluded), which is all the k-NN estimators
// need. Leaves keep their coordinates coordinate-major so distance
// evaluation runs through the SIMD block kernels.
class KnnTree {
 public:
  // `points` is row-major: n rows of `dim` values.
  KnnTree(std::span<const double> points, std::size_t dim, Metric metric,
          std::size_t leaf_size = 32);

  std::size_t size() const { return n_; }
  std::size_t dim() const { return dim_; }

  // Distance from stored point i to its k-th nearest other point.
  double kth_neighbor_distance(std::size_t i, std::size_t k) const;

  // Number of stored points j != i with dist(x_i, x_j) < radius.
  std::size_t count_within(std::size_t i, double radius) const;

 private:
  struct Node {
    std::size_t begin;
    std::size_t end;
    long left;
    long right;
  };

  std::size_t build(std::size_t begin, std::size_t end);
  double box_min(std::size_t node, const double* q) const;
  double box_max(std::size_t node, const double* q) const;
  // Raw metric value: squared distance for Euclidean.
  void block_distances(std::size_t begin, std::size_t count, const double* q, double* out) const;

  std::size_t n_;
  std::size_t dim_;
  Metric metric_;
  std::size_t leaf_size_;
  std::vector<double> points_;    // original row-major copy
  std::vector<std::size_t> order_;     // tree slot -> original index
  std::vector<std::size_t> slot_;      // original index -> tree slot
  std::vector<double> soa_;       // dim x n, tree-slot order
  std::vector<Node> nodes_;
  std::vector<double> lo_;        // per-node bounding boxes
  std::vector<double> hi_;
};

}  // namespace varbound
