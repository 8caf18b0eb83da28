#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <deque>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "hyperorbit/matrix_core.hpp"

namespace hyperorbit {

inline constexpr std::int64_t kMaxGridCells = 10'000'000;

struct CoverageStats {
  int dimension = 0;
  int cells_per_axis = 0;
  double box_halfwidth = 0.0;
  std::int64_t total_cells = 0;
  std::int64_t cells_hit = 0;
  double coverage = 0.0;
  std::int64_t points = 0;
  // Number of cells holding exactly c points, keyed by c (0 included).
  std::map<std::int64_t, std::int64_t> histogram;
  // Largest Chebyshev distance (in cells) from an empty cell to a hit cell,
  // converted to a radius in ambient units.
  double largest_empty_radius = 0.0;
  // Size of the largest face-connected cluster of empty cells.
  std::int64_t largest_empty_cluster = 0;
  bool partial = false;
};

// Points binned into a cells^n grid over [-box, box]^n.
class CoverageGrid {
 public:
  CoverageGrid(int dimension, int cells_per_axis, double box_halfwidth)
      : dim_(dimension), cells_(cells_per_axis), box_(box_halfwidth) {
    if (dimension < 1) throw_input("coverage grid: dimension must be >= 1");
    if (cells_per_axis < 1) throw_input("coverage grid: cells per axis must be >= 1");
    if (!(box_halfwidth > 0.0)) throw_input("coverage grid: box half-width must be > 0");
    double total = 1.0;
    for (int i = 0; i < dimension; ++i) total *= cells_per_axis;
    if (total > double(kMaxGridCells)) {
      throw Error(ErrorKind::Budget, "coverage grid: " + std::to_string(total) +
                                         " cells exceeds the grid budget");
    }
    total_ = std::int64_t(total);
    counts_.assign(std::size_t(total_), 0);
  }

  int dimension() const { return dim_; }
  std::int64_t total_cells() const { return total_; }

  bool in_box(const RealVector& x) const {
    for (int i = 0; i < dim_; ++i) {
      if (!(std::abs(x(i)) <= box_)) return false;
    }
    return true;
  }

  std::int64_t cell_of(const RealVector& x) const {
    std::int64_t index = 0;
    for (int i = dim_ - 1; i >= 0; --i) {
      int c = int(std::floor((x(i) + box_) / (2.0 * box_) * cells_));
      c = std::clamp(c, 0, cells_ - 1);
      index = index * cells_ + c;
    }
    return index;
  }

  // Returns false for points outside the box.
  bool add(const RealVector& x) {
    if (!in_box(x)) return false;
    ++counts_[std::size_t(cell_of(x))];
    ++points_;
    return true;
  }

  void merge(const CoverageGrid& other) {
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
    points_ += other.points_;
  }

  CoverageStats stats() const {
    CoverageStats s;
    s.dimension = dim_;
    s.cells_per_axis = cells_;
    s.box_halfwidth = box_;
    s.total_cells = total_;
    s.points = points_;
    for (auto c : counts_) {
      if (c > 0) ++s.cells_hit;
      ++s.histogram[c];
    }
    s.coverage = double(s.cells_hit) / double(total_);
    const double cell_width = 2.0 * box_ / cells_;
    if (s.cells_hit == 0) {
      s.largest_empty_radius = box_;
      s.largest_empty_cluster = total_;
      return s;
    }
    s.largest_empty_radius = double(chebyshev_distance_max()) * cell_width;
    s.largest_empty_cluster = largest_empty_component();
    return s;
  }

 private:
  std::vector<int> coords(std::int64_t index) const {
    std::vector<int> c(dim_);
    for (int i = 0; i < dim_; ++i) {
      c[i] = int(index % cells_);
      index /= cells_;
    }
    return c;
  }

  std::int64_t encode(const std::vector<int>& c) const {
    std::int64_t index = 0;
    for (int i = dim_ - 1; i >= 0; --i) index = index * cells_ + c[i];
    return index;
  }

  // Multi-source BFS over the 3^n - 1 neighbourhood from every hit cell.
  std::int64_t chebyshev_distance_max() const {
    std::vector<int> dist(counts_.size(), -1);
    std::deque<std::int64_t> queue;
    for (std::size_t i = 0; i < counts_.size(); ++i) {
      if (counts_[i] > 0) {
        dist[i] = 0;
        queue.push_back(std::int64_t(i));
      }
    }
    std::vector<std::vector<int>> offsets;
    std::vector<int> off(dim_, -1);
    while (true) {
      if (std::any_of(off.begin(), off.end(), [](int v) { return v != 0; })) offsets.push_back(off);
      int i = 0;
      while (i < dim_ && off[i] == 1) off[i++] = -1;
      if (i == dim_) break;
      ++off[i];
    }
    int best = 0;
    while (!queue.empty()) {
      const auto cur = queue.front();
      queue.pop_front();
      const auto c = coords(cur);
      for (const auto& o : offsets) {
        std::vector<int> nb(dim_);
        bool inside = true;
        for (int i = 0; i < dim_; ++i) {
          nb[i] = c[i] + o[i];
          if (nb[i] < 0 || nb[i] >= cells_) inside = false;
        }
        if (!inside) continue;
        const auto idx = encode(nb);
        if (dist[std::size_t(idx)] >= 0) continue;
        dist[std::size_t(idx)] = dist[std::size_t(cur)] + 1;
        best = std::max(best, dist[std::size_t(idx)]);
        queue.push_back(idx);
      }
    }
    return best;
  }

  std::int64_t largest_empty_component() const {
    std::vector<char> seen(counts_.size(), 0);
    std::int64_t best = 0;
    for (std::size_t start = 0; start < counts_.size(); ++start) {
      if (counts_[start] > 0 || seen[start]) continue;
      std::int64_t size = 0;
      std::deque<std::int64_t> queue{std::int64_t(start)};
      seen[start] = 1;
      while (!queue.empty()) {
        const auto cur = queue.front();
        queue.pop_front();
        ++size;
        auto c = coords(cur);
        for (int i = 0; i < dim_; ++i) {
          for (int step : {-1, 1}) {
            c[i] += step;
            if (c[i] >= 0 && c[i] < cells_) {
              const auto idx = std::size_t(encode(c));
              if (!seen[idx] && counts_[idx] == 0) {
                seen[idx] = 1;
                queue.push_back(std::int64_t(idx));
              }
            }
            c[i] -= step;
          }
        }
      }
      best = std::max(best, size);
    }
    return best;
  }

  int dim_;
  int cells_;
  double box_;
  std::int64_t total_ = 0;
  std::int64_t points_ = 0;
  std::vector<std::int64_t> counts_;
};

// Worker count: HYPERORBIT_THREADS when set, else hardware concurrency.
inline int worker_count() {
  int workers = int(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("HYPERORBIT_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) workers = workers > 0 ? std::min(workers, cap) : cap;
  }
  return std::max(workers, 1);
}

}  // namespace hyperorbit
