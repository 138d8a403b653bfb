#pragma once

#include <Eigen/Dense>

#include <random>
#include <vector>

// Structure-of-arrays sample blocks feeding the batch kernels: `rows`
// contiguous runs of `count` doubles, one run per coordinate.

namespace mvhvi {

struct Block {
  int rows = 0;
  long count = 0;
  std::vector<double> buf;

  Block() = default;
  Block(int rows_, long count_)
      : rows(rows_), count(count_),
        buf(static_cast<std::size_t>(rows_) * count_) {}

  double* row(int r) { return buf.data() + static_cast<long>(r) * count; }
  const double* row(int r) const {
    return buf.data() + static_cast<long>(r) * count;
  }
  double* data() { return buf.data(); }
  const double* data() const { return buf.data(); }

  void set_column(long s, const Eigen::VectorXd& v) {
    for (int r = 0; r < rows; ++r) row(r)[s] = v[r];
  }
  Eigen::VectorXd column(long s) const {
    Eigen::VectorXd v(rows);
    for (int r = 0; r < rows; ++r) v[r] = row(r)[s];
    return v;
  }
};

inline void fill_gaussian(Block& b, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> g(0.0, scale);
  for (double& x : b.buf) x = g(rng);
}

} // namespace mvhvi
