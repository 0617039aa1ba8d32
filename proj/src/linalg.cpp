#include "hdb/linalg.hpp"

#include <stdexcept>

namespace hdb {

std::vector<int> row_reduce(Mat& m) {
  std::vector<int> pivots;
  int r = 0;
  for (int c = 0; c < m.cols && r < m.rows; ++c) {
    int p = -1;
    for (int i = r; i < m.rows; ++i)
      if (m.at(i, c) != 0) {
        p = i;
        break;
      }
    if (p < 0) continue;
    if (p != r)
      for (int j = 0; j < m.cols; ++j) std::swap(m.at(p, j), m.at(r, j));
    Rat inv = Rat(1) / m.at(r, c);
    for (int j = c; j < m.cols; ++j) m.at(r, j) *= inv;
    for (int i = 0; i < m.rows; ++i) {
      if (i == r || m.at(i, c) == 0) continue;
      Rat f = m.at(i, c);
      for (int j = c; j < m.cols; ++j) m.at(i, j) -= f * m.at(r, j);
    }
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

int rank(Mat m) { return static_cast<int>(row_reduce(m).size()); }

std::vector<std::vector<Rat>> kernel_basis(const Mat& m) {
  Mat e = m;
  std::vector<int> pivots = row_reduce(e);
  std::vector<bool> is_pivot(static_cast<size_t>(m.cols), false);
  for (int c : pivots) is_pivot[static_cast<size_t>(c)] = true;
  std::vector<std::vector<Rat>> basis;
  for (int free = 0; free < m.cols; ++free) {
    if (is_pivot[static_cast<size_t>(free)]) continue;
    std::vector<Rat> v(static_cast<size_t>(m.cols), Rat(0));
    v[static_cast<size_t>(free)] = 1;
    for (size_t pr = 0; pr < pivots.size(); ++pr)
      v[static_cast<size_t>(pivots[pr])] = -e.at(static_cast<int>(pr), free);
    basis.push_back(std::move(v));
  }
  return basis;
}

std::optional<std::vector<Rat>> solve(const Mat& m, const std::vector<Rat>& b) {
  if (static_cast<int>(b.size()) != m.rows) throw std::invalid_argument("solve: size mismatch");
  Mat aug(m.rows, m.cols + 1);
  for (int i = 0; i < m.rows; ++i) {
    for (int j = 0; j < m.cols; ++j) aug.at(i, j) = m.at(i, j);
    aug.at(i, m.cols) = b[static_cast<size_t>(i)];
  }
  std::vector<int> pivots = row_reduce(aug);
  if (!pivots.empty() && pivots.back() == m.cols) return std::nullopt;  // inconsistent
  std::vector<Rat> x(static_cast<size_t>(m.cols), Rat(0));
  for (size_t pr = 0; pr < pivots.size(); ++pr)
    x[static_cast<size_t>(pivots[pr])] = aug.at(static_cast<int>(pr), m.cols);
  return x;
}

bool in_span(const Mat& m, const std::vector<Rat>& v) { return solve(m, v).has_value(); }

std::optional<Mat> inverse(const Mat& m) {
  if (m.rows != m.cols) throw std::invalid_argument("inverse: not square");
  int n = m.rows;
  Mat aug(n, 2 * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) aug.at(i, j) = m.at(i, j);
    aug.at(i, n + i) = 1;
  }
  std::vector<int> pivots = row_reduce(aug);
  if (static_cast<int>(pivots.size()) != n || pivots.back() != n - 1) return std::nullopt;
  Mat inv(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) inv.at(i, j) = aug.at(i, n + j);
  return inv;
}

Mat columns_matrix(const std::vector<std::vector<Rat>>& cols, int len) {
  Mat m(len, static_cast<int>(cols.size()));
  for (size_t j = 0; j < cols.size(); ++j) {
    if (static_cast<int>(cols[j].size()) != len)
      throw std::invalid_argument("columns_matrix: ragged column");
    for (int i = 0; i < len; ++i) m.at(i, static_cast<int>(j)) = cols[j][static_cast<size_t>(i)];
  }
  return m;
}

}  // namespace hdb
