// Dense exact linear algebra over Q: rank, kernel, solve, span membership.
// Dimensions here are desk scale, so plain fraction Gaussian elimination
// is fine.
#pragma once

#include <optional>
#include <vector>

#include "hdb/rational.hpp"

namespace hdb {

struct Mat {
  int rows = 0, cols = 0;
  std::vector<Rat> a;  // row major

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * static_cast<size_t>(c), Rat(0)) {}
  Rat& at(int r, int c) { return a[static_cast<size_t>(r) * static_cast<size_t>(cols) + static_cast<size_t>(c)]; }
  const Rat& at(int r, int c) const {
    return a[static_cast<size_t>(r) * static_cast<size_t>(cols) + static_cast<size_t>(c)];
  }
};

// Row echelon form in place; returns pivot columns.
std::vector<int> row_reduce(Mat& m);

int rank(Mat m);

// Basis of the null space {x : m x = 0}, as column vectors.
std::vector<std::vector<Rat>> kernel_basis(const Mat& m);

// One solution of m x = b, if any.
std::optional<std::vector<Rat>> solve(const Mat& m, const std::vector<Rat>& b);

// Is v in the column span of m?
bool in_span(const Mat& m, const std::vector<Rat>& v);

// Matrix whose columns are the given vectors (all of length `len`).
Mat columns_matrix(const std::vector<std::vector<Rat>>& cols, int len);

// Inverse of a square matrix, if it exists.
std::optional<Mat> inverse(const Mat& m);

}  // namespace hdb
