#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <vector>

#include "mudas/errors.hpp"

namespace mudas {

/// Dense row-major matrix. Plain value type; the library keeps all batch
/// data (embeddings, probabilities, gradients) in this shape.
template <typename T>
class Matrix {
 public:
  Matrix() = default;

  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix from_rows(std::initializer_list<std::initializer_list<T>> rows) {
    Matrix m;
    m.rows_ = rows.size();
    m.cols_ = rows.size() ? rows.begin()->size() : 0;
    m.data_.reserve(m.rows_ * m.cols_);
    for (const auto& r : rows) {
      if (r.size() != m.cols_) throw ShapeError("Matrix::from_rows: ragged rows");
      m.data_.insert(m.data_.end(), r.begin(), r.end());
    }
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  T* row(std::size_t r) { return data_.data() + r * cols_; }
  const T* row(std::size_t r) const { return data_.data() + r * cols_; }

  std::vector<T>& values() { return data_; }
  const std::vector<T>& values() const { return data_; }

  void fill(T v) { data_.assign(data_.size(), v); }

  bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using MatD = Matrix<double>;
using MatF = Matrix<float>;

/// Binary label matrix: rows are samples, columns are classes.
using LabelMatrix = Matrix<std::uint8_t>;

inline MatD to_double(const MatF& m) {
  MatD out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.size(); ++i) out.values()[i] = static_cast<double>(m.values()[i]);
  return out;
}

inline MatF to_float(const MatD& m) {
  MatF out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.size(); ++i) out.values()[i] = static_cast<float>(m.values()[i]);
  return out;
}

/// Copy of rows [begin, end) of m.
template <typename T>
Matrix<T> slice_rows(const Matrix<T>& m, std::size_t begin, std::size_t end) {
  if (begin > end || end > m.rows()) throw ShapeError("slice_rows: range out of bounds");
  Matrix<T> out(end - begin, m.cols());
  for (std::size_t r = begin; r < end; ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out(r - begin, c) = m(r, c);
  return out;
}

/// Stack matrices on top of each other. Empty inputs are skipped; all
/// non-empty inputs must share a column count.
template <typename T>
Matrix<T> concat_rows(std::initializer_list<const Matrix<T>*> parts) {
  std::size_t rows = 0, cols = 0;
  for (const auto* p : parts) {
    if (p->rows() == 0) continue;
    if (cols == 0) cols = p->cols();
    if (p->cols() != cols) throw ShapeError("concat_rows: column mismatch");
    rows += p->rows();
  }
  Matrix<T> out(rows, cols);
  std::size_t at = 0;
  for (const auto* p : parts)
    for (std::size_t r = 0; r < p->rows(); ++r, ++at)
      for (std::size_t c = 0; c < cols; ++c) out(at, c) = (*p)(r, c);
  return out;
}

}  // namespace mudas
