#pragma once

// Small dense vectors/matrices/tensors for d-dimensional SDE state (d is tiny,
// typically 1..3). Row-major flat storage; no expression templates, in-place
// helpers for the hot stepping loops.

#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <vector>

namespace sdeflow {

class Vec {
 public:
  Vec() = default;
  explicit Vec(std::size_t n, double value = 0.0) : v_(n, value) {}
  Vec(std::initializer_list<double> init) : v_(init) {}

  std::size_t size() const { return v_.size(); }
  double& operator[](std::size_t i) { return v_[i]; }
  double operator[](std::size_t i) const { return v_[i]; }
  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  auto begin() const { return v_.begin(); }
  auto end() const { return v_.end(); }

  Vec& operator+=(const Vec& o) {
    assert(size() == o.size());
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
    return *this;
  }
  Vec& operator-=(const Vec& o) {
    assert(size() == o.size());
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
    return *this;
  }
  Vec& operator*=(double a) {
    for (double& x : v_) x *= a;
    return *this;
  }
  void fill(double a) {
    for (double& x : v_) x = a;
  }

  friend Vec operator+(Vec a, const Vec& b) { return a += b; }
  friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
  friend Vec operator*(double a, Vec x) { return x *= a; }
  friend Vec operator-(Vec a) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = -a[i];
    return a;
  }
  friend bool operator==(const Vec& a, const Vec& b) { return a.v_ == b.v_; }

 private:
  std::vector<double> v_;
};

inline double dot(const Vec& a, const Vec& b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

// y += alpha * x
inline void axpy(double alpha, const Vec& x, Vec& y) {
  assert(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline bool all_finite(const Vec& a) {
  for (double x : a)
    if (!std::isfinite(x)) return false;
  return true;
}

class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double value = 0.0)
      : rows_(rows), cols_(cols), v_(rows * cols, value) {}

  static Mat identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t i, std::size_t j) { return v_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return v_[i * cols_ + j]; }

  Mat& operator+=(const Mat& o) {
    assert(rows_ == o.rows_ && cols_ == o.cols_);
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
    return *this;
  }
  Mat& operator-=(const Mat& o) {
    assert(rows_ == o.rows_ && cols_ == o.cols_);
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
    return *this;
  }
  Mat& operator*=(double a) {
    for (double& x : v_) x *= a;
    return *this;
  }
  void fill(double a) {
    for (double& x : v_) x = a;
  }

  friend Mat operator+(Mat a, const Mat& b) { return a += b; }
  friend Mat operator-(Mat a, const Mat& b) { return a -= b; }
  friend Mat operator*(double a, Mat m) { return m *= a; }

  Vec mul(const Vec& x) const {
    assert(cols_ == x.size());
    Vec y(rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < cols_; ++j) s += (*this)(i, j) * x[j];
      y[i] = s;
    }
    return y;
  }

  // y += M x
  void mul_acc(const Vec& x, Vec& y) const {
    assert(cols_ == x.size() && rows_ == y.size());
    for (std::size_t i = 0; i < rows_; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < cols_; ++j) s += (*this)(i, j) * x[j];
      y[i] += s;
    }
  }

  double frobenius() const {
    double s = 0.0;
    for (double x : v_) s += x * x;
    return std::sqrt(s);
  }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> v_;
};

// sigma * sigma^T for a square matrix.
inline Mat aat(const Mat& a) {
  Mat m(a.rows(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.rows(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * a(j, k);
      m(i, j) = s;
    }
  return m;
}

// Rank-3 array, entries (i, j, k); stores d sigma_ij / d x_k.
class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(std::size_t d, double value = 0.0) : d_(d), v_(d * d * d, value) {}
  std::size_t dim() const { return d_; }
  double& operator()(std::size_t i, std::size_t j, std::size_t k) {
    return v_[(i * d_ + j) * d_ + k];
  }
  double operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return v_[(i * d_ + j) * d_ + k];
  }

 private:
  std::size_t d_ = 0;
  std::vector<double> v_;
};

// Rank-4 array, entries (i, j, k, l); stores d^2 sigma_ij / d x_k d x_l.
class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(std::size_t d, double value = 0.0) : d_(d), v_(d * d * d * d, value) {}
  std::size_t dim() const { return d_; }
  double& operator()(std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
    return v_[((i * d_ + j) * d_ + k) * d_ + l];
  }
  double operator()(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
    return v_[((i * d_ + j) * d_ + k) * d_ + l];
  }

 private:
  std::size_t d_ = 0;
  std::vector<double> v_;
};

}  // namespace sdeflow
