#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace tgnnwf {

// Dense row-major 2-D double array with shared (copy-on-write by convention)
// storage. Arrays are treated as immutable once built; builders fill the
// buffer through mut() before handing the array out. Copies are cheap.
class Array {
public:
  Array() = default;

  static Array zeros(int rows, int cols);
  static Array uninit(int rows, int cols);
  static Array full(int rows, int cols, double v);
  static Array scalar(double v) { return full(1, 1, v); }
  static Array from(int rows, int cols, std::vector<double> values);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return static_cast<std::size_t>(rows_) * cols_; }
  bool empty() const { return size() == 0; }
  bool is_scalar() const { return rows_ == 1 && cols_ == 1; }

  const double* data() const { return buf_.get(); }
  double* mut() { return buf_.get(); }

  double at(int r, int c) const { return buf_[static_cast<std::size_t>(r) * cols_ + c]; }
  double& at(int r, int c) { return buf_[static_cast<std::size_t>(r) * cols_ + c]; }
  double item() const;

  // Same buffer, new dims (rows*cols must match).
  Array reshaped(int rows, int cols) const;

  std::string shape_str() const;

private:
  int rows_ = 0;
  int cols_ = 0;
  std::shared_ptr<double[]> buf_;
};

void check_same_shape(const Array& a, const Array& b, const char* what);

// Elementwise kernels. Binary ops support broadcasting of a 1x1 scalar, a
// 1xm row against an nxm matrix, and an nx1 column against an nxm matrix.
Array ew_add(const Array& a, const Array& b);
Array ew_sub(const Array& a, const Array& b);
Array ew_mul(const Array& a, const Array& b);
Array ew_div(const Array& a, const Array& b);
Array ew_neg(const Array& a);
Array ew_exp(const Array& a);
Array ew_ln(const Array& a);
Array ew_tanh(const Array& a);
Array ew_softplus(const Array& a);
Array ew_sigmoid(const Array& a);
Array ew_square(const Array& a);
Array ew_pow(const Array& a, double c);
Array ew_scale(const Array& a, double c);

// y += alpha * x, in place; caller must own y's buffer exclusively.
void axpy_inplace(Array& y, double alpha, const Array& x);

Array reduce_sum(const Array& a);
Array reduce_mean(const Array& a);
Array row_sum(const Array& a);  // n x m -> n x 1
Array col_sum(const Array& a);  // n x m -> 1 x m
Array transpose(const Array& a);
Array select_col(const Array& a, int j);             // n x m -> n x 1
Array scatter_col(const Array& g, int j, int cols);  // n x 1 -> n x cols, col j = g

// Broadcast helpers used by backward rules.
Array broadcast_to(const Array& a, int rows, int cols);
Array reduce_like(const Array& g, int rows, int cols);  // sum g down to rows x cols

// Matrix products (deterministic for any thread count).
Array matmul(const Array& a, const Array& b);     // (n x k) @ (k x m)
Array matmul_nt(const Array& a, const Array& b);  // a @ b^T
Array matmul_tn(const Array& a, const Array& b);  // a^T @ b

double max_abs(const Array& a);
bool all_finite(const Array& a);

}  // namespace tgnnwf
