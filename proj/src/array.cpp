#include "tgnnwf/array.hpp"

#include <cmath>
#include <cstring>
#include <algorithm>

namespace tgnnwf {

namespace {

constexpr std::size_t kParallelCutoff = 1 << 15;

std::shared_ptr<double[]> alloc(std::size_t n) {
  return std::shared_ptr<double[]>(new double[n == 0 ? 1 : n]);
}

}  // namespace

Array Array::zeros(int rows, int cols) {
  Array a = uninit(rows, cols);
  std::memset(a.mut(), 0, a.size() * sizeof(double));
  return a;
}

Array Array::uninit(int rows, int cols) {
  if (rows < 0 || cols < 0) throw std::invalid_argument("Array: negative dims");
  Array a;
  a.rows_ = rows;
  a.cols_ = cols;
  a.buf_ = alloc(a.size());
  return a;
}

Array Array::full(int rows, int cols, double v) {
  Array a = uninit(rows, cols);
  std::fill(a.mut(), a.mut() + a.size(), v);
  return a;
}

Array Array::from(int rows, int cols, std::vector<double> values) {
  if (values.size() != static_cast<std::size_t>(rows) * cols)
    throw std::invalid_argument("Array::from: value count does not match dims");
  Array a = uninit(rows, cols);
  std::copy(values.begin(), values.end(), a.mut());
  return a;
}

double Array::item() const {
  if (!is_scalar()) throw std::invalid_argument("Array::item: not a 1x1 array, got " + shape_str());
  return buf_[0];
}

Array Array::reshaped(int rows, int cols) const {
  if (static_cast<std::size_t>(rows) * cols != size())
    throw std::invalid_argument("Array::reshaped: element count mismatch");
  Array a = *this;
  a.rows_ = rows;
  a.cols_ = cols;
  return a;
}

std::string Array::shape_str() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

void check_same_shape(const Array& a, const Array& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument(std::string(what) + ": shape mismatch " + a.shape_str() + " vs " +
                                b.shape_str());
}

namespace {

enum class Bcast { None, ScalarA, ScalarB, RowB, ColB, RowA, ColA };

Bcast classify(const Array& a, const Array& b, const char* what) {
  if (a.rows() == b.rows() && a.cols() == b.cols()) return Bcast::None;
  if (a.is_scalar()) return Bcast::ScalarA;
  if (b.is_scalar()) return Bcast::ScalarB;
  if (b.rows() == 1 && b.cols() == a.cols()) return Bcast::RowB;
  if (b.cols() == 1 && b.rows() == a.rows()) return Bcast::ColB;
  if (a.rows() == 1 && a.cols() == b.cols()) return Bcast::RowA;
  if (a.cols() == 1 && a.rows() == b.rows()) return Bcast::ColA;
  throw std::invalid_argument(std::string(what) + ": incompatible shapes " + a.shape_str() +
                              " vs " + b.shape_str());
}

template <class F>
Array binary_op(const Array& a, const Array& b, const char* what, F f) {
  const Bcast bc = classify(a, b, what);
  const Array& big = (bc == Bcast::ScalarA || bc == Bcast::RowA || bc == Bcast::ColA) ? b : a;
  Array out = Array::uninit(big.rows(), big.cols());
  const int n = big.rows(), m = big.cols();
  const double* pa = a.data();
  const double* pb = b.data();
  double* po = out.mut();
  const std::size_t total = out.size();

  auto idx_a = [&](int i, int j) -> double {
    switch (bc) {
      case Bcast::ScalarA: return pa[0];
      case Bcast::RowA: return pa[j];
      case Bcast::ColA: return pa[i];
      default: return pa[static_cast<std::size_t>(i) * m + j];
    }
  };
  auto idx_b = [&](int i, int j) -> double {
    switch (bc) {
      case Bcast::ScalarB: return pb[0];
      case Bcast::RowB: return pb[j];
      case Bcast::ColB: return pb[i];
      default: return pb[static_cast<std::size_t>(i) * m + j];
    }
  };

  if (bc == Bcast::None) {
#pragma omp parallel for schedule(static) if (total >= kParallelCutoff)
    for (long long k = 0; k < static_cast<long long>(total); ++k) po[k] = f(pa[k], pb[k]);
  } else {
#pragma omp parallel for schedule(static) if (total >= kParallelCutoff)
    for (long long i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j)
        po[static_cast<std::size_t>(i) * m + j] = f(idx_a(static_cast<int>(i), j), idx_b(static_cast<int>(i), j));
  }
  return out;
}

template <class F>
Array unary_op(const Array& a, F f) {
  Array out = Array::uninit(a.rows(), a.cols());
  const double* pa = a.data();
  double* po = out.mut();
  const std::size_t total = a.size();
#pragma omp parallel for schedule(static) if (total >= kParallelCutoff)
  for (long long k = 0; k < static_cast<long long>(total); ++k) po[k] = f(pa[k]);
  return out;
}

}  // namespace

Array ew_add(const Array& a, const Array& b) {
  return binary_op(a, b, "add", [](double x, double y) { return x + y; });
}
Array ew_sub(const Array& a, const Array& b) {
  return binary_op(a, b, "sub", [](double x, double y) { return x - y; });
}
Array ew_mul(const Array& a, const Array& b) {
  return binary_op(a, b, "mul", [](double x, double y) { return x * y; });
}
Array ew_div(const Array& a, const Array& b) {
  return binary_op(a, b, "div", [](double x, double y) { return x / y; });
}
Array ew_neg(const Array& a) {
  return unary_op(a, [](double x) { return -x; });
}
Array ew_exp(const Array& a) {
  return unary_op(a, [](double x) { return std::exp(x); });
}
Array ew_ln(const Array& a) {
  return unary_op(a, [](double x) { return std::log(x); });
}

// tanh through exp so the loop vectorizes; glibc's scalar tanh dominates
// training time otherwise.
Array ew_tanh(const Array& a) {
  return unary_op(a, [](double x) {
    const double u = std::exp(-2.0 * std::fabs(x));
    const double r = (1.0 - u) / (1.0 + u);
    return std::copysign(r, x);
  });
}

Array ew_softplus(const Array& a) {
  return unary_op(a, [](double x) {
    const double ax = std::fabs(x);
    return std::fmax(x, 0.0) + std::log(1.0 + std::exp(-ax));
  });
}

Array ew_sigmoid(const Array& a) {
  return unary_op(a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); });
}

Array ew_square(const Array& a) {
  return unary_op(a, [](double x) { return x * x; });
}

Array ew_pow(const Array& a, double c) {
  return unary_op(a, [c](double x) { return std::pow(x, c); });
}

Array ew_scale(const Array& a, double c) {
  return unary_op(a, [c](double x) { return c * x; });
}

void axpy_inplace(Array& y, double alpha, const Array& x) {
  check_same_shape(y, x, "axpy");
  double* py = y.mut();
  const double* px = x.data();
  const std::size_t total = y.size();
#pragma omp parallel for schedule(static) if (total >= kParallelCutoff)
  for (long long k = 0; k < static_cast<long long>(total); ++k) py[k] += alpha * px[k];
}

Array reduce_sum(const Array& a) {
  // Sequential fixed-order reduction keeps results reproducible.
  double s = 0.0;
  const double* p = a.data();
  for (std::size_t k = 0; k < a.size(); ++k) s += p[k];
  return Array::scalar(s);
}

Array reduce_mean(const Array& a) {
  if (a.empty()) throw std::invalid_argument("mean of empty array");
  return Array::scalar(reduce_sum(a).item() / static_cast<double>(a.size()));
}

Array row_sum(const Array& a) {
  Array out = Array::uninit(a.rows(), 1);
  const int m = a.cols();
#pragma omp parallel for schedule(static) if (a.size() >= kParallelCutoff)
  for (long long i = 0; i < a.rows(); ++i) {
    const double* pi = a.data() + static_cast<std::size_t>(i) * m;
    double s = 0.0;
    for (int j = 0; j < m; ++j) s += pi[j];
    out.mut()[i] = s;
  }
  return out;
}

Array col_sum(const Array& a) {
  Array out = Array::zeros(1, a.cols());
  double* po = out.mut();
  const int m = a.cols();
  for (int i = 0; i < a.rows(); ++i) {
    const double* pi = a.data() + static_cast<std::size_t>(i) * m;
    for (int j = 0; j < m; ++j) po[j] += pi[j];
  }
  return out;
}

Array transpose(const Array& a) {
  Array out = Array::uninit(a.cols(), a.rows());
  const int n = a.rows(), m = a.cols();
  double* po = out.mut();
  const double* pa = a.data();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) po[static_cast<std::size_t>(j) * n + i] = pa[static_cast<std::size_t>(i) * m + j];
  return out;
}

Array select_col(const Array& a, int j) {
  if (j < 0 || j >= a.cols()) throw std::invalid_argument("select_col: index out of range");
  Array out = Array::uninit(a.rows(), 1);
  for (int i = 0; i < a.rows(); ++i) out.mut()[i] = a.at(i, j);
  return out;
}

Array scatter_col(const Array& g, int j, int cols) {
  if (g.cols() != 1) throw std::invalid_argument("scatter_col: expected column vector");
  Array out = Array::zeros(g.rows(), cols);
  for (int i = 0; i < g.rows(); ++i) out.at(i, j) = g.data()[i];
  return out;
}

Array broadcast_to(const Array& a, int rows, int cols) {
  if (a.rows() == rows && a.cols() == cols) return a;
  Array out = Array::uninit(rows, cols);
  double* po = out.mut();
  const double* pa = a.data();
  if (a.is_scalar()) {
    std::fill(po, po + out.size(), pa[0]);
  } else if (a.rows() == 1 && a.cols() == cols) {
    for (int i = 0; i < rows; ++i) std::copy(pa, pa + cols, po + static_cast<std::size_t>(i) * cols);
  } else if (a.cols() == 1 && a.rows() == rows) {
    for (int i = 0; i < rows; ++i) std::fill(po + static_cast<std::size_t>(i) * cols, po + static_cast<std::size_t>(i + 1) * cols, pa[i]);
  } else {
    throw std::invalid_argument("broadcast_to: cannot broadcast " + a.shape_str());
  }
  return out;
}

Array reduce_like(const Array& g, int rows, int cols) {
  if (g.rows() == rows && g.cols() == cols) return g;
  if (rows == 1 && cols == 1) return reduce_sum(g);
  if (rows == 1 && cols == g.cols()) return col_sum(g);
  if (cols == 1 && rows == g.rows()) return row_sum(g);
  throw std::invalid_argument("reduce_like: cannot reduce " + g.shape_str());
}

Array matmul(const Array& a, const Array& b) {
  if (a.cols() != b.rows())
    throw std::invalid_argument("matmul: inner dims mismatch " + a.shape_str() + " @ " + b.shape_str());
  const int M = a.rows(), K = a.cols(), N = b.cols();
  Array out = Array::zeros(M, N);
  const double* pa = a.data();
  const double* pb = b.data();
  double* pc = out.mut();
#pragma omp parallel for schedule(static) if (static_cast<std::size_t>(M) * K * N >= kParallelCutoff)
  for (long long i = 0; i < M; ++i) {
    double* ci = pc + static_cast<std::size_t>(i) * N;
    const double* ai = pa + static_cast<std::size_t>(i) * K;
    for (int k = 0; k < K; ++k) {
      const double av = ai[k];
      const double* bk = pb + static_cast<std::size_t>(k) * N;
      for (int j = 0; j < N; ++j) ci[j] += av * bk[j];
    }
  }
  return out;
}

Array matmul_nt(const Array& a, const Array& b) {
  if (a.cols() != b.cols())
    throw std::invalid_argument("matmul_nt: dims mismatch " + a.shape_str() + " @ " + b.shape_str() + "^T");
  const int M = a.rows(), K = a.cols(), N = b.rows();
  Array out = Array::uninit(M, N);
  const double* pa = a.data();
  const double* pb = b.data();
  double* pc = out.mut();
#pragma omp parallel for schedule(static) if (static_cast<std::size_t>(M) * K * N >= kParallelCutoff)
  for (long long i = 0; i < M; ++i) {
    double* ci = pc + static_cast<std::size_t>(i) * N;
    const double* ai = pa + static_cast<std::size_t>(i) * K;
    for (int j = 0; j < N; ++j) {
      const double* bj = pb + static_cast<std::size_t>(j) * K;
      double s = 0.0;
      for (int k = 0; k < K; ++k) s += ai[k] * bj[k];
      ci[j] = s;
    }
  }
  return out;
}

// a^T @ b with a: M x K, b: M x N -> K x N. The reduction runs over fixed-size
// row blocks merged in block order, so the result does not depend on the
// number of threads.
Array matmul_tn(const Array& a, const Array& b) {
  if (a.rows() != b.rows())
    throw std::invalid_argument("matmul_tn: dims mismatch " + a.shape_str() + "^T @ " + b.shape_str());
  const int M = a.rows(), K = a.cols(), N = b.cols();
  constexpr int kBlock = 4096;
  const int nblocks = (M + kBlock - 1) / kBlock;
  std::vector<double> partial(static_cast<std::size_t>(nblocks) * K * N, 0.0);
  const double* pa = a.data();
  const double* pb = b.data();
#pragma omp parallel for schedule(static) if (static_cast<std::size_t>(M) * K * N >= kParallelCutoff)
  for (long long blk = 0; blk < nblocks; ++blk) {
    double* pp = partial.data() + static_cast<std::size_t>(blk) * K * N;
    const int lo = static_cast<int>(blk) * kBlock;
    const int hi = std::min(M, lo + kBlock);
    for (int m = lo; m < hi; ++m) {
      const double* am = pa + static_cast<std::size_t>(m) * K;
      const double* bm = pb + static_cast<std::size_t>(m) * N;
      for (int k = 0; k < K; ++k) {
        const double av = am[k];
        double* pk = pp + static_cast<std::size_t>(k) * N;
        for (int j = 0; j < N; ++j) pk[j] += av * bm[j];
      }
    }
  }
  Array out = Array::zeros(K, N);
  double* pc = out.mut();
  for (int blk = 0; blk < nblocks; ++blk) {
    const double* pp = partial.data() + static_cast<std::size_t>(blk) * K * N;
    for (std::size_t k = 0; k < static_cast<std::size_t>(K) * N; ++k) pc[k] += pp[k];
  }
  return out;
}

double max_abs(const Array& a) {
  double m = 0.0;
  const double* p = a.data();
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::fabs(p[k]));
  return m;
}

bool all_finite(const Array& a) {
  const double* p = a.data();
  for (std::size_t k = 0; k < a.size(); ++k)
    if (!std::isfinite(p[k])) return false;
  return true;
}

}  // namespace tgnnwf
