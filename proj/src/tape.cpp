#include "tgnnwf/tape.hpp"

#include <stdexcept>

namespace tgnnwf {

int Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

int Tape::intern(const DiffValue& v) {
  if (v.node >= 0) {
    if (static_cast<std::size_t>(v.node) >= nodes_.size())
      throw std::invalid_argument("Tape: DiffValue from another tape");
    return v.node;
  }
  return push({Op::Const, -1, -1, 0.0, 0, v.value});
}

DiffValue Tape::leaf(Array v) {
  const int id = push({Op::Const, -1, -1, 0.0, 0, v});
  return DiffValue(std::move(v), id);
}

namespace {

void check_matmul_shapes(const Array& a, const Array& b) {
  if (a.cols() != b.rows())
    throw std::invalid_argument("matmul: inner dims mismatch " + a.shape_str() + " @ " + b.shape_str());
}

}  // namespace

DiffValue Tape::add(const DiffValue& a, const DiffValue& b) {
  Array v = ew_add(a.value, b.value);
  const int ia = intern(a), ib = intern(b);
  return DiffValue(v, push({Op::Add, ia, ib, 0.0, 0, v}));
}

DiffValue Tape::sub(const DiffValue& a, const DiffValue& b) {
  Array v = ew_sub(a.value, b.value);
  const int ia = intern(a), ib = intern(b);
  return DiffValue(v, push({Op::Sub, ia, ib, 0.0, 0, v}));
}

DiffValue Tape::mul(const DiffValue& a, const DiffValue& b) {
  Array v = ew_mul(a.value, b.value);
  const int ia = intern(a), ib = intern(b);
  return DiffValue(v, push({Op::Mul, ia, ib, 0.0, 0, v}));
}

DiffValue Tape::div(const DiffValue& a, const DiffValue& b) {
  Array v = ew_div(a.value, b.value);
  const int ia = intern(a), ib = intern(b);
  return DiffValue(v, push({Op::Div, ia, ib, 0.0, 0, v}));
}

DiffValue Tape::matmul(const DiffValue& a, const DiffValue& b) {
  check_matmul_shapes(a.value, b.value);
  Array v = tgnnwf::matmul(a.value, b.value);
  const int ia = intern(a), ib = intern(b);
  return DiffValue(v, push({Op::MatMul, ia, ib, 0.0, 0, v}));
}

DiffValue Tape::pow(const DiffValue& a, double c) {
  Array v = ew_pow(a.value, c);
  const int ia = intern(a);
  return DiffValue(v, push({Op::Pow, ia, -1, c, 0, v}));
}

#define TGNNWF_UNARY(NAME, OP, KERNEL)                      \
  DiffValue Tape::NAME(const DiffValue& a) {                \
    Array v = KERNEL(a.value);                              \
    const int ia = intern(a);                               \
    return DiffValue(v, push({Op::OP, ia, -1, 0.0, 0, v})); \
  }

TGNNWF_UNARY(exp, Exp, ew_exp)
TGNNWF_UNARY(ln, Ln, ew_ln)
TGNNWF_UNARY(tanh, Tanh, ew_tanh)
TGNNWF_UNARY(softplus, Softplus, ew_softplus)
TGNNWF_UNARY(sigmoid, Sigmoid, ew_sigmoid)
TGNNWF_UNARY(square, Square, ew_square)
TGNNWF_UNARY(neg, Neg, ew_neg)
TGNNWF_UNARY(sum, Sum, reduce_sum)
TGNNWF_UNARY(mean, Mean, reduce_mean)
TGNNWF_UNARY(rowsum, RowSum, row_sum)
TGNNWF_UNARY(colsum, ColSum, col_sum)
TGNNWF_UNARY(transpose, Transpose, tgnnwf::transpose)
#undef TGNNWF_UNARY

DiffValue Tape::reshape(const DiffValue& a, int rows, int cols) {
  Array v = a.value.reshaped(rows, cols);
  const int ia = intern(a);
  return DiffValue(v, push({Op::Reshape, ia, -1, 0.0, 0, v}));
}

DiffValue Tape::select_col(const DiffValue& a, int j) {
  Array v = tgnnwf::select_col(a.value, j);
  const int ia = intern(a);
  return DiffValue(v, push({Op::SelectCol, ia, -1, 0.0, j, v}));
}

DiffValue Tape::record(PrimOp op, std::span<const DiffValue> in) {
  auto need = [&](std::size_t n) {
    if (in.size() != n) throw std::invalid_argument("record: wrong operand count");
  };
  switch (op) {
    case PrimOp::Add: need(2); return add(in[0], in[1]);
    case PrimOp::Sub: need(2); return sub(in[0], in[1]);
    case PrimOp::Mul: need(2); return mul(in[0], in[1]);
    case PrimOp::Div: need(2); return div(in[0], in[1]);
    case PrimOp::MatMul: need(2); return matmul(in[0], in[1]);
    case PrimOp::Pow: need(2); return pow(in[0], in[1].value.item());
    case PrimOp::Exp: need(1); return exp(in[0]);
    case PrimOp::Ln: need(1); return ln(in[0]);
    case PrimOp::Tanh: need(1); return tanh(in[0]);
    case PrimOp::Softplus: need(1); return softplus(in[0]);
    case PrimOp::Sum: need(1); return sum(in[0]);
    case PrimOp::Mean: need(1); return mean(in[0]);
    case PrimOp::Square: need(1); return square(in[0]);
  }
  throw std::invalid_argument("record: unknown primitive");
}

namespace {

// Adjoint arithmetic over plain arrays.
struct PlainPolicy {
  using V = Array;
  Tape* t;
  V value(int node) const { return t->value_of(node); }
  V seed() const { return Array::scalar(1.0); }
  V add(const V& a, const V& b) const { return ew_add(a, b); }
  V sub_from(const V& a, const V& b) const { return ew_sub(a, b); }
  V mul(const V& a, const V& b) const { return ew_mul(a, b); }
  V div(const V& a, const V& b) const { return ew_div(a, b); }
  V neg(const V& a) const { return ew_neg(a); }
  V scale(const V& a, double c) const { return ew_scale(a, c); }
  V pow(const V& a, double c) const { return ew_pow(a, c); }
  V square(const V& a) const { return ew_square(a); }
  V sigmoid(const V& a) const { return ew_sigmoid(a); }
  V one_minus(const V& a) const { return ew_sub(Array::scalar(1.0), a); }
  V matmul_nt(const V& a, const V& b) const { return tgnnwf::matmul_nt(a, b); }
  V matmul_tn(const V& a, const V& b) const { return tgnnwf::matmul_tn(a, b); }
  V reduce_like(const V& g, int r, int c) const { return tgnnwf::reduce_like(g, r, c); }
  V broadcast(const V& g, int r, int c) const { return broadcast_to(g, r, c); }
  V reshape(const V& g, int r, int c) const { return g.reshaped(r, c); }
  V transpose(const V& g) const { return tgnnwf::transpose(g); }
  V scatter_col(const V& g, int j, int cols) const { return tgnnwf::scatter_col(g, j, cols); }
  V zeros_like(const Array& shape) const { return Array::zeros(shape.rows(), shape.cols()); }
};

// Adjoint arithmetic recorded back onto the tape.
struct RecordedPolicy {
  using V = DiffValue;
  Tape* t;
  V value(int node) const { return DiffValue(t->value_of(node), node); }
  V seed() const { return t->leaf(Array::scalar(1.0)); }
  V add(const V& a, const V& b) const { return t->add(a, b); }
  V sub_from(const V& a, const V& b) const { return t->sub(a, b); }
  V mul(const V& a, const V& b) const { return t->mul(a, b); }
  V div(const V& a, const V& b) const { return t->div(a, b); }
  V neg(const V& a) const { return t->neg(a); }
  V scale(const V& a, double c) const { return t->scale(a, c); }
  V pow(const V& a, double c) const { return t->pow(a, c); }
  V square(const V& a) const { return t->square(a); }
  V sigmoid(const V& a) const { return t->sigmoid(a); }
  V one_minus(const V& a) const { return t->sub(DiffValue::constant(1.0), a); }
  V matmul_nt(const V& a, const V& b) const { return t->matmul(a, t->transpose(b)); }
  V matmul_tn(const V& a, const V& b) const { return t->matmul(t->transpose(a), b); }
  V reduce_like(const V& g, int r, int c) const {
    if (g.value.rows() == r && g.value.cols() == c) return g;
    if (r == 1 && c == 1) return t->sum(g);
    if (r == 1) return t->colsum(g);
    return t->rowsum(g);
  }
  V broadcast(const V& g, int r, int c) const {
    if (g.value.rows() == r && g.value.cols() == c) return g;
    return t->mul(g, DiffValue(Array::full(r, c, 1.0)));
  }
  V reshape(const V& g, int r, int c) const { return t->reshape(g, r, c); }
  V transpose(const V& g) const { return t->transpose(g); }
  V scatter_col(const V& g, int j, int cols) const {
    Array onehot = Array::zeros(1, cols);
    onehot.mut()[j] = 1.0;
    return t->matmul(g, DiffValue(onehot));
  }
  V zeros_like(const Array& shape) const {
    return DiffValue(Array::zeros(shape.rows(), shape.cols()));
  }
};

}  // namespace

template <class Policy>
std::vector<typename Policy::V> Tape::backward(const DiffValue& output,
                                               std::span<const DiffValue> wrt) {
  using V = typename Policy::V;
  if (!output.value.is_scalar())
    throw std::invalid_argument("grad: output must be scalar, got " + output.value.shape_str());
  if (output.node < 0) {
    // Constant output: zero derivative with respect to everything.
    std::vector<V> zeros;
    Policy pz{this};
    for (const DiffValue& w : wrt) zeros.push_back(pz.zeros_like(w.value));
    return zeros;
  }
  for (const DiffValue& w : wrt)
    if (w.node < 0 || static_cast<std::size_t>(w.node) >= nodes_.size())
      throw std::invalid_argument("grad: wrt entry is not on the tape");

  Policy p{this};
  const int root = output.node;

  // Restrict the sweep to the output's ancestry.
  std::vector<char> marked(root + 1, 0);
  marked[root] = 1;
  for (int i = root; i >= 0; --i) {
    if (!marked[i]) continue;
    const Node& n = nodes_[i];
    if (n.a >= 0) marked[n.a] = 1;
    if (n.b >= 0) marked[n.b] = 1;
  }

  std::vector<V> adj(root + 1);
  std::vector<char> has(root + 1, 0);
  adj[root] = p.seed();
  has[root] = 1;

  auto accum = [&](int idx, V contrib) {
    if (has[idx]) {
      adj[idx] = p.add(adj[idx], contrib);
    } else {
      adj[idx] = std::move(contrib);
      has[idx] = 1;
    }
  };

  for (int i = root; i >= 0; --i) {
    if (!marked[i] || !has[i]) continue;
    const Node& n = nodes_[i];
    const V& g = adj[i];
    const auto shape_of = [&](int id) { return &nodes_[id].value; };
    switch (n.op) {
      case Op::Const:
        break;
      case Op::Add: {
        const Array* sa = shape_of(n.a);
        const Array* sb = shape_of(n.b);
        accum(n.a, p.reduce_like(g, sa->rows(), sa->cols()));
        accum(n.b, p.reduce_like(g, sb->rows(), sb->cols()));
        break;
      }
      case Op::Sub: {
        const Array* sa = shape_of(n.a);
        const Array* sb = shape_of(n.b);
        accum(n.a, p.reduce_like(g, sa->rows(), sa->cols()));
        accum(n.b, p.neg(p.reduce_like(g, sb->rows(), sb->cols())));
        break;
      }
      case Op::Mul: {
        const Array* sa = shape_of(n.a);
        const Array* sb = shape_of(n.b);
        accum(n.a, p.reduce_like(p.mul(g, p.value(n.b)), sa->rows(), sa->cols()));
        accum(n.b, p.reduce_like(p.mul(g, p.value(n.a)), sb->rows(), sb->cols()));
        break;
      }
      case Op::Div: {
        // y = a / b: da = g / b, db = -g * y / b
        const Array* sa = shape_of(n.a);
        const Array* sb = shape_of(n.b);
        accum(n.a, p.reduce_like(p.div(g, p.value(n.b)), sa->rows(), sa->cols()));
        V t = p.div(p.mul(g, p.value(i)), p.value(n.b));
        accum(n.b, p.neg(p.reduce_like(t, sb->rows(), sb->cols())));
        break;
      }
      case Op::MatMul:
        accum(n.a, p.matmul_nt(g, p.value(n.b)));
        accum(n.b, p.matmul_tn(p.value(n.a), g));
        break;
      case Op::Pow:
        accum(n.a, p.mul(g, p.scale(p.pow(p.value(n.a), n.c - 1.0), n.c)));
        break;
      case Op::Exp:
        accum(n.a, p.mul(g, p.value(i)));
        break;
      case Op::Ln:
        accum(n.a, p.div(g, p.value(n.a)));
        break;
      case Op::Tanh:
        accum(n.a, p.mul(g, p.one_minus(p.square(p.value(i)))));
        break;
      case Op::Softplus:
        accum(n.a, p.mul(g, p.sigmoid(p.value(n.a))));
        break;
      case Op::Sigmoid:
        accum(n.a, p.mul(g, p.mul(p.value(i), p.one_minus(p.value(i)))));
        break;
      case Op::Square:
        accum(n.a, p.mul(g, p.scale(p.value(n.a), 2.0)));
        break;
      case Op::Neg:
        accum(n.a, p.neg(g));
        break;
      case Op::Sum: {
        const Array* sa = shape_of(n.a);
        accum(n.a, p.broadcast(g, sa->rows(), sa->cols()));
        break;
      }
      case Op::Mean: {
        const Array* sa = shape_of(n.a);
        accum(n.a, p.broadcast(p.scale(g, 1.0 / static_cast<double>(sa->size())), sa->rows(), sa->cols()));
        break;
      }
      case Op::RowSum:
      case Op::ColSum: {
        const Array* sa = shape_of(n.a);
        accum(n.a, p.broadcast(g, sa->rows(), sa->cols()));
        break;
      }
      case Op::Transpose:
        accum(n.a, p.transpose(g));
        break;
      case Op::Reshape: {
        const Array* sa = shape_of(n.a);
        accum(n.a, p.reshape(g, sa->rows(), sa->cols()));
        break;
      }
      case Op::SelectCol: {
        const Array* sa = shape_of(n.a);
        accum(n.a, p.scatter_col(g, n.aux, sa->cols()));
        break;
      }
    }
  }

  std::vector<V> out;
  out.reserve(wrt.size());
  for (const DiffValue& w : wrt) {
    if (w.node <= root && has[w.node])
      out.push_back(adj[w.node]);
    else
      out.push_back(p.zeros_like(w.value));
  }
  return out;
}

std::vector<Array> Tape::grad(const DiffValue& output, std::span<const DiffValue> wrt) {
  return backward<PlainPolicy>(output, wrt);
}

std::vector<DiffValue> Tape::grad_recorded(const DiffValue& output, std::span<const DiffValue> wrt) {
  return backward<RecordedPolicy>(output, wrt);
}

Array Tape::replay(int node) const {
  if (node < 0 || static_cast<std::size_t>(node) >= nodes_.size())
    throw std::invalid_argument("replay: node out of range");
  std::vector<Array> vals(node + 1);
  for (int i = 0; i <= node; ++i) {
    const Node& n = nodes_[i];
    const auto A = [&] { return vals[n.a]; };
    const auto B = [&] { return vals[n.b]; };
    switch (n.op) {
      case Op::Const: vals[i] = n.value; break;
      case Op::Add: vals[i] = ew_add(A(), B()); break;
      case Op::Sub: vals[i] = ew_sub(A(), B()); break;
      case Op::Mul: vals[i] = ew_mul(A(), B()); break;
      case Op::Div: vals[i] = ew_div(A(), B()); break;
      case Op::MatMul: vals[i] = tgnnwf::matmul(A(), B()); break;
      case Op::Pow: vals[i] = ew_pow(A(), n.c); break;
      case Op::Exp: vals[i] = ew_exp(A()); break;
      case Op::Ln: vals[i] = ew_ln(A()); break;
      case Op::Tanh: vals[i] = ew_tanh(A()); break;
      case Op::Softplus: vals[i] = ew_softplus(A()); break;
      case Op::Sigmoid: vals[i] = ew_sigmoid(A()); break;
      case Op::Square: vals[i] = ew_square(A()); break;
      case Op::Neg: vals[i] = ew_neg(A()); break;
      case Op::Sum: vals[i] = reduce_sum(A()); break;
      case Op::Mean: vals[i] = reduce_mean(A()); break;
      case Op::RowSum: vals[i] = row_sum(A()); break;
      case Op::ColSum: vals[i] = col_sum(A()); break;
      case Op::Transpose: vals[i] = tgnnwf::transpose(A()); break;
      case Op::Reshape: vals[i] = A().reshaped(n.value.rows(), n.value.cols()); break;
      case Op::SelectCol: vals[i] = tgnnwf::select_col(A(), n.aux); break;
    }
  }
  return vals[node];
}

DiffValue input_derivative(Tape& tape,
                           const std::function<DiffValue(Tape&, const DiffValue&)>& f,
                           const Array& point, int dim, int order) {
  if (order != 1 && order != 2)
    throw std::invalid_argument("input_derivative: unsupported order " + std::to_string(order));
  if (point.rows() != 1) throw std::invalid_argument("input_derivative: point must be a row vector");
  if (dim < 0 || dim >= point.cols())
    throw std::invalid_argument("input_derivative: axis out of range");

  DiffValue x = tape.leaf(point);
  DiffValue y = f(tape, x);
  if (!y.value.is_scalar())
    throw std::invalid_argument("input_derivative: f must be scalar-valued");

  const DiffValue wrt[] = {x};
  DiffValue g1 = tape.grad_recorded(y, wrt)[0];
  DiffValue d1 = tape.select_col(g1, dim);
  if (order == 1) return d1;
  DiffValue g2 = tape.grad_recorded(d1, wrt)[0];
  return tape.select_col(g2, dim);
}

}  // namespace tgnnwf
