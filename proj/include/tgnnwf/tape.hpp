#pragma once

#include <functional>
#include <span>
#include <vector>

#include "tgnnwf/array.hpp"

namespace tgnnwf {

// Value produced by tape operations. node == -1 means the value is a plain
// constant: it can be fed into further operations but no derivative flows
// through it.
struct DiffValue {
  Array value;
  int node = -1;

  DiffValue() = default;
  DiffValue(Array v) : value(std::move(v)) {}  // NOLINT: implicit constant lift
  DiffValue(Array v, int n) : value(std::move(v)), node(n) {}
  static DiffValue constant(double v) { return DiffValue(Array::scalar(v)); }
};

// Primitive operations accepted by Tape::record.
enum class PrimOp { Add, Sub, Mul, Div, MatMul, Pow, Exp, Ln, Tanh, Softplus, Sum, Mean, Square };

// Append-only record of operations over dense arrays supporting reverse-mode
// differentiation. grad() runs a plain reverse sweep; grad_recorded() emits
// the sweep itself as tape operations, so its results stay differentiable
// (that is how second-order input derivatives are obtained). A tape is meant
// to live for one training step and is single-threaded; independent tapes can
// run concurrently.
class Tape {
public:
  enum class Op : unsigned char {
    Const, Add, Sub, Mul, Div, MatMul, Pow, Exp, Ln, Tanh, Softplus, Sigmoid,
    Square, Neg, Sum, Mean, RowSum, ColSum, Transpose, Reshape, SelectCol
  };

  struct Node {
    Op op;
    int a = -1;
    int b = -1;
    double c = 0.0;  // pow exponent
    int aux = 0;     // selected column for SelectCol
    Array value;
  };

  // Leaf whose adjoint can be queried (network parameters, inputs).
  DiffValue leaf(Array v);

  // Generic entry point restricted to the public primitive set.
  DiffValue record(PrimOp op, std::span<const DiffValue> inputs);

  DiffValue add(const DiffValue& a, const DiffValue& b);
  DiffValue sub(const DiffValue& a, const DiffValue& b);
  DiffValue mul(const DiffValue& a, const DiffValue& b);
  DiffValue div(const DiffValue& a, const DiffValue& b);
  DiffValue matmul(const DiffValue& a, const DiffValue& b);
  DiffValue pow(const DiffValue& a, double c);
  DiffValue exp(const DiffValue& a);
  DiffValue ln(const DiffValue& a);
  DiffValue tanh(const DiffValue& a);
  DiffValue softplus(const DiffValue& a);
  DiffValue sigmoid(const DiffValue& a);
  DiffValue square(const DiffValue& a);
  DiffValue neg(const DiffValue& a);
  DiffValue sum(const DiffValue& a);
  DiffValue mean(const DiffValue& a);
  DiffValue rowsum(const DiffValue& a);
  DiffValue colsum(const DiffValue& a);
  DiffValue transpose(const DiffValue& a);
  DiffValue reshape(const DiffValue& a, int rows, int cols);
  DiffValue select_col(const DiffValue& a, int j);
  DiffValue scale(const DiffValue& a, double c) { return mul(a, DiffValue::constant(c)); }
  DiffValue add_const(const DiffValue& a, double c) { return add(a, DiffValue::constant(c)); }

  // d(output)/d(wrt_i) for a scalar output. Entries outside the output's
  // ancestry come back as zero arrays of the matching shape.
  std::vector<Array> grad(const DiffValue& output, std::span<const DiffValue> wrt);

  // Same sweep, but adjoint arithmetic is recorded on the tape; results can
  // be differentiated again.
  std::vector<DiffValue> grad_recorded(const DiffValue& output, std::span<const DiffValue> wrt);

  std::size_t node_count() const { return nodes_.size(); }
  const Array& value_of(int node) const { return nodes_[node].value; }

  // Recompute a node's forward value from the leaves; used to check that the
  // record reproduces forward evaluation exactly.
  Array replay(int node) const;

  void clear() { nodes_.clear(); }

private:
  int push(Node n);
  int intern(const DiffValue& v);
  template <class Policy>
  std::vector<typename Policy::V> backward(const DiffValue& output, std::span<const DiffValue> wrt);

  std::vector<Node> nodes_;
};

// ∂f/∂x_dim (order 1) or ∂²f/∂x_dim² (order 2) of a scalar-valued function of
// a coordinate row vector, evaluated at `point`. The result stays attached to
// the tape, so gradients of it (e.g. with respect to parameters consumed
// inside f) remain available.
DiffValue input_derivative(Tape& tape,
                           const std::function<DiffValue(Tape&, const DiffValue&)>& f,
                           const Array& point, int dim, int order);

}  // namespace tgnnwf
