#pragma once

#include <functional>
#include <vector>

#include "fusionlm/tensor.hpp"

namespace fusionlm {

struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Define-by-run reverse-mode tape. Each op records its output value and a
// closure that scatters the output gradient back to its inputs. backward()
// walks the nodes in exact reverse execution order; gradients of nodes the
// loss never touched stay exactly zero.
//
// A tape is single-threaded; the ops themselves may parallelize internally.
class Tape {
 public:
  Var input(Tensor value);

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);                       // same shape
  Var add_bias(Var x, Var bias);               // [m x n] + [n], broadcast over rows
  Var hadamard(Var a, Var b);                  // elementwise product
  Var sigmoid(Var x);                          // strictly inside (0, 1) for finite input
  Var tanh_act(Var x);
  Var concat_cols(const std::vector<Var>& parts);
  Var slice_cols(Var x, std::size_t start, std::size_t len);
  Var rows_lookup(Var table, std::vector<int> ids);    // embedding gather
  Var row_scale(Var x, Var s);                 // out[i,:] = s[i] * x[i,:], s is [m]
  Var row_dot(Var a, Var b);                   // [m x n], [m x n] -> [m]
  Var softmax_cross_entropy(Var logits, std::vector<int> targets);  // -> [m] NLL (nats)
  Var weighted_sum(Var x, std::vector<double> weights);             // [m] -> scalar
  Var add_scalars(const std::vector<Var>& xs);
  Var scale(Var x, double c);

  void backward(Var loss);

  const Tensor& value(Var v) const { return nodes_[check(v)].value; }
  const Tensor& grad(Var v) const { return nodes_[check(v)].grad; }
  std::size_t num_nodes() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::function<void(Tape&)> backward;
  };

  std::size_t check(Var v) const;
  Var push(Tensor value, std::function<void(Tape&)> backward);
  Tensor& grad_mut(Var v) { return nodes_[check(v)].grad; }

  std::vector<Node> nodes_;
};

}  // namespace fusionlm
