#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "windgrid/errors.hpp"

namespace windgrid {

// Tape-based reverse-mode engine over 2-D tensors (rows x cols). Small fixed
// operator set: enough for dense, LSTM/BiLSTM, 1-D convolution and the GAN
// losses, nothing more.
class Graph {
 public:
  using NodeId = int;

  NodeId input(const Eigen::MatrixXd& value);

  NodeId matmul(NodeId a, NodeId b);
  // Elementwise addition; b may also be a 1 x cols bias broadcast over rows.
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);  // elementwise, equal shapes
  // alpha * a + beta, elementwise.
  NodeId affine(NodeId a, double alpha, double beta);

  NodeId sigmoid(NodeId a);
  NodeId tanh(NodeId a);
  NodeId relu(NodeId a);
  NodeId log(NodeId a);
  NodeId square(NodeId a);

  NodeId transpose(NodeId a);
  // Clamp values to [lo, hi]; gradient passes through strictly inside the
  // interval and is zero on the clamped set.
  NodeId clamp(NodeId a, double lo, double hi);

  NodeId row(NodeId a, int r);            // 1 x cols view of one row
  NodeId concat_cols(NodeId a, NodeId b);
  NodeId stack_rows(const std::vector<NodeId>& rows);
  NodeId mean_all(NodeId a);              // 1 x 1

  // 1-D convolution over rows (time) with zero "same" padding. Input is
  // T x C_in; weight is (kernel * C_in) x C_out; bias is 1 x C_out. Output is
  // ceil(T / stride) x C_out.
  NodeId conv1d(NodeId x, NodeId weight, NodeId bias, int kernel, int stride);

  const Eigen::MatrixXd& value(NodeId id) const { return nodes_[id].v; }
  const Eigen::MatrixXd& gradient(NodeId id) const { return nodes_[id].g; }

  // Reverse pass from a scalar node.
  void backward(NodeId loss);

 private:
  struct Node {
    Eigen::MatrixXd v;
    Eigen::MatrixXd g;
    std::function<void()> back;  // empty for leaves
  };

  NodeId emplace(Eigen::MatrixXd v);
  void check_finite(NodeId id) const;

  std::vector<Node> nodes_;
};

}  // namespace windgrid
