#include "windgrid/autodiff.hpp"

#include <cmath>

namespace windgrid {

Graph::NodeId Graph::emplace(Eigen::MatrixXd v) {
  Node node;
  node.v = std::move(v);
  node.g = Eigen::MatrixXd::Zero(node.v.rows(), node.v.cols());
  nodes_.push_back(std::move(node));
  const NodeId id = static_cast<NodeId>(nodes_.size()) - 1;
  check_finite(id);
  return id;
}

void Graph::check_finite(NodeId id) const {
  if (!nodes_[id].v.allFinite())
    throw NonFiniteValue("graph node " + std::to_string(id) +
                         " holds a non-finite value");
}

Graph::NodeId Graph::input(const Eigen::MatrixXd& value) {
  return emplace(value);
}

Graph::NodeId Graph::matmul(NodeId a, NodeId b) {
  const auto& va = nodes_[a].v;
  const auto& vb = nodes_[b].v;
  if (va.cols() != vb.rows())
    throw ShapeMismatch("matmul: inner dimensions differ");
  const NodeId id = emplace(va * vb);
  nodes_[id].back = [this, id, a, b]() {
    const auto& g = nodes_[id].g;
    nodes_[a].g.noalias() += g * nodes_[b].v.transpose();
    nodes_[b].g.noalias() += nodes_[a].v.transpose() * g;
  };
  return id;
}

Graph::NodeId Graph::add(NodeId a, NodeId b) {
  const auto& va = nodes_[a].v;
  const auto& vb = nodes_[b].v;
  NodeId id;
  if (va.rows() == vb.rows() && va.cols() == vb.cols()) {
    id = emplace(va + vb);
    nodes_[id].back = [this, id, a, b]() {
      nodes_[a].g += nodes_[id].g;
      nodes_[b].g += nodes_[id].g;
    };
  } else if (vb.rows() == 1 && va.cols() == vb.cols()) {
    id = emplace(va.rowwise() + vb.row(0));
    nodes_[id].back = [this, id, a, b]() {
      nodes_[a].g += nodes_[id].g;
      nodes_[b].g.row(0) += nodes_[id].g.colwise().sum();
    };
  } else {
    throw ShapeMismatch("add: shapes are neither equal nor bias-broadcastable");
  }
  return id;
}

Graph::NodeId Graph::sub(NodeId a, NodeId b) {
  const auto& va = nodes_[a].v;
  const auto& vb = nodes_[b].v;
  if (va.rows() != vb.rows() || va.cols() != vb.cols())
    throw ShapeMismatch("sub: shapes differ");
  const NodeId id = emplace(va - vb);
  nodes_[id].back = [this, id, a, b]() {
    nodes_[a].g += nodes_[id].g;
    nodes_[b].g -= nodes_[id].g;
  };
  return id;
}

Graph::NodeId Graph::mul(NodeId a, NodeId b) {
  const auto& va = nodes_[a].v;
  const auto& vb = nodes_[b].v;
  if (va.rows() != vb.rows() || va.cols() != vb.cols())
    throw ShapeMismatch("mul: shapes differ");
  const NodeId id = emplace(va.cwiseProduct(vb));
  nodes_[id].back = [this, id, a, b]() {
    nodes_[a].g += nodes_[id].g.cwiseProduct(nodes_[b].v);
    nodes_[b].g += nodes_[id].g.cwiseProduct(nodes_[a].v);
  };
  return id;
}

Graph::NodeId Graph::affine(NodeId a, double alpha, double beta) {
  const NodeId id = emplace((alpha * nodes_[a].v).array() + beta);
  nodes_[id].back = [this, id, a, alpha]() {
    nodes_[a].g += alpha * nodes_[id].g;
  };
  return id;
}

Graph::NodeId Graph::sigmoid(NodeId a) {
  Eigen::MatrixXd v = nodes_[a].v.unaryExpr(
      [](double x) { return 1.0 / (1.0 + std::exp(-x)); });
  const NodeId id = emplace(std::move(v));
  nodes_[id].back = [this, id, a]() {
    const auto& s = nodes_[id].v;
    nodes_[a].g.array() +=
        nodes_[id].g.array() * s.array() * (1.0 - s.array());
  };
  return id;
}

Graph::NodeId Graph::tanh(NodeId a) {
  const NodeId id = emplace(nodes_[a].v.array().tanh());
  nodes_[id].back = [this, id, a]() {
    nodes_[a].g.array() +=
        nodes_[id].g.array() * (1.0 - nodes_[id].v.array().square());
  };
  return id;
}

Graph::NodeId Graph::relu(NodeId a) {
  const NodeId id = emplace(nodes_[a].v.cwiseMax(0.0));
  nodes_[id].back = [this, id, a]() {
    nodes_[a].g.array() +=
        nodes_[id].g.array() *
        (nodes_[a].v.array() > 0.0).cast<double>();
  };
  return id;
}

Graph::NodeId Graph::log(NodeId a) {
  if ((nodes_[a].v.array() <= 0.0).any())
    throw InvalidArgument("log: non-positive argument");
  const NodeId id = emplace(nodes_[a].v.array().log());
  nodes_[id].back = [this, id, a]() {
    nodes_[a].g.array() += nodes_[id].g.array() / nodes_[a].v.array();
  };
  return id;
}

Graph::NodeId Graph::square(NodeId a) {
  const NodeId id = emplace(nodes_[a].v.array().square());
  nodes_[id].back = [this, id, a]() {
    nodes_[a].g.array() += 2.0 * nodes_[id].g.array() * nodes_[a].v.array();
  };
  return id;
}

Graph::NodeId Graph::transpose(NodeId a) {
  const NodeId id = emplace(nodes_[a].v.transpose());
  nodes_[id].back = [this, id, a]() {
    nodes_[a].g += nodes_[id].g.transpose();
  };
  return id;
}

Graph::NodeId Graph::clamp(NodeId a, double lo, double hi) {
  if (lo >= hi) throw InvalidArgument("clamp: lo must be < hi");
  const NodeId id = emplace(nodes_[a].v.cwiseMax(lo).cwiseMin(hi));
  nodes_[id].back = [this, id, a, lo, hi]() {
    nodes_[a].g.array() +=
        nodes_[id].g.array() *
        ((nodes_[a].v.array() > lo) && (nodes_[a].v.array() < hi))
            .cast<double>();
  };
  return id;
}

Graph::NodeId Graph::row(NodeId a, int r) {
  if (r < 0 || r >= nodes_[a].v.rows())
    throw ShapeMismatch("row: index out of range");
  const NodeId id = emplace(nodes_[a].v.row(r));
  nodes_[id].back = [this, id, a, r]() {
    nodes_[a].g.row(r) += nodes_[id].g.row(0);
  };
  return id;
}

Graph::NodeId Graph::concat_cols(NodeId a, NodeId b) {
  const auto& va = nodes_[a].v;
  const auto& vb = nodes_[b].v;
  if (va.rows() != vb.rows()) throw ShapeMismatch("concat_cols: row counts differ");
  Eigen::MatrixXd v(va.rows(), va.cols() + vb.cols());
  v << va, vb;
  const NodeId id = emplace(std::move(v));
  nodes_[id].back = [this, id, a, b]() {
    const auto& g = nodes_[id].g;
    nodes_[a].g += g.leftCols(nodes_[a].v.cols());
    nodes_[b].g += g.rightCols(nodes_[b].v.cols());
  };
  return id;
}

Graph::NodeId Graph::stack_rows(const std::vector<NodeId>& rows) {
  if (rows.empty()) throw ShapeMismatch("stack_rows: empty list");
  const Eigen::Index cols = nodes_[rows[0]].v.cols();
  Eigen::Index total = 0;
  for (NodeId r : rows) {
    if (nodes_[r].v.cols() != cols)
      throw ShapeMismatch("stack_rows: column counts differ");
    total += nodes_[r].v.rows();
  }
  Eigen::MatrixXd v(total, cols);
  Eigen::Index at = 0;
  for (NodeId r : rows) {
    v.middleRows(at, nodes_[r].v.rows()) = nodes_[r].v;
    at += nodes_[r].v.rows();
  }
  const NodeId id = emplace(std::move(v));
  std::vector<NodeId> parts = rows;
  nodes_[id].back = [this, id, parts]() {
    Eigen::Index at = 0;
    for (NodeId r : parts) {
      nodes_[r].g += nodes_[id].g.middleRows(at, nodes_[r].v.rows());
      at += nodes_[r].v.rows();
    }
  };
  return id;
}

Graph::NodeId Graph::mean_all(NodeId a) {
  const double n = static_cast<double>(nodes_[a].v.size());
  Eigen::MatrixXd v(1, 1);
  v(0, 0) = nodes_[a].v.mean();
  const NodeId id = emplace(std::move(v));
  nodes_[id].back = [this, id, a, n]() {
    nodes_[a].g.array() += nodes_[id].g(0, 0) / n;
  };
  return id;
}

Graph::NodeId Graph::conv1d(NodeId x, NodeId weight, NodeId bias, int kernel,
                            int stride) {
  const auto& vx = nodes_[x].v;
  const auto& vw = nodes_[weight].v;
  const auto& vb = nodes_[bias].v;
  const int t = static_cast<int>(vx.rows());
  const int c_in = static_cast<int>(vx.cols());
  if (kernel < 1 || stride < 1)
    throw InvalidArgument("conv1d: kernel and stride must be >= 1");
  if (vw.rows() != static_cast<Eigen::Index>(kernel) * c_in)
    throw ShapeMismatch("conv1d: weight rows must be kernel * c_in");
  const int c_out = static_cast<int>(vw.cols());
  if (vb.rows() != 1 || vb.cols() != c_out)
    throw ShapeMismatch("conv1d: bias must be 1 x c_out");

  const int t_out = (t + stride - 1) / stride;
  const int pad = (kernel - 1) / 2;
  Eigen::MatrixXd v(t_out, c_out);
  for (int o = 0; o < t_out; ++o) {
    Eigen::RowVectorXd patch = Eigen::RowVectorXd::Zero(kernel * c_in);
    for (int k = 0; k < kernel; ++k) {
      const int src = o * stride - pad + k;
      if (src >= 0 && src < t) patch.segment(k * c_in, c_in) = vx.row(src);
    }
    v.row(o) = patch * vw + vb.row(0);
  }
  const NodeId id = emplace(std::move(v));
  nodes_[id].back = [this, id, x, weight, bias, kernel, stride, t, c_in,
                     t_out, pad]() {
    const auto& g = nodes_[id].g;
    const auto& vx2 = nodes_[x].v;
    const auto& vw2 = nodes_[weight].v;
    nodes_[bias].g.row(0) += g.colwise().sum();
    for (int o = 0; o < t_out; ++o) {
      for (int k = 0; k < kernel; ++k) {
        const int src = o * stride - pad + k;
        if (src < 0 || src >= t) continue;
        nodes_[weight].g.middleRows(k * c_in, c_in).noalias() +=
            vx2.row(src).transpose() * g.row(o);
        nodes_[x].g.row(src).noalias() +=
            g.row(o) * vw2.middleRows(k * c_in, c_in).transpose();
      }
    }
  };
  return id;
}

void Graph::backward(NodeId loss) {
  const auto& v = nodes_[loss].v;
  if (v.rows() != 1 || v.cols() != 1)
    throw ShapeMismatch("backward: loss node must be scalar");
  for (auto& node : nodes_) node.g.setZero();
  nodes_[loss].g(0, 0) = 1.0;
  for (NodeId id = loss; id >= 0; --id)
    if (nodes_[id].back) nodes_[id].back();
}

}  // namespace windgrid
