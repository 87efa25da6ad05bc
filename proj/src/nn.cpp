#include "windgrid/nn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "windgrid/rng.hpp"

namespace windgrid {

namespace {

Eigen::VectorXd sigmoid_vec(const Eigen::VectorXd& z) {
  return z.unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
}

}  // namespace

void LstmCellParams::check() const {
  const int h = hidden();
  const int d = input();
  auto bad_u = [h](const Eigen::MatrixXd& m) {
    return m.rows() != h || m.cols() != h;
  };
  auto bad_w = [h, d](const Eigen::MatrixXd& m) {
    return m.rows() != h || m.cols() != d;
  };
  auto bad_t = [h](const Eigen::VectorXd& v) { return v.size() != h; };
  if (h < 1 || d < 1 || bad_u(u_i) || bad_u(u_f) || bad_u(u_o) || bad_u(u_c) ||
      bad_w(w_i) || bad_w(w_f) || bad_w(w_o) || bad_w(w_c) || bad_t(th_i) ||
      bad_t(th_f) || bad_t(th_o) || bad_t(th_c))
    throw ShapeMismatch("inconsistent LSTM cell parameter shapes");
}

LstmStep lstm_cell_step(const LstmCellParams& params, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& h_prev,
                        const Eigen::VectorXd& c_prev) {
  params.check();
  if (x.size() != params.input() || h_prev.size() != params.hidden() ||
      c_prev.size() != params.hidden())
    throw ShapeMismatch("LSTM step inputs do not match parameter shapes");

  LstmStep s;
  s.i = sigmoid_vec(params.u_i * h_prev + params.w_i * x + params.th_i);
  s.f = sigmoid_vec(params.u_f * h_prev + params.w_f * x + params.th_f);
  s.o = sigmoid_vec(params.u_o * h_prev + params.w_o * x + params.th_o);
  s.candidate =
      (params.u_c * h_prev + params.w_c * x + params.th_c).array().tanh();
  s.c = s.f.cwiseProduct(c_prev) + s.i.cwiseProduct(s.candidate);
  s.h = s.o.cwiseProduct(s.c.array().tanh().matrix());
  if (!s.h.allFinite() || !s.c.allFinite())
    throw NonFiniteValue("LSTM step produced a non-finite state");
  return s;
}

Eigen::MatrixXd bilstm_forward(const LstmCellParams& forward_params,
                               const LstmCellParams& backward_params,
                               const Eigen::MatrixXd& sequence,
                               const Eigen::MatrixXd& w_yh,
                               const Eigen::VectorXd& theta0) {
  forward_params.check();
  backward_params.check();
  const int h = forward_params.hidden();
  if (backward_params.hidden() != h)
    throw ShapeMismatch("forward/backward hidden sizes differ");
  const int t_len = static_cast<int>(sequence.rows());
  if (sequence.cols() != forward_params.input() ||
      sequence.cols() != backward_params.input())
    throw ShapeMismatch("sequence width does not match cell input size");
  if (w_yh.cols() != 2 * h || theta0.size() != w_yh.rows())
    throw ShapeMismatch("head must map 2h to the output dimension");

  Eigen::MatrixXd hf(t_len, h), hb(t_len, h);
  Eigen::VectorXd hs = Eigen::VectorXd::Zero(h);
  Eigen::VectorXd cs = Eigen::VectorXd::Zero(h);
  for (int t = 0; t < t_len; ++t) {
    const LstmStep s =
        lstm_cell_step(forward_params, sequence.row(t).transpose(), hs, cs);
    hs = s.h;
    cs = s.c;
    hf.row(t) = s.h.transpose();
  }
  hs.setZero();
  cs.setZero();
  for (int t = t_len - 1; t >= 0; --t) {
    const LstmStep s =
        lstm_cell_step(backward_params, sequence.row(t).transpose(), hs, cs);
    hs = s.h;
    cs = s.c;
    hb.row(t) = s.h.transpose();
  }

  Eigen::MatrixXd y(t_len, w_yh.rows());
  for (int t = 0; t < t_len; ++t) {
    Eigen::VectorXd state(2 * h);
    state << hf.row(t).transpose(), hb.row(t).transpose();
    y.row(t) = (w_yh * state + theta0).transpose();
  }
  return y;
}

// ---------------------------------------------------------------------------
// Parameter layout.
// ---------------------------------------------------------------------------

namespace {

struct LayoutEntry {
  int rows = 0;
  int cols = 0;
  bool is_bias = false;
};

std::vector<LayoutEntry> lstm_layout(int h, int in) {
  std::vector<LayoutEntry> out;
  for (int g = 0; g < 4; ++g) {
    out.push_back({h, h, false});   // U
    out.push_back({h, in, false});  // W
    out.push_back({h, 1, true});    // theta
  }
  return out;
}

// Parameter matrices in flat order plus the resulting channel width.
std::vector<LayoutEntry> build_layout(const NetworkSpec& spec, int input_dim,
                                      int* final_dim = nullptr) {
  spec.check();
  if (input_dim < 1) throw ShapeMismatch("input dimension must be >= 1");
  std::vector<LayoutEntry> layout;
  int w = input_dim;
  for (const LayerSpec& layer : spec.layers) {
    switch (layer.kind) {
      case LayerSpec::Kind::Dense:
        layout.push_back({w, layer.units, false});
        layout.push_back({1, layer.units, true});
        w = layer.units;
        break;
      case LayerSpec::Kind::Conv1d:
        layout.push_back({layer.kernel * w, layer.units, false});
        layout.push_back({1, layer.units, true});
        w = layer.units;
        break;
      case LayerSpec::Kind::Lstm: {
        auto part = lstm_layout(layer.units, w);
        layout.insert(layout.end(), part.begin(), part.end());
        w = layer.units;
        break;
      }
      case LayerSpec::Kind::Bilstm: {
        for (int rep = 0; rep < 2; ++rep) {
          auto part = lstm_layout(layer.units, w);
          layout.insert(layout.end(), part.begin(), part.end());
        }
        w = 2 * layer.units;
        break;
      }
      case LayerSpec::Kind::ActivationOnly:
        break;
    }
  }
  if (final_dim) *final_dim = w;
  return layout;
}

// Row-major views over the flat parameter vector.
std::vector<Eigen::MatrixXd> unflatten(const std::vector<LayoutEntry>& layout,
                                       const Eigen::VectorXd& flat) {
  Eigen::Index need = 0;
  for (const auto& e : layout) need += static_cast<Eigen::Index>(e.rows) * e.cols;
  if (flat.size() != need)
    throw ShapeMismatch("parameter vector has wrong length");
  std::vector<Eigen::MatrixXd> mats;
  mats.reserve(layout.size());
  Eigen::Index at = 0;
  for (const auto& e : layout) {
    using RowMajor =
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    mats.emplace_back(
        Eigen::Map<const RowMajor>(flat.data() + at, e.rows, e.cols));
    at += static_cast<Eigen::Index>(e.rows) * e.cols;
  }
  return mats;
}

Eigen::VectorXd flatten_grads(const std::vector<LayoutEntry>& layout,
                              const Graph& graph,
                              const std::vector<Graph::NodeId>& nodes) {
  Eigen::Index total = 0;
  for (const auto& e : layout) total += static_cast<Eigen::Index>(e.rows) * e.cols;
  Eigen::VectorXd flat(total);
  Eigen::Index at = 0;
  for (size_t m = 0; m < layout.size(); ++m) {
    const Eigen::MatrixXd& g = graph.gradient(nodes[m]);
    for (int r = 0; r < layout[m].rows; ++r)
      for (int c = 0; c < layout[m].cols; ++c) flat(at++) = g(r, c);
  }
  return flat;
}

Graph::NodeId apply_activation(Graph& g, Graph::NodeId x, Activation act) {
  switch (act) {
    case Activation::Relu:
      return g.relu(x);
    case Activation::Tanh:
      return g.tanh(x);
    case Activation::Sigmoid:
      return g.sigmoid(x);
    case Activation::Linear:
      return x;
  }
  return x;
}

// One directional LSTM pass inside the graph; params points at the first of
// the 12 gate matrices. Returns the T x h stack of hidden states.
Graph::NodeId graph_lstm_pass(Graph& g, Graph::NodeId x, int t_len, int h,
                              const std::vector<Graph::NodeId>& params,
                              size_t at, bool reverse) {
  const Graph::NodeId u_i = params[at + 0], w_i = params[at + 1],
                      t_i = params[at + 2];
  const Graph::NodeId u_f = params[at + 3], w_f = params[at + 4],
                      t_f = params[at + 5];
  const Graph::NodeId u_o = params[at + 6], w_o = params[at + 7],
                      t_o = params[at + 8];
  const Graph::NodeId u_c = params[at + 9], w_c = params[at + 10],
                      t_c = params[at + 11];
  Graph::NodeId hs = g.input(Eigen::MatrixXd::Zero(h, 1));
  Graph::NodeId cs = g.input(Eigen::MatrixXd::Zero(h, 1));
  std::vector<Graph::NodeId> rows(t_len);
  for (int step = 0; step < t_len; ++step) {
    const int t = reverse ? t_len - 1 - step : step;
    const Graph::NodeId xt = g.transpose(g.row(x, t));
    auto gate = [&](Graph::NodeId u, Graph::NodeId w, Graph::NodeId th) {
      return g.add(g.add(g.matmul(u, hs), g.matmul(w, xt)), th);
    };
    const Graph::NodeId gi = g.sigmoid(gate(u_i, w_i, t_i));
    const Graph::NodeId gf = g.sigmoid(gate(u_f, w_f, t_f));
    const Graph::NodeId go = g.sigmoid(gate(u_o, w_o, t_o));
    const Graph::NodeId gc = g.tanh(gate(u_c, w_c, t_c));
    cs = g.add(g.mul(gf, cs), g.mul(gi, gc));
    hs = g.mul(go, g.tanh(cs));
    rows[t] = g.transpose(hs);
  }
  return g.stack_rows(rows);
}

Graph::NodeId build_with_nodes(Graph& g, const NetworkSpec& spec,
                               const std::vector<Graph::NodeId>& params,
                               Graph::NodeId input) {
  Graph::NodeId x = input;
  size_t at = 0;
  for (const LayerSpec& layer : spec.layers) {
    switch (layer.kind) {
      case LayerSpec::Kind::Dense:
        x = g.add(g.matmul(x, params[at]), params[at + 1]);
        at += 2;
        break;
      case LayerSpec::Kind::Conv1d:
        x = g.conv1d(x, params[at], params[at + 1], layer.kernel,
                     layer.stride);
        at += 2;
        break;
      case LayerSpec::Kind::Lstm:
        x = graph_lstm_pass(g, x, static_cast<int>(g.value(x).rows()),
                            layer.units, params, at, false);
        at += 12;
        break;
      case LayerSpec::Kind::Bilstm: {
        const int t_len = static_cast<int>(g.value(x).rows());
        const Graph::NodeId fwd =
            graph_lstm_pass(g, x, t_len, layer.units, params, at, false);
        const Graph::NodeId bwd =
            graph_lstm_pass(g, x, t_len, layer.units, params, at + 12, true);
        x = g.concat_cols(fwd, bwd);
        at += 24;
        break;
      }
      case LayerSpec::Kind::ActivationOnly:
        x = apply_activation(g, x, layer.activation);
        break;
    }
  }
  return x;
}

std::vector<Graph::NodeId> make_param_nodes(
    Graph& g, const std::vector<LayoutEntry>& layout,
    const Eigen::VectorXd& flat) {
  std::vector<Graph::NodeId> nodes;
  for (const Eigen::MatrixXd& m : unflatten(layout, flat))
    nodes.push_back(g.input(m));
  return nodes;
}

// MSE node: mean squared entry difference; a 1-row target is compared
// against the final output row.
Graph::NodeId mse_node(Graph& g, Graph::NodeId out,
                       const Eigen::MatrixXd& target) {
  Graph::NodeId pred = out;
  if (target.rows() == 1 && g.value(out).rows() > 1)
    pred = g.row(out, static_cast<int>(g.value(out).rows()) - 1);
  if (g.value(pred).rows() != target.rows() ||
      g.value(pred).cols() != target.cols())
    throw ShapeMismatch("target shape does not match model output");
  return g.mean_all(g.square(g.sub(pred, g.input(target))));
}

Graph::NodeId mean_of(Graph& g, const std::vector<Graph::NodeId>& terms) {
  Graph::NodeId acc = terms[0];
  for (size_t i = 1; i < terms.size(); ++i) acc = g.add(acc, terms[i]);
  return g.affine(acc, 1.0 / static_cast<double>(terms.size()), 0.0);
}

void check_dataset(const std::vector<Eigen::MatrixXd>& inputs,
                   const std::vector<Eigen::MatrixXd>& targets) {
  if (inputs.empty() || inputs.size() != targets.size())
    throw ShapeMismatch("inputs and targets must be nonempty, equal-length");
  for (size_t i = 1; i < inputs.size(); ++i)
    if (inputs[i].cols() != inputs[0].cols())
      throw ShapeMismatch("all input samples must share a width");
}

double dataset_loss(const NetworkSpec& spec,
                    const std::vector<LayoutEntry>& layout,
                    const Eigen::VectorXd& params,
                    const std::vector<Eigen::MatrixXd>& inputs,
                    const std::vector<Eigen::MatrixXd>& targets) {
  double total = 0.0;
  for (size_t s = 0; s < inputs.size(); ++s) {
    Graph g;
    auto nodes = make_param_nodes(g, layout, params);
    const Graph::NodeId out =
        build_with_nodes(g, spec, nodes, g.input(inputs[s]));
    total += g.value(mse_node(g, out, targets[s]))(0, 0);
  }
  return total / static_cast<double>(inputs.size());
}

struct Optimizer {
  TrainConfig::Optimizer kind;
  double lr;
  double clip;
  Eigen::VectorXd m, v;
  int t = 0;

  Optimizer(const TrainConfig& cfg, Eigen::Index n)
      : kind(cfg.optimizer), lr(cfg.learning_rate), clip(cfg.gradient_clip),
        m(Eigen::VectorXd::Zero(n)), v(Eigen::VectorXd::Zero(n)) {}

  void step(Eigen::VectorXd& params, Eigen::VectorXd grad) {
    if (clip > 0.0) {
      const double norm = grad.norm();
      if (norm > clip) grad *= clip / norm;
    }
    if (kind == TrainConfig::Optimizer::Sgd) {
      params -= lr * grad;
      return;
    }
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    ++t;
    m = b1 * m + (1.0 - b1) * grad;
    v = b2 * v + (1.0 - b2) * grad.cwiseProduct(grad);
    const double mc = 1.0 - std::pow(b1, t);
    const double vc = 1.0 - std::pow(b2, t);
    params.array() -=
        lr * (m.array() / mc) / ((v.array() / vc).sqrt() + eps);
  }
};

}  // namespace

void NetworkSpec::check() const {
  if (layers.empty()) throw InvalidArgument("network needs at least one layer");
  for (const LayerSpec& layer : layers) {
    switch (layer.kind) {
      case LayerSpec::Kind::Dense:
      case LayerSpec::Kind::Lstm:
      case LayerSpec::Kind::Bilstm:
        if (layer.units < 1)
          throw InvalidArgument("layer needs units >= 1");
        break;
      case LayerSpec::Kind::Conv1d:
        if (layer.units < 1 || layer.kernel < 1 || layer.stride < 1)
          throw InvalidArgument("conv1d needs units, kernel, stride >= 1");
        break;
      case LayerSpec::Kind::ActivationOnly:
        break;
    }
  }
}

int NetworkSpec::output_dim(int input_dim) const {
  int w = 0;
  build_layout(*this, input_dim, &w);
  return w;
}

int param_count(const NetworkSpec& spec, int input_dim) {
  int total = 0;
  for (const auto& e : build_layout(spec, input_dim)) total += e.rows * e.cols;
  return total;
}

Eigen::VectorXd init_params(const NetworkSpec& spec, int input_dim,
                            std::uint64_t seed) {
  const auto layout = build_layout(spec, input_dim);
  Eigen::Index total = 0;
  for (const auto& e : layout) total += static_cast<Eigen::Index>(e.rows) * e.cols;
  Eigen::VectorXd flat(total);
  Rng rng(seed);
  Eigen::Index at = 0;
  for (const auto& e : layout) {
    const Eigen::Index n = static_cast<Eigen::Index>(e.rows) * e.cols;
    if (e.is_bias) {
      flat.segment(at, n).setZero();
    } else {
      const double s = std::sqrt(6.0 / static_cast<double>(e.rows + e.cols));
      for (Eigen::Index i = 0; i < n; ++i)
        flat(at + i) = rng.uniform(-s, s);
    }
    at += n;
  }
  return flat;
}

BuiltModel build_forward(Graph& graph, const NetworkSpec& spec,
                         const Eigen::VectorXd& params,
                         Graph::NodeId input_node, int input_dim) {
  const auto layout = build_layout(spec, input_dim);
  BuiltModel built;
  built.param_nodes = make_param_nodes(graph, layout, params);
  built.output = build_with_nodes(graph, spec, built.param_nodes, input_node);
  return built;
}

Eigen::MatrixXd forward_model(const NetworkSpec& spec,
                              const Eigen::VectorXd& params,
                              const Eigen::MatrixXd& input) {
  Graph g;
  const BuiltModel built = build_forward(
      g, spec, params, g.input(input), static_cast<int>(input.cols()));
  return g.value(built.output);
}

void TrainConfig::check() const {
  if (learning_rate <= 0.0) throw InvalidArgument("learning rate must be > 0");
  if (epochs < 1) throw InvalidArgument("epochs must be >= 1");
  if (batch_size < 1) throw InvalidArgument("batch size must be >= 1");
  if (gradient_clip < 0.0) throw InvalidArgument("gradient clip must be >= 0");
}

TrainResult train_model(const NetworkSpec& spec,
                        const std::vector<Eigen::MatrixXd>& inputs,
                        const std::vector<Eigen::MatrixXd>& targets,
                        const TrainConfig& config) {
  config.check();
  check_dataset(inputs, targets);
  if (spec.loss != LossKind::Mse)
    throw InvalidArgument("train_model only supports the mse loss");
  const int input_dim = static_cast<int>(inputs[0].cols());
  const auto layout = build_layout(spec, input_dim);

  TrainResult result;
  Eigen::VectorXd params = init_params(spec, input_dim, config.seed);
  Optimizer opt(config, params.size());
  Rng rng(config.seed + 0x9e3779b97f4a7c15ull);

  double best_loss = dataset_loss(spec, layout, params, inputs, targets);
  Eigen::VectorXd best_params = params;
  result.loss_history.push_back(best_loss);

  std::vector<int> order(inputs.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    try {
      for (size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[rng.below(i)]);
      for (size_t start = 0; start < order.size();
           start += static_cast<size_t>(config.batch_size)) {
        const size_t stop = std::min(
            order.size(), start + static_cast<size_t>(config.batch_size));
        Graph g;
        auto nodes = make_param_nodes(g, layout, params);
        std::vector<Graph::NodeId> losses;
        for (size_t i = start; i < stop; ++i) {
          const int s = order[i];
          const Graph::NodeId out =
              build_with_nodes(g, spec, nodes, g.input(inputs[s]));
          losses.push_back(mse_node(g, out, targets[s]));
        }
        g.backward(mean_of(g, losses));
        opt.step(params, flatten_grads(layout, g, nodes));
        if (!params.allFinite())
          throw NonFiniteValue("parameters diverged");
      }
      const double loss = dataset_loss(spec, layout, params, inputs, targets);
      result.loss_history.push_back(loss);
      if (loss < best_loss) {
        best_loss = loss;
        best_params = params;
      }
    } catch (const NonFiniteValue& e) {
      throw NonFiniteValue(std::string(e.what()) + " (epoch " +
                           std::to_string(epoch) + ")");
    }
  }

  result.params = std::move(best_params);
  result.final_loss = best_loss;
  return result;
}

double gradient_check(const NetworkSpec& spec, const Eigen::VectorXd& params,
                      const std::vector<Eigen::MatrixXd>& inputs,
                      const std::vector<Eigen::MatrixXd>& targets) {
  check_dataset(inputs, targets);
  const int input_dim = static_cast<int>(inputs[0].cols());
  const auto layout = build_layout(spec, input_dim);

  Graph g;
  auto nodes = make_param_nodes(g, layout, params);
  std::vector<Graph::NodeId> losses;
  for (size_t s = 0; s < inputs.size(); ++s) {
    const Graph::NodeId out =
        build_with_nodes(g, spec, nodes, g.input(inputs[s]));
    losses.push_back(mse_node(g, out, targets[s]));
  }
  g.backward(mean_of(g, losses));
  const Eigen::VectorXd analytic = flatten_grads(layout, g, nodes);

  constexpr double h = 1e-5;
  double worst = 0.0;
  Eigen::VectorXd p = params;
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    const double keep = p(j);
    p(j) = keep + h;
    const double up = dataset_loss(spec, layout, p, inputs, targets);
    p(j) = keep - h;
    const double dn = dataset_loss(spec, layout, p, inputs, targets);
    p(j) = keep;
    const double numeric = (up - dn) / (2.0 * h);
    const double denom =
        std::max({std::abs(analytic(j)), std::abs(numeric), 1e-8});
    worst = std::max(worst, std::abs(analytic(j) - numeric) / denom);
  }
  if (!std::isfinite(worst))
    throw NonFiniteValue("gradient check produced a non-finite error");
  return worst;
}

}  // namespace windgrid
