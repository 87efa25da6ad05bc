#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "windgrid/autodiff.hpp"
#include "windgrid/errors.hpp"

namespace windgrid {

// ---------------------------------------------------------------------------
// Standalone LSTM cell (column-vector convention): gate = act(U h + W x + θ).
// ---------------------------------------------------------------------------

struct LstmCellParams {
  // Gate order everywhere: input i, forget f, output o, candidate c.
  Eigen::MatrixXd u_i, u_f, u_o, u_c;  // h x h recurrent weights
  Eigen::MatrixXd w_i, w_f, w_o, w_c;  // h x d input weights
  Eigen::VectorXd th_i, th_f, th_o, th_c;  // length-h biases

  int hidden() const { return static_cast<int>(u_i.rows()); }
  int input() const { return static_cast<int>(w_i.cols()); }
  void check() const;
};

struct LstmStep {
  Eigen::VectorXd h, c;                   // new hidden / cell state
  Eigen::VectorXd i, f, o, candidate;     // gate values
};

LstmStep lstm_cell_step(const LstmCellParams& params, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& h_prev,
                        const Eigen::VectorXd& c_prev);

// Full bidirectional pass over a T x d sequence with a per-step affine head
// on the concatenated state [h_fwd; h_bwd]: y_t = W_yh [h_f; h_b] + theta0.
Eigen::MatrixXd bilstm_forward(const LstmCellParams& forward_params,
                               const LstmCellParams& backward_params,
                               const Eigen::MatrixXd& sequence,
                               const Eigen::MatrixXd& w_yh,
                               const Eigen::VectorXd& theta0);

// ---------------------------------------------------------------------------
// Network specs and trainable models over the autodiff graph.
// ---------------------------------------------------------------------------

enum class Activation { Relu, Tanh, Sigmoid, Linear };

struct LayerSpec {
  enum class Kind { Dense, Lstm, Bilstm, Conv1d, ActivationOnly };
  Kind kind = Kind::Dense;
  int units = 0;    // dense out / lstm hidden / conv out channels
  int kernel = 0;   // conv1d only
  int stride = 1;   // conv1d only
  Activation activation = Activation::Linear;  // ActivationOnly layers
};

enum class LossKind { Mse, GanGenerator, GanDiscriminator };

struct NetworkSpec {
  std::vector<LayerSpec> layers;
  LossKind loss = LossKind::Mse;

  void check() const;
  // Channel count after the full stack for the given input width.
  int output_dim(int input_dim) const;
};

// Flat parameter layout, in layer order:
//   dense(out):  W (in x out, row-major), b (out)
//   conv1d(c,k): W ((k*c_in) x c, row-major), b (c)
//   lstm(h):     for g in {i,f,o,c}: U (h x h), W (h x in), theta (h)
//   bilstm(h):   forward lstm block, then backward lstm block
//   activation:  no parameters
int param_count(const NetworkSpec& spec, int input_dim);

// Glorot-uniform weights (s = sqrt(6/(fan_in+fan_out))), zero biases.
Eigen::VectorXd init_params(const NetworkSpec& spec, int input_dim,
                            std::uint64_t seed);

// Forward pass through the stack; input is T x input_dim, output T' x out.
Eigen::MatrixXd forward_model(const NetworkSpec& spec,
                              const Eigen::VectorXd& params,
                              const Eigen::MatrixXd& input);

// Graph-building variant used by training code. param_nodes receives one
// graph input node per parameter matrix, in layout order.
struct BuiltModel {
  Graph::NodeId output = -1;
  std::vector<Graph::NodeId> param_nodes;
};
BuiltModel build_forward(Graph& graph, const NetworkSpec& spec,
                         const Eigen::VectorXd& params,
                         Graph::NodeId input_node, int input_dim);

struct TrainConfig {
  double learning_rate = 1e-2;
  int epochs = 100;
  int batch_size = 16;
  std::uint64_t seed = 0;
  enum class Optimizer { Sgd, Adam } optimizer = Optimizer::Adam;
  double gradient_clip = 0.0;  // max grad norm; 0 disables clipping

  void check() const;
};

struct TrainResult {
  Eigen::VectorXd params;            // best parameters seen
  std::vector<double> loss_history;  // full-set loss after epoch 0..E
  double final_loss = 0.0;           // loss of the returned parameters
};

// Mini-batch gradient descent on mean squared error. Targets must match the
// model output shape, except a 1-row target compares against the final
// output row (sequence-to-one regression).
TrainResult train_model(const NetworkSpec& spec,
                        const std::vector<Eigen::MatrixXd>& inputs,
                        const std::vector<Eigen::MatrixXd>& targets,
                        const TrainConfig& config);

// Central-difference check (h = 1e-5) of the analytic full-batch gradient.
// Returns max over parameters of |g_a - g_n| / max(|g_a|, |g_n|, 1e-8).
double gradient_check(const NetworkSpec& spec, const Eigen::VectorXd& params,
                      const std::vector<Eigen::MatrixXd>& inputs,
                      const std::vector<Eigen::MatrixXd>& targets);

// ---------------------------------------------------------------------------
// GAN training.
// ---------------------------------------------------------------------------

// Probabilities are clamped to [1e-7, 1-1e-7]. Returns (discriminator
// objective, generator objective): mean log d_real + mean log(1 - d_fake),
// and mean log(1 - d_fake).
std::pair<double, double> gan_loss(const Eigen::VectorXd& d_real,
                                   const Eigen::VectorXd& d_fake);

struct GanTraceRow {
  int epoch = 0;
  double loss_d = 0.0;  // discriminator objective (maximized)
  double loss_g = 0.0;  // generator objective (minimized)
};

struct GanResult {
  Eigen::VectorXd generator_params;
  Eigen::VectorXd discriminator_params;
  std::vector<GanTraceRow> trace;  // one row per epoch
  int latent_dim = 0;
};

// Alternating minimax training on S length-T series (one per row). The
// generator input is T x (latent_dim + 2): latent_dim i.i.d. standard-normal
// channels plus sin/cos phase channels encoding the hour of day; it emits a
// T x 1 series. The discriminator input is T x 3 (the series plus the same
// phase channels) and maps to a logit (mean over its output) whose sigmoid is
// the real-data probability.
GanResult train_convgan(const NetworkSpec& generator_spec,
                        const NetworkSpec& discriminator_spec,
                        const Eigen::MatrixXd& real_data,
                        const TrainConfig& config, int latent_dim = 16);

// Deterministic sampling from a trained generator: count rows of length T.
Eigen::MatrixXd gan_sample(const NetworkSpec& generator_spec,
                           const Eigen::VectorXd& params, int latent_dim,
                           int count, int horizon, std::uint64_t seed);

}  // namespace windgrid
