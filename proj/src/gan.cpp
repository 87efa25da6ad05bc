#include <algorithm>
#include <cmath>
#include <numeric>

#include "windgrid/nn.hpp"
#include "windgrid/rng.hpp"

namespace windgrid {

namespace {

constexpr double kProbFloor = 1e-7;
constexpr double kProbCeil = 1.0 - 1e-7;

double clamp_prob(double p) {
  return std::min(kProbCeil, std::max(kProbFloor, p));
}

// Latent draw: latent_dim i.i.d. standard-normal channels plus two
// deterministic phase channels (sin and cos of the within-day angle). The
// phase channels give the generator the hour identity; without them its
// output distribution would be the same at every hour and could never match
// an hour-dependent profile.
constexpr int kPhaseChannels = 2;

Eigen::MatrixXd phase_channels(int horizon) {
  Eigen::MatrixXd p(horizon, kPhaseChannels);
  for (int r = 0; r < horizon; ++r) {
    const double angle = 2.0 * M_PI * r / horizon;
    p(r, 0) = std::sin(angle);
    p(r, 1) = std::cos(angle);
  }
  return p;
}

Eigen::MatrixXd draw_latent(Rng& rng, int horizon, int latent_dim) {
  Eigen::MatrixXd z(horizon, latent_dim + kPhaseChannels);
  for (int r = 0; r < horizon; ++r)
    for (int c = 0; c < latent_dim; ++c) z(r, c) = rng.normal();
  z.rightCols(kPhaseChannels) = phase_channels(horizon);
  return z;
}

// Clamped discriminator probability: sigmoid of the mean of the stack output.
Graph::NodeId disc_prob(Graph& g, Graph::NodeId disc_output) {
  return g.clamp(g.sigmoid(g.mean_all(disc_output)), kProbFloor, kProbCeil);
}

Graph::NodeId mean_of(Graph& g, const std::vector<Graph::NodeId>& terms) {
  Graph::NodeId acc = terms[0];
  for (size_t i = 1; i < terms.size(); ++i) acc = g.add(acc, terms[i]);
  return g.affine(acc, 1.0 / static_cast<double>(terms.size()), 0.0);
}

// Each build_forward call makes its own copies of the parameter nodes, all
// holding identical values; the total gradient is the sum over copies,
// flattened row-major in node order (matching the flat parameter layout).
void accumulate_grads(const Graph& g,
                      const std::vector<std::vector<Graph::NodeId>>& copies,
                      Eigen::VectorXd& grad) {
  for (const auto& nodes : copies) {
    Eigen::Index at = 0;
    for (Graph::NodeId id : nodes) {
      const Eigen::MatrixXd& gm = g.gradient(id);
      for (Eigen::Index r = 0; r < gm.rows(); ++r)
        for (Eigen::Index c = 0; c < gm.cols(); ++c) grad(at++) += gm(r, c);
    }
  }
}

struct Opt {
  TrainConfig::Optimizer kind;
  double lr, clip;
  Eigen::VectorXd m, v;
  int t = 0;

  Opt(const TrainConfig& cfg, Eigen::Index n)
      : kind(cfg.optimizer), lr(cfg.learning_rate), clip(cfg.gradient_clip),
        m(Eigen::VectorXd::Zero(n)), v(Eigen::VectorXd::Zero(n)) {}

  void step(Eigen::VectorXd& p, Eigen::VectorXd grad) {
    if (clip > 0.0) {
      const double n = grad.norm();
      if (n > clip) grad *= clip / n;
    }
    if (kind == TrainConfig::Optimizer::Sgd) {
      p -= lr * grad;
      return;
    }
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    ++t;
    m = b1 * m + (1.0 - b1) * grad;
    v = b2 * v + (1.0 - b2) * grad.cwiseProduct(grad);
    p.array() -= lr * (m.array() / (1.0 - std::pow(b1, t))) /
                 ((v.array() / (1.0 - std::pow(b2, t))).sqrt() + eps);
  }
};

}  // namespace

std::pair<double, double> gan_loss(const Eigen::VectorXd& d_real,
                                   const Eigen::VectorXd& d_fake) {
  if (d_real.size() == 0 || d_fake.size() == 0)
    throw InvalidArgument("gan_loss needs nonempty probability batches");
  double sum_real = 0.0, sum_fake = 0.0;
  for (Eigen::Index i = 0; i < d_real.size(); ++i)
    sum_real += std::log(clamp_prob(d_real(i)));
  for (Eigen::Index i = 0; i < d_fake.size(); ++i)
    sum_fake += std::log(1.0 - clamp_prob(d_fake(i)));
  const double g_obj = sum_fake / static_cast<double>(d_fake.size());
  const double d_obj = sum_real / static_cast<double>(d_real.size()) + g_obj;
  return {d_obj, g_obj};
}

GanResult train_convgan(const NetworkSpec& generator_spec,
                        const NetworkSpec& discriminator_spec,
                        const Eigen::MatrixXd& real_data,
                        const TrainConfig& config, int latent_dim) {
  config.check();
  generator_spec.check();
  discriminator_spec.check();
  if (latent_dim < 1) throw InvalidArgument("latent dimension must be >= 1");
  if (real_data.rows() < 1 || real_data.cols() < 1)
    throw InvalidArgument("real data must be a nonempty S x T matrix");
  const int horizon = static_cast<int>(real_data.cols());

  const bool has_conv = std::any_of(
      generator_spec.layers.begin(), generator_spec.layers.end(),
      [](const LayerSpec& l) { return l.kind == LayerSpec::Kind::Conv1d; });
  if (!has_conv)
    throw InvalidArgument("generator must contain a conv1d layer");

  Eigen::VectorXd gen_params =
      init_params(generator_spec, latent_dim + kPhaseChannels, config.seed);
  // The discriminator gets the same phase channels as the generator; a
  // conv + mean-pool stack over the bare series is (nearly) translation
  // invariant and could not penalize a phase-shifted profile.
  Eigen::VectorXd disc_params =
      init_params(discriminator_spec, 1 + kPhaseChannels, config.seed + 1);
  {
    const Eigen::MatrixXd probe = forward_model(
        generator_spec, gen_params,
        Eigen::MatrixXd::Zero(horizon, latent_dim + kPhaseChannels));
    if (probe.rows() != horizon || probe.cols() != 1)
      throw ShapeMismatch("generator must emit a T x 1 series");
    forward_model(discriminator_spec, disc_params,
                  Eigen::MatrixXd::Zero(horizon, 1 + kPhaseChannels));
  }

  Rng rng(config.seed);
  const Eigen::MatrixXd phase = phase_channels(horizon);
  Opt opt_g(config, gen_params.size());
  Opt opt_d(config, disc_params.size());
  GanResult result;
  result.latent_dim = latent_dim;

  std::vector<int> order(static_cast<size_t>(real_data.rows()));
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    double sum_d = 0.0, sum_g = 0.0;
    int batches = 0;
    try {
      for (size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[rng.below(i)]);
      for (size_t start = 0; start < order.size();
           start += static_cast<size_t>(config.batch_size)) {
        const size_t stop = std::min(
            order.size(), start + static_cast<size_t>(config.batch_size));
        const int b = static_cast<int>(stop - start);

        // Discriminator step: maximize mean log p_real + mean log(1-p_fake).
        {
          Graph g;
          std::vector<std::vector<Graph::NodeId>> disc_copies;
          std::vector<Graph::NodeId> log_real, log_fake;
          for (size_t i = start; i < stop; ++i) {
            Eigen::MatrixXd with_phase(horizon, 1 + kPhaseChannels);
            with_phase.col(0) = real_data.row(order[i]).transpose();
            with_phase.rightCols(kPhaseChannels) = phase;
            BuiltModel d = build_forward(g, discriminator_spec, disc_params,
                                         g.input(with_phase),
                                         1 + kPhaseChannels);
            disc_copies.push_back(std::move(d.param_nodes));
            log_real.push_back(g.log(disc_prob(g, d.output)));
          }
          for (int k = 0; k < b; ++k) {
            const Graph::NodeId z =
                g.input(draw_latent(rng, horizon, latent_dim));
            BuiltModel gen = build_forward(g, generator_spec, gen_params, z,
                                           latent_dim + kPhaseChannels);
            BuiltModel d = build_forward(
                g, discriminator_spec, disc_params,
                g.concat_cols(gen.output, g.input(phase)),
                1 + kPhaseChannels);
            disc_copies.push_back(std::move(d.param_nodes));
            log_fake.push_back(
                g.log(g.affine(disc_prob(g, d.output), -1.0, 1.0)));
          }
          const Graph::NodeId d_obj =
              g.add(mean_of(g, log_real), mean_of(g, log_fake));
          sum_d += g.value(d_obj)(0, 0);
          g.backward(g.affine(d_obj, -1.0, 0.0));
          Eigen::VectorXd grad = Eigen::VectorXd::Zero(disc_params.size());
          accumulate_grads(g, disc_copies, grad);
          opt_d.step(disc_params, std::move(grad));
        }

        // Generator step: minimize mean log(1-p_fake) on a fresh batch.
        {
          Graph g;
          std::vector<std::vector<Graph::NodeId>> gen_copies;
          std::vector<Graph::NodeId> log_fake;
          for (int k = 0; k < b; ++k) {
            const Graph::NodeId z =
                g.input(draw_latent(rng, horizon, latent_dim));
            BuiltModel gen = build_forward(g, generator_spec, gen_params, z,
                                           latent_dim + kPhaseChannels);
            BuiltModel d = build_forward(
                g, discriminator_spec, disc_params,
                g.concat_cols(gen.output, g.input(phase)),
                1 + kPhaseChannels);
            gen_copies.push_back(std::move(gen.param_nodes));
            log_fake.push_back(
                g.log(g.affine(disc_prob(g, d.output), -1.0, 1.0)));
          }
          const Graph::NodeId g_obj = mean_of(g, log_fake);
          sum_g += g.value(g_obj)(0, 0);
          g.backward(g_obj);
          Eigen::VectorXd grad = Eigen::VectorXd::Zero(gen_params.size());
          accumulate_grads(g, gen_copies, grad);
          opt_g.step(gen_params, std::move(grad));
        }

        if (!gen_params.allFinite() || !disc_params.allFinite())
          throw NonFiniteValue("GAN parameters diverged");
        ++batches;
      }
    } catch (const NonFiniteValue& e) {
      throw NonFiniteValue(std::string(e.what()) + " (epoch " +
                           std::to_string(epoch) + ")");
    }
    result.trace.push_back({epoch, sum_d / std::max(1, batches),
                            sum_g / std::max(1, batches)});
  }

  result.generator_params = std::move(gen_params);
  result.discriminator_params = std::move(disc_params);
  return result;
}

Eigen::MatrixXd gan_sample(const NetworkSpec& generator_spec,
                           const Eigen::VectorXd& params, int latent_dim,
                           int count, int horizon, std::uint64_t seed) {
  if (count < 1 || horizon < 1 || latent_dim < 1)
    throw InvalidArgument("gan_sample needs count, horizon, latent >= 1");
  Rng rng(seed);
  Eigen::MatrixXd out(count, horizon);
  for (int s = 0; s < count; ++s) {
    const Eigen::MatrixXd series = forward_model(
        generator_spec, params, draw_latent(rng, horizon, latent_dim));
    if (series.cols() != 1 || series.rows() != horizon)
      throw ShapeMismatch("generator must emit a T x 1 series");
    out.row(s) = series.col(0).transpose();
  }
  return out;
}

}  // namespace windgrid
