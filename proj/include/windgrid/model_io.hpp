#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "windgrid/nn.hpp"

namespace windgrid {

// Versioned textual model file: JSON with `spec`, flat `parameters` in layer
// order, `seed`, `format_version`, plus free-form numeric `extras`
// (e.g. window, capacity, latent_dim, horizon).
struct SavedModel {
  NetworkSpec spec;
  Eigen::VectorXd params;
  std::uint64_t seed = 0;
  int format_version = 1;
  std::map<std::string, double> extras;
};

std::string spec_to_json(const NetworkSpec& spec);
NetworkSpec spec_from_json(const std::string& text);

void save_model(const std::string& path, const NetworkSpec& spec,
                const Eigen::VectorXd& params, std::uint64_t seed,
                const std::map<std::string, double>& extras = {});
SavedModel load_model(const std::string& path);

// Loss trace CSVs: `epoch,loss` and `epoch,loss_d,loss_g`.
void write_loss_trace(const std::string& path,
                      const std::vector<double>& loss);
void write_gan_trace(const std::string& path,
                     const std::vector<GanTraceRow>& trace);

}  // namespace windgrid
