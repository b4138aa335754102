#pragma once

#include <algorithm>
#include <cmath>

#include "argseek/mlp.hpp"

namespace argseek::testing {

inline double batch_loss(const Mlp& net, const std::vector<Sample>& batch) {
  double sum = 0.0;
  for (const auto& s : batch) {
    double e = net.forward(s.x)(static_cast<Eigen::Index>(s.action)) - s.target;
    sum += e * e;
  }
  return sum / static_cast<double>(batch.size());
}

// Largest relative error between analytic and central-difference gradients.
inline double max_gradient_error(const Mlp& net, const std::vector<Sample>& batch,
                                 double h = 1e-5) {
  Gradients g = mlp_gradients(net, batch);
  double worst = 0.0;
  auto compare = [&](double analytic, double& param) {
    double saved = param;
    param = saved + h;
    double up = batch_loss(net, batch);
    param = saved - h;
    double down = batch_loss(net, batch);
    param = saved;
    double numeric = (up - down) / (2 * h);
    double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(analytic - numeric) / scale);
  };
  Mlp& m = const_cast<Mlp&>(net);
  for (std::size_t l = 0; l < m.num_layers(); ++l) {
    for (Eigen::Index i = 0; i < m.weights[l].rows(); ++i)
      for (Eigen::Index j = 0; j < m.weights[l].cols(); ++j)
        compare(g.weights[l](i, j), m.weights[l](i, j));
    for (Eigen::Index i = 0; i < m.biases[l].size(); ++i) compare(g.biases[l](i), m.biases[l](i));
  }
  return worst;
}

// Small random net and batch for gradient checks.
inline std::pair<Mlp, std::vector<Sample>> random_net_and_batch(Rng& rng) {
  std::vector<int> dims{static_cast<int>(2 + uniform_index(rng, 5))};
  std::size_t hidden = 1 + uniform_index(rng, 2);
  for (std::size_t i = 0; i < hidden; ++i) dims.push_back(static_cast<int>(2 + uniform_index(rng, 6)));
  dims.push_back(static_cast<int>(2 + uniform_index(rng, 4)));
  Mlp net = Mlp::init(dims, rng);
  std::vector<Sample> batch(1 + uniform_index(rng, 6));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& s : batch) {
    for (int i = 0; i < dims.front(); ++i) s.x.push_back(normal(rng));
    s.action = uniform_index(rng, static_cast<std::size_t>(dims.back()));
    s.target = normal(rng);
  }
  return {std::move(net), std::move(batch)};
}

}  // namespace argseek::testing
