#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <iosfwd>
#include <vector>

#include "argseek/random.hpp"

namespace argseek {

// Fully connected network: tanh on hidden layers, identity on the output.
struct Mlp {
  std::vector<int> layer_dims;  // input, hidden..., output
  std::vector<Eigen::MatrixXd> weights;  // weights[l] is dims[l+1] x dims[l]
  std::vector<Eigen::VectorXd> biases;

  static Mlp zeros(std::vector<int> layer_dims);
  // Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] for weights and biases.
  static Mlp init(std::vector<int> layer_dims, Rng& rng);

  std::size_t num_layers() const { return weights.size(); }
  int input_dim() const { return layer_dims.front(); }
  int output_dim() const { return layer_dims.back(); }

  Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
  Eigen::VectorXd forward(const std::vector<double>& x) const;
  // One sample per column.
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& x) const;

  void validate() const;
};

// One squared-error term: (Q(x)[action] - target)^2.
struct Sample {
  std::vector<double> x;
  std::size_t action = 0;
  double target = 0.0;
};

struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  double loss = 0.0;  // mean over the batch
};

// Exact gradients of the mean squared error over the chosen-action values.
Gradients mlp_gradients(const Mlp& net, const std::vector<Sample>& batch);

class Adam {
 public:
  explicit Adam(const Mlp& shape, double learning_rate = 1e-3, double beta1 = 0.9,
                double beta2 = 0.999, double epsilon = 1e-8);
  void step(Mlp& net, const Gradients& grads);
  long steps() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  Gradients m_, v_;
};

// Text format: `layer_dims d0 d1 ...` then, per layer, the weight rows followed
// by one bias line, every value with 17 significant digits.
void save_model(const Mlp& net, std::ostream& out);
Mlp load_model(std::istream& in);
void save_model_file(const Mlp& net, const std::string& path);
Mlp load_model_file(const std::string& path);

}  // namespace argseek
