#include "argseek/mlp.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "argseek/error.hpp"
#include "argseek/text.hpp"

namespace argseek {

namespace {

void check_dims(const std::vector<int>& dims) {
  if (dims.size() < 2) throw ValidationError("a network needs at least input and output layers");
  for (int d : dims)
    if (d < 1) throw ValidationError("layer dimensions must be positive");
}

bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

}  // namespace

Mlp Mlp::zeros(std::vector<int> layer_dims) {
  check_dims(layer_dims);
  Mlp net;
  net.layer_dims = std::move(layer_dims);
  for (std::size_t l = 0; l + 1 < net.layer_dims.size(); ++l) {
    net.weights.push_back(Eigen::MatrixXd::Zero(net.layer_dims[l + 1], net.layer_dims[l]));
    net.biases.push_back(Eigen::VectorXd::Zero(net.layer_dims[l + 1]));
  }
  return net;
}

Mlp Mlp::init(std::vector<int> layer_dims, Rng& rng) {
  Mlp net = zeros(std::move(layer_dims));
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    double bound = 1.0 / std::sqrt(static_cast<double>(net.layer_dims[l]));
    std::uniform_real_distribution<double> dist(-bound, bound);
    auto& w = net.weights[l];
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = dist(rng);
    for (Eigen::Index i = 0; i < net.biases[l].size(); ++i) net.biases[l](i) = dist(rng);
  }
  return net;
}

void Mlp::validate() const {
  check_dims(layer_dims);
  if (weights.size() + 1 != layer_dims.size() || biases.size() != weights.size())
    throw ValidationError("layer count does not match layer_dims");
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].rows() != layer_dims[l + 1] || weights[l].cols() != layer_dims[l] ||
        biases[l].size() != layer_dims[l + 1])
      throw ValidationError("parameter shape does not match layer_dims at layer " +
                            std::to_string(l));
    if (!all_finite(weights[l]) || !biases[l].allFinite())
      throw ValidationError("non-finite parameter at layer " + std::to_string(l));
  }
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x) const {
  if (x.size() != input_dim())
    throw ContractError("input has " + std::to_string(x.size()) + " features, network expects " +
                        std::to_string(input_dim()));
  Eigen::VectorXd h = x;
  for (std::size_t l = 0; l < num_layers(); ++l) {
    Eigen::VectorXd z = weights[l] * h + biases[l];
    h = l + 1 < num_layers() ? Eigen::VectorXd(z.array().tanh()) : z;
  }
  return h;
}

Eigen::VectorXd Mlp::forward(const std::vector<double>& x) const {
  return forward(Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size())));
}

Eigen::MatrixXd Mlp::forward_batch(const Eigen::MatrixXd& x) const {
  if (x.rows() != input_dim()) throw ContractError("batch feature dimension mismatch");
  Eigen::MatrixXd h = x;
  for (std::size_t l = 0; l < num_layers(); ++l) {
    Eigen::MatrixXd z = (weights[l] * h).colwise() + biases[l];
    h = l + 1 < num_layers() ? Eigen::MatrixXd(z.array().tanh()) : z;
  }
  return h;
}

Gradients mlp_gradients(const Mlp& net, const std::vector<Sample>& batch) {
  if (batch.empty()) throw ContractError("gradient batch is empty");
  const auto n = static_cast<Eigen::Index>(batch.size());
  Eigen::MatrixXd x(net.input_dim(), n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& s = batch[static_cast<std::size_t>(k)];
    if (static_cast<int>(s.x.size()) != net.input_dim())
      throw ContractError("sample feature dimension mismatch");
    if (s.action >= static_cast<std::size_t>(net.output_dim()))
      throw ContractError("sample action out of range");
    if (!std::isfinite(s.target)) throw ValidationError("non-finite regression target");
    x.col(k) = Eigen::Map<const Eigen::VectorXd>(s.x.data(), net.input_dim());
  }

  const std::size_t layers = net.num_layers();
  std::vector<Eigen::MatrixXd> acts{x};
  for (std::size_t l = 0; l < layers; ++l) {
    Eigen::MatrixXd z = (net.weights[l] * acts.back()).colwise() + net.biases[l];
    acts.push_back(l + 1 < layers ? Eigen::MatrixXd(z.array().tanh()) : z);
  }

  Gradients g;
  g.weights.resize(layers);
  g.biases.resize(layers);
  Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(net.output_dim(), n);
  double loss = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& s = batch[static_cast<std::size_t>(k)];
    double err = acts.back()(static_cast<Eigen::Index>(s.action), k) - s.target;
    loss += err * err;
    delta(static_cast<Eigen::Index>(s.action), k) = 2.0 * err / static_cast<double>(n);
  }
  g.loss = loss / static_cast<double>(n);
  if (!std::isfinite(g.loss)) throw ValidationError("non-finite loss");

  for (std::size_t l = layers; l-- > 0;) {
    g.weights[l] = delta * acts[l].transpose();
    g.biases[l] = delta.rowwise().sum();
    if (l > 0) {
      Eigen::MatrixXd back = net.weights[l].transpose() * delta;
      delta = back.array() * (1.0 - acts[l].array().square());
    }
  }
  return g;
}

Adam::Adam(const Mlp& shape, double learning_rate, double beta1, double beta2, double epsilon)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {
  if (!(learning_rate > 0.0)) throw ValidationError("learning rate must be positive");
  for (std::size_t l = 0; l < shape.num_layers(); ++l) {
    m_.weights.push_back(Eigen::MatrixXd::Zero(shape.weights[l].rows(), shape.weights[l].cols()));
    m_.biases.push_back(Eigen::VectorXd::Zero(shape.biases[l].size()));
  }
  v_ = m_;
}

void Adam::step(Mlp& net, const Gradients& grads) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
    m = beta1_ * m + (1.0 - beta1_) * grad;
    v = beta2_ * v + (1.0 - beta2_) * grad.cwiseProduct(grad);
    param.array() -= lr_ * (m.array() / c1) / ((v.array() / c2).sqrt() + eps_);
  };
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    update(net.weights[l], grads.weights[l], m_.weights[l], v_.weights[l]);
    update(net.biases[l], grads.biases[l], m_.biases[l], v_.biases[l]);
  }
}

void save_model(const Mlp& net, std::ostream& out) {
  net.validate();
  out << "layer_dims";
  for (int d : net.layer_dims) out << ' ' << d;
  out << '\n';
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const auto& w = net.weights[l];
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) out << (j ? " " : "") << text::exact17(w(i, j));
      out << '\n';
    }
    const auto& b = net.biases[l];
    for (Eigen::Index i = 0; i < b.size(); ++i) out << (i ? " " : "") << text::exact17(b(i));
    out << '\n';
  }
}

Mlp load_model(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  auto next_line = [&]() -> std::string_view {
    if (!std::getline(in, line)) throw ParseError("model file ends early after line " +
                                                  std::to_string(lineno));
    ++lineno;
    return text::trim(line);
  };
  auto header = next_line();
  auto fields = text::split(header, ' ');
  if (fields.empty() || fields[0] != "layer_dims") throw ParseError("model file: missing layer_dims header");
  std::vector<int> dims;
  for (std::size_t i = 1; i < fields.size(); ++i) {
    if (fields[i].empty()) continue;
    auto v = text::parse_int(fields[i]);
    if (!v || *v < 1) throw ParseError("model file: bad layer dimension '" + std::string(fields[i]) + "'");
    dims.push_back(static_cast<int>(*v));
  }
  Mlp net = Mlp::zeros(dims);
  auto read_row = [&](auto&& row, Eigen::Index cols) {
    auto parts = text::split(next_line(), ' ');
    if (static_cast<Eigen::Index>(parts.size()) != cols)
      throw ParseError("model file line " + std::to_string(lineno) + ": expected " +
                       std::to_string(cols) + " values");
    for (Eigen::Index j = 0; j < cols; ++j) {
      auto v = text::parse_double(parts[static_cast<std::size_t>(j)]);
      if (!v) throw ParseError("model file line " + std::to_string(lineno) + ": bad number");
      row(j) = *v;
    }
  };
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    auto& w = net.weights[l];
    for (Eigen::Index i = 0; i < w.rows(); ++i) read_row(w.row(i), w.cols());
    read_row(net.biases[l], net.biases[l].size());
  }
  net.validate();
  return net;
}

void save_model_file(const Mlp& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write model file " + path);
  save_model(net, out);
  if (!out) throw IoError("failed writing model file " + path);
}

Mlp load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file " + path);
  return load_model(in);
}

}  // namespace argseek
