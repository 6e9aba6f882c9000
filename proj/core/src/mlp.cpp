#include "scenfuzz/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "json.hpp"
#include "scenfuzz/errors.hpp"

namespace scenfuzz {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  double e = std::exp(z);
  return e / (1.0 + e);
}

// numerically stable BCE from the logit
double bce_from_logit(double z, double y) {
  return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
}

struct Adam {
  std::vector<double> m, v;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  long t = 0;

  explicit Adam(std::size_t n) : m(n, 0.0), v(n, 0.0) {}

  void update(std::vector<double>& theta, const std::vector<double>& grad, double lr) {
    ++t;
    double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
      v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
      theta[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
    }
  }
};

// Flattened parameter views keep one Adam state for the whole net.
struct PackedModel {
  Mlp* net;
  std::size_t n_params;

  explicit PackedModel(Mlp& m)
      : net(&m),
        n_params(m.w1.size() + m.b1.size() + m.w2.size() + 1) {}

  void gather(std::vector<double>& out) const {
    out.clear();
    out.reserve(n_params);
    out.insert(out.end(), net->w1.begin(), net->w1.end());
    out.insert(out.end(), net->b1.begin(), net->b1.end());
    out.insert(out.end(), net->w2.begin(), net->w2.end());
    out.push_back(net->b2);
  }
  void scatter(const std::vector<double>& in) {
    std::size_t k = 0;
    for (double& w : net->w1) w = in[k++];
    for (double& b : net->b1) b = in[k++];
    for (double& w : net->w2) w = in[k++];
    net->b2 = in[k++];
  }
};

Mlp train_impl(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
               const MlpTrainParams& params, std::uint64_t seed, Mlp::Output output) {
  if (x.empty()) throw SchemaError("cannot train a model on an empty dataset");
  const int input = static_cast<int>(x[0].size());
  const int hidden = params.hidden;
  const std::size_t n = x.size();

  Rng rng(seed);
  Mlp model(input, hidden, output, rng);

  std::vector<double> targets = y;
  if (output == Mlp::Output::Linear) {
    double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double var = 0.0;
    for (double v : y) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    double scale = std::sqrt(var);
    if (scale < 1e-12) scale = 1.0;
    model.y_offset = mean;
    model.y_scale = scale;
    for (double& t : targets) t = (t - mean) / scale;
  }

  PackedModel packed(model);
  std::vector<double> theta;
  packed.gather(theta);
  Adam adam(theta.size());

  std::vector<double> grad(theta.size());
  std::vector<double> h(hidden), zh(hidden);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  const int batch = std::max(1, params.batch_size);
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n; start += batch) {
      std::size_t end = std::min(n, start + batch);
      double inv = 1.0 / static_cast<double>(end - start);
      std::fill(grad.begin(), grad.end(), 0.0);

      for (std::size_t bi = start; bi < end; ++bi) {
        const std::vector<double>& xi = x[order[bi]];
        double ti = targets[order[bi]];
        // forward
        for (int j = 0; j < hidden; ++j) {
          double s = model.b1[j];
          const double* row = &model.w1[static_cast<std::size_t>(j) * input];
          for (int i = 0; i < input; ++i) s += row[i] * xi[i];
          zh[j] = s;
          h[j] = s > 0.0 ? s : 0.0;
        }
        double z2 = model.b2;
        for (int j = 0; j < hidden; ++j) z2 += model.w2[j] * h[j];

        // dL/dz2: sigmoid+BCE and linear+0.5*MSE share the same form
        double dz2 = (output == Mlp::Output::Sigmoid ? sigmoid(z2) : z2) - ti;
        dz2 *= inv;

        std::size_t off_w1 = 0;
        std::size_t off_b1 = model.w1.size();
        std::size_t off_w2 = off_b1 + model.b1.size();
        std::size_t off_b2 = off_w2 + model.w2.size();
        for (int j = 0; j < hidden; ++j) {
          grad[off_w2 + j] += dz2 * h[j];
          if (zh[j] > 0.0) {
            double dj = dz2 * model.w2[j];
            grad[off_b1 + j] += dj;
            double* grow = &grad[off_w1 + static_cast<std::size_t>(j) * input];
            for (int i = 0; i < input; ++i) grow[i] += dj * xi[i];
          }
        }
        grad[off_b2] += dz2;
      }
      adam.update(theta, grad, params.learning_rate);
      packed.scatter(theta);
    }
  }
  return model;
}

}  // namespace

Mlp::Mlp(int input_dim, int hidden_dim, Output output, Rng& rng)
    : input_(input_dim), hidden_(hidden_dim), output_(output) {
  w1.resize(static_cast<std::size_t>(hidden_) * input_);
  b1.assign(hidden_, 0.0);
  w2.resize(hidden_);
  double lim1 = std::sqrt(6.0 / (input_ + hidden_));
  double lim2 = std::sqrt(6.0 / (hidden_ + 1));
  std::uniform_real_distribution<double> u1(-lim1, lim1), u2(-lim2, lim2);
  for (double& w : w1) w = u1(rng);
  for (double& w : w2) w = u2(rng);
}

double Mlp::forward(const std::vector<double>& x) const {
  double z2 = b2;
  for (int j = 0; j < hidden_; ++j) {
    double s = b1[j];
    const double* row = &w1[static_cast<std::size_t>(j) * input_];
    for (int i = 0; i < input_; ++i) s += row[i] * x[i];
    if (s > 0.0) z2 += w2[j] * s;
  }
  if (output_ == Output::Sigmoid) return sigmoid(z2);
  return z2 * y_scale + y_offset;
}

std::vector<double> Mlp::grad_input(const std::vector<double>& x) const {
  std::vector<double> g(input_, 0.0);
  double z2 = b2;
  std::vector<double> zh(hidden_);
  for (int j = 0; j < hidden_; ++j) {
    double s = b1[j];
    const double* row = &w1[static_cast<std::size_t>(j) * input_];
    for (int i = 0; i < input_; ++i) s += row[i] * x[i];
    zh[j] = s;
    if (s > 0.0) z2 += w2[j] * s;
  }
  double scale;
  if (output_ == Output::Sigmoid) {
    double p = sigmoid(z2);
    scale = p * (1.0 - p);
  } else {
    scale = y_scale;
  }
  for (int j = 0; j < hidden_; ++j) {
    if (zh[j] <= 0.0) continue;
    double dj = scale * w2[j];
    const double* row = &w1[static_cast<std::size_t>(j) * input_];
    for (int i = 0; i < input_; ++i) g[i] += dj * row[i];
  }
  return g;
}

Mlp train_classifier(const std::vector<std::vector<double>>& x, const std::vector<int>& labels,
                     const MlpTrainParams& params, std::uint64_t seed) {
  std::vector<double> y(labels.size());
  std::transform(labels.begin(), labels.end(), y.begin(),
                 [](int l) { return l != 0 ? 1.0 : 0.0; });
  return train_impl(x, y, params, seed, Mlp::Output::Sigmoid);
}

Mlp train_regressor(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                    const MlpTrainParams& params, std::uint64_t seed) {
  return train_impl(x, y, params, seed, Mlp::Output::Linear);
}

double mean_loss(const Mlp& model, const std::vector<std::vector<double>>& x,
                 const std::vector<double>& y) {
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (model.output_kind() == Mlp::Output::Sigmoid) {
      double z2 = model.b2;
      for (int j = 0; j < model.hidden_dim(); ++j) {
        double s = model.b1[j];
        const double* row = &model.w1[static_cast<std::size_t>(j) * model.input_dim()];
        for (int k = 0; k < model.input_dim(); ++k) s += row[k] * x[i][k];
        if (s > 0.0) z2 += model.w2[j] * s;
      }
      total += bce_from_logit(z2, y[i]);
    } else {
      double d = model.forward(x[i]) - y[i];
      total += d * d;
    }
  }
  return x.empty() ? 0.0 : total / static_cast<double>(x.size());
}

void save_model(const Mlp& model, const std::string& path) {
  nlohmann::ordered_json doc;
  doc["output"] = model.output_kind() == Mlp::Output::Sigmoid ? "sigmoid" : "linear";
  doc["input_dim"] = model.input_dim();
  doc["hidden_dim"] = model.hidden_dim();
  doc["w1"] = model.w1;
  doc["b1"] = model.b1;
  doc["w2"] = model.w2;
  doc["b2"] = model.b2;
  doc["y_offset"] = model.y_offset;
  doc["y_scale"] = model.y_scale;
  std::ofstream out(path);
  if (!out) throw IoError("cannot write model checkpoint '" + path + "'");
  out << doc.dump(2) << "\n";
}

Mlp load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read model checkpoint '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError("corrupt model checkpoint '" + path + "': " + e.what());
  }
  Mlp model;
  model.output_ = doc.at("output").get<std::string>() == "sigmoid" ? Mlp::Output::Sigmoid
                                                                   : Mlp::Output::Linear;
  model.input_ = doc.at("input_dim").get<int>();
  model.hidden_ = doc.at("hidden_dim").get<int>();
  model.w1 = doc.at("w1").get<std::vector<double>>();
  model.b1 = doc.at("b1").get<std::vector<double>>();
  model.w2 = doc.at("w2").get<std::vector<double>>();
  model.b2 = doc.at("b2").get<double>();
  model.y_offset = doc.at("y_offset").get<double>();
  model.y_scale = doc.at("y_scale").get<double>();
  if (model.w1.size() != static_cast<std::size_t>(model.input_) * model.hidden_ ||
      model.b1.size() != static_cast<std::size_t>(model.hidden_) ||
      model.w2.size() != static_cast<std::size_t>(model.hidden_)) {
    throw IoError("model checkpoint '" + path + "' has inconsistent shapes");
  }
  return model;
}

}  // namespace scenfuzz
