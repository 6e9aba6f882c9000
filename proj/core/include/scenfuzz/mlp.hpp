#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scenfuzz/rng.hpp"

namespace scenfuzz {

/// Single-hidden-layer perceptron with ReLU units and a scalar output head.
/// Sigmoid head for violation classifiers, linear head (with internal target
/// standardization) for objective regressors.
class Mlp {
 public:
  enum class Output { Sigmoid, Linear };

  Mlp() = default;
  Mlp(int input_dim, int hidden_dim, Output output, Rng& rng);

  double forward(const std::vector<double>& x) const;
  /// d forward / d x via backpropagation.
  std::vector<double> grad_input(const std::vector<double>& x) const;

  int input_dim() const { return input_; }
  int hidden_dim() const { return hidden_; }
  Output output_kind() const { return output_; }

  // parameters, exposed for checkpointing
  std::vector<double> w1;  // hidden x input, row-major
  std::vector<double> b1;  // hidden
  std::vector<double> w2;  // hidden
  double b2 = 0.0;
  double y_offset = 0.0;  // linear head: prediction = z * y_scale + y_offset
  double y_scale = 1.0;

  int input_ = 0;
  int hidden_ = 0;
  Output output_ = Output::Sigmoid;
};

struct MlpTrainParams {
  int hidden = 150;
  int epochs = 30;
  int batch_size = 200;
  double learning_rate = 1e-3;
};

/// Binary cross-entropy training with Adam; labels in {0,1}. Deterministic
/// for a fixed seed (bitwise identical weights).
Mlp train_classifier(const std::vector<std::vector<double>>& x, const std::vector<int>& labels,
                     const MlpTrainParams& params, std::uint64_t seed);

/// Mean-squared-error training with Adam on standardized targets.
Mlp train_regressor(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                    const MlpTrainParams& params, std::uint64_t seed);

/// Mean loss over a dataset: BCE for sigmoid heads, MSE for linear heads.
double mean_loss(const Mlp& model, const std::vector<std::vector<double>>& x,
                 const std::vector<double>& y);

/// JSON checkpoint round-trip.
void save_model(const Mlp& model, const std::string& path);
Mlp load_model(const std::string& path);

}  // namespace scenfuzz
