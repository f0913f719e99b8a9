#ifndef ROCCG_NEURAL_TRAINER_HPP_
#define ROCCG_NEURAL_TRAINER_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "neural/network.hpp"

namespace roccg::neural {

struct TrainConfig {
  int epochs = 500;
  int batch_size = 256;
  double learning_rate = 1e-3;
  int validation_interval = 10;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;

  void Validate() const;
};

struct CurvePoint {
  int epoch = 0;
  double train_mse = 0.0;  // scaled label space, running mean over the epoch
  double train_mae = 0.0;  // unscaled
  double val_mae = 0.0;    // unscaled
};

struct TrainResult {
  ValueModel model;  // snapshot with the lowest validation MAE
  std::vector<CurvePoint> curve;
  int best_epoch = 0;
  double best_val_mae = 0.0;
};

using TrainProgress = std::function<void(const CurvePoint&)>;

// Fits the scalers on `train`, then runs minibatch Adam on the mean squared
// error in scaled label space. Validation MAE is measured every
// `validation_interval` epochs (on the training set when `validation` is
// empty). Throws Error(kInternal) if the loss becomes non-finite.
TrainResult TrainValueModel(ValueModel initial,
                            std::span<const LabeledSample> train,
                            std::span<const LabeledSample> validation,
                            const TrainConfig& config,
                            const TrainProgress& progress = {});

// Mean absolute error in unscaled label units.
double MeanAbsoluteError(const ValueModel& model,
                         std::span<const LabeledSample> samples);

// Squared error of one sample in scaled label space and its gradient with
// respect to every parameter, in the order of ParameterTensors().
double LossAndGradient(const ValueModel& model, const LabeledSample& sample,
                       std::vector<std::vector<double>>* gradient);

// Weight and bias vectors of every layer: x element, x post, xi element,
// xi post, value.
std::vector<std::vector<double>*> ParameterTensors(ValueModel& model);

struct GradCheckResult {
  double max_rel_error = 0.0;
  int checked = 0;
  // Parameters whose perturbation flips a ReLU and is therefore outside the
  // differentiable region.
  int skipped = 0;
  // Some ReLU pre-activation is exactly zero: a subgradient point, excluded.
  bool at_kink = false;
};

// Central finite differences against the analytic gradient. Relative error
// is |a - f| / max(|a|, |f|, 1e-6). `step` must lie in [1e-7, 1e-3].
GradCheckResult GradCheck(const ValueModel& model, const LabeledSample& sample,
                          double step);

}  // namespace roccg::neural

#endif  // ROCCG_NEURAL_TRAINER_HPP_
