#ifndef ROCCG_EMBED_EMBED_HPP_
#define ROCCG_EMBED_EMBED_HPP_

#include <span>
#include <string>
#include <vector>

#include "milp/model.hpp"
#include "neural/network.hpp"

namespace roccg::embed {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Pre-activation bounds of every neuron for a given input box.
struct BoundBox {
  std::vector<Interval> input;
  std::vector<std::vector<Interval>> pre;  // one vector per layer
};

// Interval arithmetic; throws InputError on a non-finite or inverted box.
BoundBox PropagateBounds(const neural::Layers& layers,
                         std::span<const Interval> box);
// Post-activation interval of the last layer.
std::vector<Interval> OutputBounds(const neural::Layers& layers,
                                   const BoundBox& bounds);

// Range of an affine expression over the model's variable bounds.
Interval ExprRange(const milp::MilpModel& model, const milp::LinExpr& expr);

struct EmbeddedNet {
  std::vector<int> outputs;         // one variable per output neuron
  std::vector<Interval> output_bounds;
  std::vector<int> relu_binaries;   // one per unstable ReLU neuron
  int stable_inactive = 0;
  int stable_active = 0;
};

// Big-M encoding of a ReLU network whose inputs are affine expressions over
// existing model variables. Unstable neurons get h >= a, h <= a - L(1 - d),
// h <= U d, 0 <= h <= U; neurons with U <= 0 are the constant 0 and neurons
// with L >= 0 pass through without a binary. With `relax`, the activation
// indicators are continuous in [0, 1]. Throws InputError when `bounds` does
// not cover the inputs' ranges in `model` or does not match the layers.
EmbeddedNet EmbedMlp(milp::MilpModel& model, const neural::Layers& layers,
                     std::span<const milp::LinExpr> inputs,
                     const BoundBox& bounds, const std::string& prefix,
                     bool relax = false);

struct ArgmaxGadget {
  std::vector<int> z;     // selector per scenario
  int u = -1;             // max envelope
  std::vector<int> xi_a;  // selected scenario, one variable per component
};

// u >= p_i, u <= p_i + (M - L)(1 - z_i), sum z = 1, xi_a = sum z_i xi_i.
// Requires L <= p_i <= M for every feasible point.
ArgmaxGadget EmbedArgmax(milp::MilpModel& model,
                         std::span<const milp::LinExpr> predictions,
                         const std::vector<std::vector<double>>& scenarios,
                         double lower, double upper, const std::string& prefix);

// Raw per-element features given as affine expressions of model variables.
struct FeatureExprs {
  int rows = 0;
  int cols = 0;
  std::vector<milp::LinExpr> expr;  // row-major
  const milp::LinExpr& at(int r, int c) const { return expr[static_cast<size_t>(r) * cols + c]; }
};

struct EmbeddedEncoder {
  std::vector<milp::LinExpr> embedding;  // one expression per output
  std::vector<Interval> bounds;
  std::vector<int> binaries;
};

// Embeds a set encoder (feature scaling included) on symbolic features.
EmbeddedEncoder EmbedEncoder(milp::MilpModel& model,
                             const neural::SetEncoder& encoder,
                             const neural::MinMaxScaler& scaler,
                             const FeatureExprs& features,
                             const std::string& prefix, bool relax = false);

// Embeds the x encoder for a binary first-stage vector by tabulation: with
// every other feature fixed, element i contributes out_i(0) + x_i (out_i(1) -
// out_i(0)), which is exact for x_i in {0, 1} and needs no binaries before the
// post-aggregation network. `features_at_zero` / `features_at_one` are the
// raw x features with x_i = 0 / 1 in every row.
EmbeddedEncoder EmbedBinaryXEncoder(milp::MilpModel& model,
                                    const neural::ValueModel& value_model,
                                    std::span<const int> x_vars,
                                    const neural::Matrix& features_at_zero,
                                    const neural::Matrix& features_at_one,
                                    const std::string& prefix);

// Constant embedding as degenerate expressions.
EmbeddedEncoder ConstantEncoder(std::span<const double> embedding);

struct EmbeddedValue {
  int output = -1;  // scaled prediction variable
  Interval bounds;
  std::vector<int> binaries;
};

// The value network on top of two (possibly constant) embeddings. The MP
// calls this with a symbolic x embedding and a precomputed scenario
// embedding; the AP the other way round.
EmbeddedValue EmbedValueNetwork(milp::MilpModel& model,
                                const neural::ValueModel& value_model,
                                const EmbeddedEncoder& x_embedding,
                                const EmbeddedEncoder& xi_embedding,
                                const std::string& prefix, bool relax = false);

}  // namespace roccg::embed

#endif  // ROCCG_EMBED_EMBED_HPP_
