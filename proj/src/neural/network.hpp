#ifndef ROCCG_NEURAL_NETWORK_HPP_
#define ROCCG_NEURAL_NETWORK_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace roccg::neural {

// Row-major dense matrix; used for per-element feature sets (one row per
// element).
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<size_t>(r) * c, fill) {}

  double& operator()(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  double operator()(int r, int c) const {
    return data[static_cast<size_t>(r) * cols + c];
  }
  std::span<const double> row(int r) const {
    return {data.data() + static_cast<size_t>(r) * cols, static_cast<size_t>(cols)};
  }
  std::span<double> row(int r) {
    return {data.data() + static_cast<size_t>(r) * cols, static_cast<size_t>(cols)};
  }
  bool operator==(const Matrix&) const = default;
};

enum class Activation { kRelu, kIdentity };

std::string_view ToString(Activation a);
Activation ParseActivation(std::string_view s);

struct DenseLayer {
  int in = 0;
  int out = 0;
  std::vector<double> weights;  // out x in, row-major
  std::vector<double> bias;
  Activation activation = Activation::kRelu;

  double weight(int o, int i) const { return weights[static_cast<size_t>(o) * in + i]; }
  // Throws InputError on inconsistent shapes or non-finite entries.
  void Validate() const;
};

using Layers = std::vector<DenseLayer>;

int InputWidth(const Layers& layers);
int OutputWidth(const Layers& layers);

// Pre-activation of one layer: W x + b.
void LayerPreActivation(const DenseLayer& layer, std::span<const double> x,
                        std::span<double> pre);
std::vector<double> Forward(const Layers& layers, std::span<const double> x);

// Deep-sets encoder: post(sum_i element(row_i)).
struct SetEncoder {
  Layers element;
  Layers post;

  int input_width() const { return InputWidth(element); }
  int output_width() const { return OutputWidth(post); }
};

// Sum of the per-element network outputs.
std::vector<double> AggregateElements(const SetEncoder& encoder,
                                      const Matrix& elements);
std::vector<double> EncodeSet(const SetEncoder& encoder, const Matrix& elements);

// Per-column min-max scaler; columns that are constant on the fitting data
// map to 0.
struct MinMaxScaler {
  std::vector<double> lo;
  std::vector<double> hi;

  bool fitted() const { return !lo.empty(); }
  int width() const { return static_cast<int>(lo.size()); }
  double Scale(int col, double v) const {
    const double range = hi[col] - lo[col];
    return range > 0.0 ? (v - lo[col]) / range : 0.0;
  }
  // Coefficients (a, b) with Scale(col, v) = a * v + b.
  std::pair<double, double> Affine(int col) const;
  Matrix Transform(const Matrix& raw) const;
};

struct LabelScaler {
  double lo = 0.0;
  double hi = 1.0;
  bool fitted = false;

  double range() const { return hi > lo ? hi - lo : 1.0; }
  double Scale(double v) const { return (v - lo) / range(); }
  double Unscale(double s) const { return lo + s * range(); }
};

enum class TargetMode { kSum, kSecondOnly };

std::string_view ToString(TargetMode m);
TargetMode ParseTargetMode(std::string_view s);

// Hidden/output widths of each sub-network. The value network always ends in
// a single identity output.
struct Architecture {
  std::vector<int> element_x;
  std::vector<int> post_x;
  std::vector<int> element_xi;
  std::vector<int> post_xi;
  std::vector<int> value_hidden;
};

// "desk" halves every width of the "paper" profile.
Architecture DefaultArchitecture(std::string_view family, std::string_view profile);

struct ValueModel {
  std::string family;
  TargetMode target_mode = TargetMode::kSum;
  SetEncoder x_encoder;
  SetEncoder xi_encoder;
  Layers value;
  MinMaxScaler x_scaler;
  MinMaxScaler xi_scaler;
  LabelScaler label_scaler;

  // Every sub-network has ReLU hidden layers and an identity output layer.
  // Weights and biases are uniform in +-1/sqrt(fan_in).
  static ValueModel Create(const Architecture& arch, int x_width, int xi_width,
                           std::string family, TargetMode mode,
                           std::uint64_t seed);

  int x_feature_width() const { return x_encoder.input_width(); }
  int xi_feature_width() const { return xi_encoder.input_width(); }
  bool ready() const {
    return x_scaler.fitted() && xi_scaler.fitted() && label_scaler.fitted;
  }
  // Throws UsageError when scalers are missing, InputError on width mismatch.
  void CheckReady() const;
  void Validate() const;

  // Raw features in, embeddings out (scaling applied internally).
  std::vector<double> EmbedX(const Matrix& x_features) const;
  std::vector<double> EmbedXi(const Matrix& xi_features) const;
  // Value network output in scaled label space.
  double ValueFromEmbeddings(std::span<const double> ex,
                             std::span<const double> exi) const;

  double PredictScaled(const Matrix& x_features, const Matrix& xi_features) const;
  double Predict(const Matrix& x_features, const Matrix& xi_features) const {
    return label_scaler.Unscale(PredictScaled(x_features, xi_features));
  }
};

struct LabeledSample {
  std::string instance_id;
  Matrix features_x;
  Matrix features_xi;
  double label = 0.0;
};

struct Scalers {
  MinMaxScaler x;
  MinMaxScaler xi;
  LabelScaler label;
};

// Throws UsageError on an empty sample list.
Scalers FitScalers(std::span<const LabeledSample> samples);

}  // namespace roccg::neural

#endif  // ROCCG_NEURAL_NETWORK_HPP_
