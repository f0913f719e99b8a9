#include "neural/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "common/error.hpp"
#include "common/random.hpp"

namespace roccg::neural {

std::string_view ToString(Activation a) {
  return a == Activation::kRelu ? "relu" : "identity";
}

Activation ParseActivation(std::string_view s) {
  if (s == "relu") return Activation::kRelu;
  if (s == "identity") return Activation::kIdentity;
  throw InputError("unknown activation '" + std::string(s) + "'");
}

std::string_view ToString(TargetMode m) {
  return m == TargetMode::kSum ? "sum" : "second-only";
}

TargetMode ParseTargetMode(std::string_view s) {
  if (s == "sum") return TargetMode::kSum;
  if (s == "second-only") return TargetMode::kSecondOnly;
  throw InputError("unknown target mode '" + std::string(s) + "'");
}

void DenseLayer::Validate() const {
  if (in <= 0 || out <= 0) throw InputError("layer with empty shape");
  if (weights.size() != static_cast<size_t>(in) * out ||
      bias.size() != static_cast<size_t>(out)) {
    throw InputError("layer shape " + std::to_string(out) + "x" +
                     std::to_string(in) + " does not match its parameters");
  }
  for (double w : weights) {
    if (!std::isfinite(w)) throw InputError("non-finite layer weight");
  }
  for (double b : bias) {
    if (!std::isfinite(b)) throw InputError("non-finite layer bias");
  }
}

int InputWidth(const Layers& layers) {
  return layers.empty() ? 0 : layers.front().in;
}

int OutputWidth(const Layers& layers) {
  return layers.empty() ? 0 : layers.back().out;
}

void LayerPreActivation(const DenseLayer& layer, std::span<const double> x,
                        std::span<double> pre) {
  const double* w = layer.weights.data();
  for (int o = 0; o < layer.out; ++o) {
    double s = layer.bias[o];
    const double* row = w + static_cast<size_t>(o) * layer.in;
    for (int i = 0; i < layer.in; ++i) s += row[i] * x[i];
    pre[o] = s;
  }
}

std::vector<double> Forward(const Layers& layers, std::span<const double> x) {
  std::vector<double> cur(x.begin(), x.end());
  std::vector<double> next;
  for (const DenseLayer& layer : layers) {
    if (static_cast<int>(cur.size()) != layer.in) {
      throw InputError("input width " + std::to_string(cur.size()) +
                       " does not match layer width " + std::to_string(layer.in));
    }
    next.assign(layer.out, 0.0);
    LayerPreActivation(layer, cur, next);
    if (layer.activation == Activation::kRelu) {
      for (double& v : next) v = std::max(v, 0.0);
    }
    cur.swap(next);
  }
  return cur;
}

std::vector<double> AggregateElements(const SetEncoder& encoder,
                                      const Matrix& elements) {
  if (elements.rows == 0) throw InputError("empty element set");
  if (elements.cols != encoder.input_width()) {
    throw InputError("element feature width " + std::to_string(elements.cols) +
                     " does not match encoder width " +
                     std::to_string(encoder.input_width()));
  }
  std::vector<double> sum(OutputWidth(encoder.element), 0.0);
  for (int r = 0; r < elements.rows; ++r) {
    std::vector<double> h = Forward(encoder.element, elements.row(r));
    for (size_t k = 0; k < sum.size(); ++k) sum[k] += h[k];
  }
  return sum;
}

std::vector<double> EncodeSet(const SetEncoder& encoder, const Matrix& elements) {
  std::vector<double> agg = AggregateElements(encoder, elements);
  return Forward(encoder.post, agg);
}

std::pair<double, double> MinMaxScaler::Affine(int col) const {
  const double range = hi[col] - lo[col];
  if (!(range > 0.0)) return {0.0, 0.0};
  return {1.0 / range, -lo[col] / range};
}

Matrix MinMaxScaler::Transform(const Matrix& raw) const {
  if (raw.cols != width()) {
    throw InputError("feature width " + std::to_string(raw.cols) +
                     " does not match scaler width " + std::to_string(width()));
  }
  Matrix out(raw.rows, raw.cols);
  for (int r = 0; r < raw.rows; ++r) {
    for (int c = 0; c < raw.cols; ++c) out(r, c) = Scale(c, raw(r, c));
  }
  return out;
}

Architecture DefaultArchitecture(std::string_view family, std::string_view profile) {
  Architecture a;
  if (family == "knapsack") {
    a = {{32, 16}, {64, 8}, {32, 16}, {64, 8}, {8}};
  } else if (family == "capital_budgeting") {
    a = {{16, 4}, {32, 8}, {16, 4}, {32, 8}, {8}};
  } else {
    throw UsageError("unknown problem family '" + std::string(family) + "'");
  }
  if (profile == "paper") return a;
  if (profile != "desk") {
    throw UsageError("unknown architecture profile '" + std::string(profile) + "'");
  }
  for (auto* dims : {&a.element_x, &a.post_x, &a.element_xi, &a.post_xi,
                     &a.value_hidden}) {
    for (int& d : *dims) d = std::max(1, d / 2);
  }
  return a;
}

namespace {

Layers MakeLayers(int in, const std::vector<int>& widths, bool identity_output,
                  Rng& rng) {
  Layers layers;
  for (size_t l = 0; l < widths.size(); ++l) {
    DenseLayer layer;
    layer.in = in;
    layer.out = widths[l];
    const bool last = l + 1 == widths.size();
    layer.activation =
        (last && identity_output) ? Activation::kIdentity : Activation::kRelu;
    const double a = 1.0 / std::sqrt(static_cast<double>(in));
    layer.weights.resize(static_cast<size_t>(layer.in) * layer.out);
    for (double& w : layer.weights) w = rng.Uniform(-a, a);
    layer.bias.resize(layer.out);
    for (double& b : layer.bias) b = rng.Uniform(-a, a);
    layers.push_back(std::move(layer));
    in = widths[l];
  }
  return layers;
}

void CheckChain(const Layers& layers, int in, const char* what) {
  if (layers.empty()) throw InputError(std::string(what) + " has no layers");
  for (const DenseLayer& layer : layers) {
    layer.Validate();
    if (layer.in != in) {
      throw InputError(std::string(what) + " layer widths do not chain");
    }
    in = layer.out;
  }
}

}  // namespace

ValueModel ValueModel::Create(const Architecture& arch, int x_width, int xi_width,
                              std::string family, TargetMode mode,
                              std::uint64_t seed) {
  if (x_width <= 0 || xi_width <= 0 || arch.element_x.empty() ||
      arch.post_x.empty() || arch.element_xi.empty() || arch.post_xi.empty()) {
    throw UsageError("architecture needs nonempty element and post networks");
  }
  Rng rng(seed);
  ValueModel m;
  m.family = std::move(family);
  m.target_mode = mode;
  m.x_encoder.element = MakeLayers(x_width, arch.element_x, true, rng);
  m.x_encoder.post = MakeLayers(arch.element_x.back(), arch.post_x, true, rng);
  m.xi_encoder.element = MakeLayers(xi_width, arch.element_xi, true, rng);
  m.xi_encoder.post = MakeLayers(arch.element_xi.back(), arch.post_xi, true, rng);
  std::vector<int> value_widths = arch.value_hidden;
  value_widths.push_back(1);
  m.value = MakeLayers(arch.post_x.back() + arch.post_xi.back(), value_widths,
                       true, rng);
  return m;
}

void ValueModel::Validate() const {
  CheckChain(x_encoder.element, x_encoder.input_width(), "x element network");
  CheckChain(x_encoder.post, OutputWidth(x_encoder.element), "x post network");
  CheckChain(xi_encoder.element, xi_encoder.input_width(), "xi element network");
  CheckChain(xi_encoder.post, OutputWidth(xi_encoder.element), "xi post network");
  CheckChain(value, x_encoder.output_width() + xi_encoder.output_width(),
             "value network");
  if (OutputWidth(value) != 1) throw InputError("value network must have one output");
  if (x_scaler.fitted() && x_scaler.width() != x_feature_width()) {
    throw InputError("x scaler width does not match the x element network");
  }
  if (xi_scaler.fitted() && xi_scaler.width() != xi_feature_width()) {
    throw InputError("xi scaler width does not match the xi element network");
  }
}

void ValueModel::CheckReady() const {
  if (!ready()) throw UsageError("value model scalers are not fitted");
}

std::vector<double> ValueModel::EmbedX(const Matrix& x_features) const {
  CheckReady();
  return EncodeSet(x_encoder, x_scaler.Transform(x_features));
}

std::vector<double> ValueModel::EmbedXi(const Matrix& xi_features) const {
  CheckReady();
  return EncodeSet(xi_encoder, xi_scaler.Transform(xi_features));
}

double ValueModel::ValueFromEmbeddings(std::span<const double> ex,
                                       std::span<const double> exi) const {
  std::vector<double> cat(ex.begin(), ex.end());
  cat.insert(cat.end(), exi.begin(), exi.end());
  return Forward(value, cat)[0];
}

double ValueModel::PredictScaled(const Matrix& x_features,
                                 const Matrix& xi_features) const {
  return ValueFromEmbeddings(EmbedX(x_features), EmbedXi(xi_features));
}

namespace {

MinMaxScaler FitColumns(std::span<const LabeledSample> samples, bool use_x) {
  const Matrix& first = use_x ? samples[0].features_x : samples[0].features_xi;
  MinMaxScaler s;
  s.lo.assign(first.cols, std::numeric_limits<double>::infinity());
  s.hi.assign(first.cols, -std::numeric_limits<double>::infinity());
  for (const LabeledSample& sample : samples) {
    const Matrix& m = use_x ? sample.features_x : sample.features_xi;
    if (m.cols != first.cols) throw InputError("inconsistent feature widths");
    for (int r = 0; r < m.rows; ++r) {
      for (int c = 0; c < m.cols; ++c) {
        s.lo[c] = std::min(s.lo[c], m(r, c));
        s.hi[c] = std::max(s.hi[c], m(r, c));
      }
    }
  }
  for (int c = 0; c < first.cols; ++c) {
    if (!std::isfinite(s.lo[c])) s.lo[c] = s.hi[c] = 0.0;
  }
  return s;
}

}  // namespace

Scalers FitScalers(std::span<const LabeledSample> samples) {
  if (samples.empty()) throw UsageError("cannot fit scalers on zero samples");
  Scalers s;
  s.x = FitColumns(samples, true);
  s.xi = FitColumns(samples, false);
  s.label.lo = s.label.hi = samples[0].label;
  for (const LabeledSample& sample : samples) {
    s.label.lo = std::min(s.label.lo, sample.label);
    s.label.hi = std::max(s.label.hi, sample.label);
  }
  s.label.fitted = true;
  return s;
}

}  // namespace roccg::neural
