#include "neural/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "common/error.hpp"
#include "common/random.hpp"

namespace roccg::neural {

void TrainConfig::Validate() const {
  if (epochs <= 0) throw UsageError("epochs must be positive");
  if (batch_size <= 0) throw UsageError("batch size must be positive");
  if (!(learning_rate > 0.0)) throw UsageError("learning rate must be positive");
  if (validation_interval <= 0) {
    throw UsageError("validation interval must be positive");
  }
}

std::vector<std::vector<double>*> ParameterTensors(ValueModel& model) {
  std::vector<std::vector<double>*> out;
  for (Layers* layers : {&model.x_encoder.element, &model.x_encoder.post,
                         &model.xi_encoder.element, &model.xi_encoder.post,
                         &model.value}) {
    for (DenseLayer& layer : *layers) {
      out.push_back(&layer.weights);
      out.push_back(&layer.bias);
    }
  }
  return out;
}

namespace {

using Grads = std::vector<std::vector<double>>;

// act[0] is the layer-chain input, act[l + 1] the output of layer l.
struct Trace {
  std::vector<std::vector<double>> act;
  std::vector<std::vector<double>> pre;
};

void ForwardTrace(const Layers& layers, std::span<const double> in, Trace* t) {
  t->act.resize(layers.size() + 1);
  t->pre.resize(layers.size());
  t->act[0].assign(in.begin(), in.end());
  for (size_t l = 0; l < layers.size(); ++l) {
    const DenseLayer& layer = layers[l];
    t->pre[l].resize(layer.out);
    LayerPreActivation(layer, t->act[l], t->pre[l]);
    t->act[l + 1] = t->pre[l];
    if (layer.activation == Activation::kRelu) {
      for (double& v : t->act[l + 1]) v = std::max(v, 0.0);
    }
  }
}

// Adds parameter gradients into grads[first + 2l] (weights) and
// grads[first + 2l + 1] (bias); writes the input gradient when `din` is set.
void BackwardTrace(const Layers& layers, const Trace& t,
                   std::span<const double> dout, Grads& grads, int first,
                   std::vector<double>* din) {
  std::vector<double> g(dout.begin(), dout.end());
  std::vector<double> next;
  for (int l = static_cast<int>(layers.size()) - 1; l >= 0; --l) {
    const DenseLayer& layer = layers[l];
    if (layer.activation == Activation::kRelu) {
      for (int o = 0; o < layer.out; ++o) {
        if (!(t.pre[l][o] > 0.0)) g[o] = 0.0;
      }
    }
    std::vector<double>& gw = grads[first + 2 * l];
    std::vector<double>& gb = grads[first + 2 * l + 1];
    const std::vector<double>& in = t.act[l];
    const bool need_input = l > 0 || din != nullptr;
    if (need_input) next.assign(layer.in, 0.0);
    for (int o = 0; o < layer.out; ++o) {
      const double go = g[o];
      if (go == 0.0) continue;
      gb[o] += go;
      double* wrow = gw.data() + static_cast<size_t>(o) * layer.in;
      const double* w = layer.weights.data() + static_cast<size_t>(o) * layer.in;
      for (int i = 0; i < layer.in; ++i) {
        wrow[i] += go * in[i];
        if (need_input) next[i] += go * w[i];
      }
    }
    if (need_input) g.swap(next);
  }
  if (din) *din = std::move(g);
}

struct ScaledSample {
  Matrix fx;
  Matrix fxi;
  double target = 0.0;  // scaled label
};

ScaledSample ScaleSample(const ValueModel& m, const LabeledSample& s) {
  return {m.x_scaler.Transform(s.features_x), m.xi_scaler.Transform(s.features_xi),
          m.label_scaler.Scale(s.label)};
}

// Forward/backward pass of the full model on pre-scaled features, reusing
// buffers across samples.
class Workspace {
 public:
  explicit Workspace(const ValueModel& m) : m_(m) {
    const int nx = 2 * static_cast<int>(m.x_encoder.element.size());
    const int px = 2 * static_cast<int>(m.x_encoder.post.size());
    const int nxi = 2 * static_cast<int>(m.xi_encoder.element.size());
    const int pxi = 2 * static_cast<int>(m.xi_encoder.post.size());
    base_[0] = 0;
    base_[1] = nx;
    base_[2] = nx + px;
    base_[3] = nx + px + nxi;
    base_[4] = nx + px + nxi + pxi;
  }

  double Forward(const Matrix& fx, const Matrix& fxi) {
    Encode(m_.x_encoder, fx, &x_elems_, &x_post_);
    Encode(m_.xi_encoder, fxi, &xi_elems_, &xi_post_);
    const std::vector<double>& ex = x_post_.act.back();
    const std::vector<double>& exi = xi_post_.act.back();
    cat_.assign(ex.begin(), ex.end());
    cat_.insert(cat_.end(), exi.begin(), exi.end());
    ForwardTrace(m_.value, cat_, &value_);
    return value_.act.back()[0];
  }

  // Gradient of `dout * output` accumulated into `grads`.
  void Backward(double dout, Grads& grads) {
    std::vector<double> dcat;
    const double d[1] = {dout};
    BackwardTrace(m_.value, value_, d, grads, base_[4], &dcat);
    const int wx = m_.x_encoder.output_width();
    EncodeBackward(m_.x_encoder, x_elems_, x_post_,
                   std::span<const double>(dcat.data(), wx), grads, base_[0],
                   base_[1]);
    EncodeBackward(m_.xi_encoder, xi_elems_, xi_post_,
                   std::span<const double>(dcat.data() + wx, dcat.size() - wx),
                   grads, base_[2], base_[3]);
  }

  // Signs of all ReLU pre-activations of the last forward pass.
  void Pattern(std::vector<signed char>* out) const {
    out->clear();
    auto add = [&](const Layers& layers, const Trace& t) {
      for (size_t l = 0; l < layers.size(); ++l) {
        if (layers[l].activation != Activation::kRelu) continue;
        for (double v : t.pre[l]) out->push_back(v > 0 ? 1 : (v < 0 ? -1 : 0));
      }
    };
    for (int r = 0; r < rows_x_; ++r) add(m_.x_encoder.element, x_elems_[r]);
    add(m_.x_encoder.post, x_post_);
    for (int r = 0; r < rows_xi_; ++r) add(m_.xi_encoder.element, xi_elems_[r]);
    add(m_.xi_encoder.post, xi_post_);
    add(m_.value, value_);
  }

 private:
  void Encode(const SetEncoder& enc, const Matrix& f, std::vector<Trace>* elems,
              Trace* post) {
    if (f.rows == 0 || f.cols != enc.input_width()) {
      throw InputError("feature matrix does not match the encoder");
    }
    if (static_cast<int>(elems->size()) < f.rows) elems->resize(f.rows);
    (&enc == &m_.x_encoder ? rows_x_ : rows_xi_) = f.rows;
    agg_.assign(OutputWidth(enc.element), 0.0);
    for (int r = 0; r < f.rows; ++r) {
      ForwardTrace(enc.element, f.row(r), &(*elems)[r]);
      const std::vector<double>& h = (*elems)[r].act.back();
      for (size_t k = 0; k < agg_.size(); ++k) agg_[k] += h[k];
    }
    ForwardTrace(enc.post, agg_, post);
  }

  void EncodeBackward(const SetEncoder& enc, const std::vector<Trace>& elems,
                      const Trace& post, std::span<const double> dout,
                      Grads& grads, int elem_base, int post_base) {
    std::vector<double> dagg;
    BackwardTrace(enc.post, post, dout, grads, post_base, &dagg);
    const int rows = &enc == &m_.x_encoder ? rows_x_ : rows_xi_;
    for (int r = 0; r < rows; ++r) {
      BackwardTrace(enc.element, elems[r], dagg, grads, elem_base, nullptr);
    }
  }

  const ValueModel& m_;
  int base_[5] = {};
  int rows_x_ = 0;
  int rows_xi_ = 0;
  std::vector<Trace> x_elems_, xi_elems_;
  Trace x_post_, xi_post_, value_;
  std::vector<double> agg_, cat_;
};

Grads ZeroLike(const ValueModel& m) {
  Grads g;
  for (const Layers* layers : {&m.x_encoder.element, &m.x_encoder.post,
                               &m.xi_encoder.element, &m.xi_encoder.post,
                               &m.value}) {
    for (const DenseLayer& layer : *layers) {
      g.emplace_back(layer.weights.size(), 0.0);
      g.emplace_back(layer.bias.size(), 0.0);
    }
  }
  return g;
}

}  // namespace

double MeanAbsoluteError(const ValueModel& model,
                         std::span<const LabeledSample> samples) {
  if (samples.empty()) return 0.0;
  model.CheckReady();
  Workspace ws(model);
  double sum = 0.0;
  for (const LabeledSample& s : samples) {
    ScaledSample ss = ScaleSample(model, s);
    const double out = ws.Forward(ss.fx, ss.fxi);
    sum += std::abs(model.label_scaler.Unscale(out) - s.label);
  }
  return sum / static_cast<double>(samples.size());
}

double LossAndGradient(const ValueModel& model, const LabeledSample& sample,
                       std::vector<std::vector<double>>* gradient) {
  model.CheckReady();
  *gradient = ZeroLike(model);
  Workspace ws(model);
  ScaledSample ss = ScaleSample(model, sample);
  const double diff = ws.Forward(ss.fx, ss.fxi) - ss.target;
  ws.Backward(2.0 * diff, *gradient);
  return diff * diff;
}

TrainResult TrainValueModel(ValueModel initial,
                            std::span<const LabeledSample> train,
                            std::span<const LabeledSample> validation,
                            const TrainConfig& config,
                            const TrainProgress& progress) {
  config.Validate();
  if (train.empty()) throw UsageError("training set is empty");
  ValueModel model = std::move(initial);
  Scalers scalers = FitScalers(train);
  model.x_scaler = scalers.x;
  model.xi_scaler = scalers.xi;
  model.label_scaler = scalers.label;
  model.Validate();

  std::vector<ScaledSample> data;
  data.reserve(train.size());
  for (const LabeledSample& s : train) data.push_back(ScaleSample(model, s));
  const std::span<const LabeledSample> val = validation.empty() ? train : validation;

  std::vector<std::vector<double>*> params = ParameterTensors(model);
  Grads grad = ZeroLike(model);
  Grads m1 = ZeroLike(model);
  Grads m2 = ZeroLike(model);
  Workspace ws(model);
  Rng rng(config.seed);
  std::vector<int> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  const double range = model.label_scaler.range();

  TrainResult result;
  result.best_val_mae = std::numeric_limits<double>::infinity();
  std::int64_t step = 0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.Shuffle(order);
    double sq_sum = 0.0;
    double abs_sum = 0.0;
    for (size_t start = 0; start < order.size(); start += config.batch_size) {
      const size_t end = std::min(order.size(), start + config.batch_size);
      const double inv = 1.0 / static_cast<double>(end - start);
      for (auto& g : grad) std::fill(g.begin(), g.end(), 0.0);
      for (size_t b = start; b < end; ++b) {
        const ScaledSample& s = data[order[b]];
        const double diff = ws.Forward(s.fx, s.fxi) - s.target;
        sq_sum += diff * diff;
        abs_sum += std::abs(diff);
        ws.Backward(2.0 * diff * inv, grad);
      }
      if (!std::isfinite(sq_sum)) {
        throw Error(ErrorKind::kInternal,
                    "training diverged: non-finite loss in epoch " +
                        std::to_string(epoch));
      }
      ++step;
      const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
      for (size_t t = 0; t < params.size(); ++t) {
        std::vector<double>& p = *params[t];
        for (size_t k = 0; k < p.size(); ++k) {
          const double g = grad[t][k];
          m1[t][k] = config.beta1 * m1[t][k] + (1.0 - config.beta1) * g;
          m2[t][k] = config.beta2 * m2[t][k] + (1.0 - config.beta2) * g * g;
          p[k] -= config.learning_rate * (m1[t][k] / c1) /
                  (std::sqrt(m2[t][k] / c2) + config.adam_eps);
        }
      }
    }
    if (epoch % config.validation_interval != 0) continue;
    CurvePoint point;
    point.epoch = epoch;
    point.train_mse = sq_sum / static_cast<double>(data.size());
    point.train_mae = abs_sum * range / static_cast<double>(data.size());
    point.val_mae = MeanAbsoluteError(model, val);
    result.curve.push_back(point);
    if (progress) progress(point);
    if (point.val_mae < result.best_val_mae) {
      result.best_val_mae = point.val_mae;
      result.best_epoch = epoch;
      result.model = model;
    }
  }
  if (result.curve.empty()) {
    result.best_val_mae = MeanAbsoluteError(model, val);
    result.best_epoch = config.epochs;
    result.model = model;
  }
  return result;
}

GradCheckResult GradCheck(const ValueModel& model, const LabeledSample& sample,
                          double step) {
  if (!(step >= 1e-7 && step <= 1e-3)) {
    throw UsageError("grad_check step must lie in [1e-7, 1e-3]");
  }
  model.CheckReady();
  GradCheckResult result;
  ValueModel probe = model;
  ScaledSample ss = ScaleSample(model, sample);
  Workspace ws(probe);

  std::vector<signed char> base, pattern;
  const double diff0 = ws.Forward(ss.fx, ss.fxi) - ss.target;
  ws.Pattern(&base);
  if (std::find(base.begin(), base.end(), 0) != base.end()) {
    result.at_kink = true;
    return result;
  }
  Grads analytic = ZeroLike(probe);
  ws.Backward(2.0 * diff0, analytic);

  std::vector<std::vector<double>*> params = ParameterTensors(probe);
  for (size_t t = 0; t < params.size(); ++t) {
    std::vector<double>& p = *params[t];
    for (size_t k = 0; k < p.size(); ++k) {
      const double orig = p[k];
      p[k] = orig + step;
      const double dp = ws.Forward(ss.fx, ss.fxi) - ss.target;
      ws.Pattern(&pattern);
      bool same = pattern == base;
      p[k] = orig - step;
      const double dm = ws.Forward(ss.fx, ss.fxi) - ss.target;
      ws.Pattern(&pattern);
      same = same && pattern == base;
      p[k] = orig;
      if (!same) {
        ++result.skipped;
        continue;
      }
      const double fd = (dp - dm) * (dp + dm) / (2.0 * step);
      const double a = analytic[t][k];
      const double denom = std::max({std::abs(a), std::abs(fd), 1e-6});
      result.max_rel_error = std::max(result.max_rel_error, std::abs(a - fd) / denom);
      ++result.checked;
    }
  }
  return result;
}

}  // namespace roccg::neural
