#include "embed/embed.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "common/error.hpp"

namespace roccg::embed {

using milp::LinExpr;
using milp::MilpModel;
using neural::Activation;
using neural::DenseLayer;
using neural::Layers;

namespace {

// Widens a bound slightly so rounding in the equality rows of identity
// neurons cannot make the true value infeasible.
double PadLow(double v) { return v - 1e-7 * (1.0 + std::abs(v)); }
double PadHigh(double v) { return v + 1e-7 * (1.0 + std::abs(v)); }

std::string Name(const std::string& prefix, int layer, int neuron, const char* kind) {
  return prefix + "_" + kind + std::to_string(layer) + "_" + std::to_string(neuron);
}

}  // namespace

BoundBox PropagateBounds(const Layers& layers, std::span<const Interval> box) {
  BoundBox out;
  out.input.assign(box.begin(), box.end());
  for (const Interval& iv : box) {
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || iv.lo > iv.hi) {
      throw InputError("bound propagation needs a finite, nonempty input box");
    }
  }
  std::vector<Interval> cur(box.begin(), box.end());
  for (const DenseLayer& layer : layers) {
    if (static_cast<int>(cur.size()) != layer.in) {
      throw InputError("input box width does not match the network");
    }
    std::vector<Interval> pre(layer.out);
    for (int o = 0; o < layer.out; ++o) {
      double lo = layer.bias[o];
      double hi = layer.bias[o];
      for (int i = 0; i < layer.in; ++i) {
        const double w = layer.weight(o, i);
        if (w >= 0) {
          lo += w * cur[i].lo;
          hi += w * cur[i].hi;
        } else {
          lo += w * cur[i].hi;
          hi += w * cur[i].lo;
        }
      }
      pre[o] = {lo, hi};
    }
    cur = pre;
    if (layer.activation == Activation::kRelu) {
      for (Interval& iv : cur) iv = {std::max(iv.lo, 0.0), std::max(iv.hi, 0.0)};
    }
    out.pre.push_back(std::move(pre));
  }
  return out;
}

std::vector<Interval> OutputBounds(const Layers& layers, const BoundBox& bounds) {
  if (layers.empty() || bounds.pre.size() != layers.size()) {
    throw InputError("bound box does not match the network");
  }
  std::vector<Interval> out = bounds.pre.back();
  if (layers.back().activation == Activation::kRelu) {
    for (Interval& iv : out) iv = {std::max(iv.lo, 0.0), std::max(iv.hi, 0.0)};
  }
  return out;
}

Interval ExprRange(const MilpModel& model, const LinExpr& expr) {
  Interval r{expr.constant(), expr.constant()};
  for (const milp::Term& t : expr.terms()) {
    const milp::Variable& v = model.variable(t.var);
    if (t.coef >= 0) {
      r.lo += t.coef * v.lower;
      r.hi += t.coef * v.upper;
    } else {
      r.lo += t.coef * v.upper;
      r.hi += t.coef * v.lower;
    }
  }
  return r;
}

EmbeddedNet EmbedMlp(MilpModel& model, const Layers& layers,
                     std::span<const LinExpr> inputs, const BoundBox& bounds,
                     const std::string& prefix, bool relax) {
  if (layers.empty() || bounds.pre.size() != layers.size() ||
      static_cast<int>(inputs.size()) != layers.front().in ||
      bounds.input.size() != inputs.size()) {
    throw InputError("bound box does not match the network being embedded");
  }
  for (size_t l = 0; l < layers.size(); ++l) {
    if (static_cast<int>(bounds.pre[l].size()) != layers[l].out) {
      throw InputError("bound box does not match the network being embedded");
    }
  }
  for (size_t i = 0; i < inputs.size(); ++i) {
    const Interval r = ExprRange(model, inputs[i]);
    const Interval& b = bounds.input[i];
    const double tol = 1e-9 * (1.0 + std::max(std::abs(b.lo), std::abs(b.hi)));
    if (r.lo < b.lo - tol || r.hi > b.hi + tol) {
      throw InputError("input " + std::to_string(i) + " range [" +
                       std::to_string(r.lo) + ", " + std::to_string(r.hi) +
                       "] is not covered by the bound box");
    }
  }

  EmbeddedNet net;
  std::vector<LinExpr> cur(inputs.begin(), inputs.end());
  for (size_t l = 0; l < layers.size(); ++l) {
    const DenseLayer& layer = layers[l];
    const bool last = l + 1 == layers.size();
    std::vector<LinExpr> next(layer.out);
    for (int o = 0; o < layer.out; ++o) {
      LinExpr a(layer.bias[o]);
      for (int i = 0; i < layer.in; ++i) {
        const double w = layer.weight(o, i);
        if (w != 0.0) a.AddScaled(cur[i], w);
      }
      a.Normalize();
      const Interval pre = bounds.pre[l][o];
      const bool relu = layer.activation == Activation::kRelu;
      if (relu && pre.hi <= 0.0) {
        ++net.stable_inactive;
        if (last) {
          net.outputs.push_back(model.AddContinuous(0.0, 0.0, Name(prefix, l, o, "h")));
          net.output_bounds.push_back({0.0, 0.0});
          next[o] = LinExpr::Var(net.outputs.back());
        }
        continue;
      }
      if (!relu || pre.lo >= 0.0) {
        if (relu) ++net.stable_active;
        if (a.IsConstant() && !last) {
          next[o] = a;
          continue;
        }
        const Interval padded{PadLow(pre.lo), PadHigh(pre.hi)};
        const int h = model.AddContinuous(padded.lo, padded.hi, Name(prefix, l, o, "h"));
        LinExpr row = a;
        row.Add(h, -1.0);
        model.AddEqual(row, 0.0, Name(prefix, l, o, "eq"));
        next[o] = LinExpr::Var(h);
        if (last) {
          net.outputs.push_back(h);
          net.output_bounds.push_back(padded);
        }
        continue;
      }
      const int h = model.AddContinuous(0.0, pre.hi, Name(prefix, l, o, "h"));
      const int d = relax ? model.AddContinuous(0.0, 1.0, Name(prefix, l, o, "d"))
                          : model.AddBinary(Name(prefix, l, o, "d"));
      net.relu_binaries.push_back(d);
      LinExpr lower_row = a;  // h >= a
      lower_row.Add(h, -1.0);
      model.AddLessEqual(lower_row, 0.0, Name(prefix, l, o, "ge"));
      LinExpr upper_row = a;  // h <= a - L (1 - d)
      upper_row *= -1.0;
      upper_row.Add(h, 1.0).Add(d, -pre.lo);
      model.AddLessEqual(upper_row, -pre.lo, Name(prefix, l, o, "le"));
      LinExpr on_row;  // h <= U d
      on_row.Add(h, 1.0).Add(d, -pre.hi);
      model.AddLessEqual(on_row, 0.0, Name(prefix, l, o, "on"));
      next[o] = LinExpr::Var(h);
      if (last) {
        net.outputs.push_back(h);
        net.output_bounds.push_back({0.0, pre.hi});
      }
    }
    cur = std::move(next);
  }
  return net;
}

ArgmaxGadget EmbedArgmax(MilpModel& model, std::span<const LinExpr> predictions,
                         const std::vector<std::vector<double>>& scenarios,
                         double lower, double upper, const std::string& prefix) {
  const size_t k = predictions.size();
  if (k == 0 || scenarios.size() != k) {
    throw UsageError("argmax needs one scenario per prediction and k >= 1");
  }
  if (!(lower <= upper)) throw UsageError("argmax bounds must satisfy L <= M");
  const size_t dim = scenarios[0].size();
  ArgmaxGadget g;
  g.u = model.AddContinuous(lower, upper, prefix + "_u");
  LinExpr sum_z;
  for (size_t i = 0; i < k; ++i) {
    if (scenarios[i].size() != dim) throw UsageError("scenario dimensions differ");
    const int z = model.AddBinary(prefix + "_z" + std::to_string(i));
    g.z.push_back(z);
    sum_z.Add(z, 1.0);
    LinExpr ge = predictions[i];  // p_i - u <= 0
    ge.Add(g.u, -1.0);
    model.AddLessEqual(ge, 0.0, prefix + "_ge" + std::to_string(i));
    LinExpr le = predictions[i];  // u - p_i + (M - L) z_i <= M - L
    le *= -1.0;
    le.Add(g.u, 1.0).Add(z, upper - lower);
    model.AddLessEqual(le, upper - lower, prefix + "_le" + std::to_string(i));
  }
  model.AddEqual(sum_z, 1.0, prefix + "_one");
  for (size_t j = 0; j < dim; ++j) {
    double lo = scenarios[0][j], hi = scenarios[0][j];
    for (const auto& s : scenarios) {
      lo = std::min(lo, s[j]);
      hi = std::max(hi, s[j]);
    }
    const int xa = model.AddContinuous(lo, hi, prefix + "_xi" + std::to_string(j));
    g.xi_a.push_back(xa);
    LinExpr link = LinExpr::Var(xa, -1.0);
    for (size_t i = 0; i < k; ++i) link.Add(g.z[i], scenarios[i][j]);
    model.AddEqual(link, 0.0, prefix + "_link" + std::to_string(j));
  }
  return g;
}

namespace {

EmbeddedEncoder PostNetwork(MilpModel& model, const neural::SetEncoder& encoder,
                            std::vector<LinExpr> agg, std::vector<Interval> box,
                            const std::string& prefix, bool relax,
                            EmbeddedEncoder out) {
  BoundBox bounds = PropagateBounds(encoder.post, box);
  EmbeddedNet post = EmbedMlp(model, encoder.post, agg, bounds, prefix + "_post", relax);
  out.binaries.insert(out.binaries.end(), post.relu_binaries.begin(),
                      post.relu_binaries.end());
  for (int v : post.outputs) out.embedding.push_back(LinExpr::Var(v));
  out.bounds = post.output_bounds;
  return out;
}

}  // namespace

EmbeddedEncoder EmbedEncoder(MilpModel& model, const neural::SetEncoder& encoder,
                             const neural::MinMaxScaler& scaler,
                             const FeatureExprs& features,
                             const std::string& prefix, bool relax) {
  if (features.rows == 0 || features.cols != encoder.input_width() ||
      scaler.width() != features.cols) {
    throw InputError("symbolic features do not match the encoder");
  }
  const int width = neural::OutputWidth(encoder.element);
  std::vector<LinExpr> agg(width);
  std::vector<Interval> agg_box(width);
  EmbeddedEncoder out;
  for (int r = 0; r < features.rows; ++r) {
    std::vector<LinExpr> scaled(features.cols);
    std::vector<Interval> box(features.cols);
    for (int c = 0; c < features.cols; ++c) {
      const auto [a, b] = scaler.Affine(c);
      LinExpr e;
      e.AddScaled(features.at(r, c), a);
      e.AddConstant(b);
      e.Normalize();
      scaled[c] = e;
      box[c] = ExprRange(model, e);
    }
    BoundBox bounds = PropagateBounds(encoder.element, box);
    EmbeddedNet net = EmbedMlp(model, encoder.element, scaled, bounds,
                               prefix + "_e" + std::to_string(r), relax);
    out.binaries.insert(out.binaries.end(), net.relu_binaries.begin(),
                        net.relu_binaries.end());
    for (int k = 0; k < width; ++k) {
      agg[k].Add(net.outputs[k], 1.0);
      agg_box[k].lo += net.output_bounds[k].lo;
      agg_box[k].hi += net.output_bounds[k].hi;
    }
  }
  return PostNetwork(model, encoder, std::move(agg), std::move(agg_box), prefix,
                     relax, std::move(out));
}

EmbeddedEncoder EmbedBinaryXEncoder(MilpModel& model,
                                    const neural::ValueModel& value_model,
                                    std::span<const int> x_vars,
                                    const neural::Matrix& features_at_zero,
                                    const neural::Matrix& features_at_one,
                                    const std::string& prefix) {
  const neural::SetEncoder& enc = value_model.x_encoder;
  const int n = static_cast<int>(x_vars.size());
  if (features_at_zero.rows != n || features_at_one.rows != n ||
      !(features_at_zero.cols == features_at_one.cols)) {
    throw InputError("tabulated x features do not match the decision vector");
  }
  value_model.CheckReady();
  const neural::Matrix s0 = value_model.x_scaler.Transform(features_at_zero);
  const neural::Matrix s1 = value_model.x_scaler.Transform(features_at_one);
  const int width = neural::OutputWidth(enc.element);
  std::vector<LinExpr> agg(width);
  for (int i = 0; i < n; ++i) {
    const std::vector<double> o0 = neural::Forward(enc.element, s0.row(i));
    const std::vector<double> o1 = neural::Forward(enc.element, s1.row(i));
    for (int k = 0; k < width; ++k) {
      agg[k].AddConstant(o0[k]);
      agg[k].Add(x_vars[i], o1[k] - o0[k]);
    }
  }
  std::vector<Interval> box(width);
  for (int k = 0; k < width; ++k) {
    agg[k].Normalize();
    box[k] = ExprRange(model, agg[k]);
  }
  return PostNetwork(model, enc, std::move(agg), std::move(box), prefix, false, {});
}

EmbeddedEncoder ConstantEncoder(std::span<const double> embedding) {
  EmbeddedEncoder e;
  for (double v : embedding) {
    e.embedding.emplace_back(v);
    e.bounds.push_back({v, v});
  }
  return e;
}

EmbeddedValue EmbedValueNetwork(MilpModel& model,
                                const neural::ValueModel& value_model,
                                const EmbeddedEncoder& x_embedding,
                                const EmbeddedEncoder& xi_embedding,
                                const std::string& prefix, bool relax) {
  std::vector<LinExpr> inputs = x_embedding.embedding;
  inputs.insert(inputs.end(), xi_embedding.embedding.begin(),
                xi_embedding.embedding.end());
  std::vector<Interval> box = x_embedding.bounds;
  box.insert(box.end(), xi_embedding.bounds.begin(), xi_embedding.bounds.end());
  BoundBox bounds = PropagateBounds(value_model.value, box);
  EmbeddedNet net = EmbedMlp(model, value_model.value, inputs, bounds, prefix, relax);
  EmbeddedValue out;
  out.output = net.outputs.at(0);
  out.bounds = net.output_bounds.at(0);
  out.binaries = std::move(net.relu_binaries);
  return out;
}

}  // namespace roccg::embed
