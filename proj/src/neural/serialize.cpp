#include "neural/serialize.hpp"

#include "common/error.hpp"
#include "common/io.hpp"

namespace roccg::neural {

using nlohmann::json;

namespace {

json LayersToJson(const Layers& layers) {
  json arr = json::array();
  for (const DenseLayer& l : layers) {
    arr.push_back({{"in", l.in},
                   {"out", l.out},
                   {"activation", ToString(l.activation)},
                   {"weights", l.weights},
                   {"bias", l.bias}});
  }
  return arr;
}

Layers LayersFromJson(const json& doc, const std::string& context) {
  if (!doc.is_array()) throw InputError(context + " must be an array of layers");
  Layers layers;
  for (size_t i = 0; i < doc.size(); ++i) {
    const std::string ctx = context + "[" + std::to_string(i) + "]";
    DenseLayer l;
    l.in = RequireField<int>(doc[i], "in", ctx);
    l.out = RequireField<int>(doc[i], "out", ctx);
    l.activation =
        ParseActivation(RequireField<std::string>(doc[i], "activation", ctx));
    l.weights = RequireField<std::vector<double>>(doc[i], "weights", ctx);
    l.bias = RequireField<std::vector<double>>(doc[i], "bias", ctx);
    l.Validate();
    layers.push_back(std::move(l));
  }
  return layers;
}

json EncoderToJson(const SetEncoder& e) {
  return {{"element", LayersToJson(e.element)}, {"post", LayersToJson(e.post)}};
}

SetEncoder EncoderFromJson(const json& doc, const std::string& context) {
  SetEncoder e;
  e.element = LayersFromJson(RequireField<json>(doc, "element", context),
                             context + ".element");
  e.post = LayersFromJson(RequireField<json>(doc, "post", context), context + ".post");
  return e;
}

json ScalerToJson(const MinMaxScaler& s) { return {{"min", s.lo}, {"max", s.hi}}; }

MinMaxScaler ScalerFromJson(const json& doc, const std::string& context) {
  MinMaxScaler s;
  s.lo = RequireField<std::vector<double>>(doc, "min", context);
  s.hi = RequireField<std::vector<double>>(doc, "max", context);
  if (s.lo.size() != s.hi.size()) {
    throw InputError(context + ": 'min' and 'max' differ in length");
  }
  return s;
}

}  // namespace

json ModelToJson(const ValueModel& model) {
  json scalers = {{"x", ScalerToJson(model.x_scaler)},
                  {"xi", ScalerToJson(model.xi_scaler)}};
  if (model.label_scaler.fitted) {
    scalers["label"] = {{"min", model.label_scaler.lo}, {"max", model.label_scaler.hi}};
  }
  return {{"format", "roccg-value-model"},
          {"schema_version", kModelSchemaVersion},
          {"family", model.family},
          {"target_mode", ToString(model.target_mode)},
          {"x_encoder", EncoderToJson(model.x_encoder)},
          {"xi_encoder", EncoderToJson(model.xi_encoder)},
          {"value", LayersToJson(model.value)},
          {"scalers", scalers}};
}

ValueModel ModelFromJson(const json& doc) {
  const std::string ctx = "value model";
  CheckSchemaVersion(doc, kModelSchemaVersion, ctx);
  if (RequireField<std::string>(doc, "format", ctx) != "roccg-value-model") {
    throw InputError(ctx + ": field 'format' is not 'roccg-value-model'");
  }
  ValueModel m;
  m.family = RequireField<std::string>(doc, "family", ctx);
  m.target_mode = ParseTargetMode(RequireField<std::string>(doc, "target_mode", ctx));
  m.x_encoder = EncoderFromJson(RequireField<json>(doc, "x_encoder", ctx), "x_encoder");
  m.xi_encoder =
      EncoderFromJson(RequireField<json>(doc, "xi_encoder", ctx), "xi_encoder");
  m.value = LayersFromJson(RequireField<json>(doc, "value", ctx), "value");
  const json scalers = RequireField<json>(doc, "scalers", ctx);
  m.x_scaler = ScalerFromJson(RequireField<json>(scalers, "x", "scalers"), "scalers.x");
  m.xi_scaler =
      ScalerFromJson(RequireField<json>(scalers, "xi", "scalers"), "scalers.xi");
  if (scalers.contains("label")) {
    const json& label = scalers["label"];
    m.label_scaler.lo = RequireField<double>(label, "min", "scalers.label");
    m.label_scaler.hi = RequireField<double>(label, "max", "scalers.label");
    m.label_scaler.fitted = true;
  }
  m.Validate();
  return m;
}

void SaveModel(const ValueModel& model, const std::string& path) {
  WriteJsonFile(path, ModelToJson(model));
}

ValueModel LoadModel(const std::string& path) {
  return ModelFromJson(ReadJsonFile(path));
}

}  // namespace roccg::neural
