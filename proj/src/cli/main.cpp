#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "roccg/roccg.h"

using nlohmann::json;

namespace {

enum class Kind { kInt, kSeed, kDouble, kString, kList, kFlag };

struct Setting {
  std::string key;
  Kind kind;
  std::string help;
};

const std::vector<Setting> kSolverSettings = {
    {"epsilon", Kind::kDouble, "stopping tolerance in scaled label units"},
    {"max_iterations", Kind::kInt, "iteration cap of the learned loop"},
    {"samples", Kind::kInt, "scenarios drawn by the sampling adversary"},
    {"time_limit_seconds", Kind::kDouble, "wall-clock limit per run"},
    {"milp_time_limit_seconds", Kind::kDouble, "limit per MILP solve"},
    {"ccg_max_iterations", Kind::kInt, "iteration cap of classical CCG"},
    {"eval_samples", Kind::kInt, "fresh scenarios in the capital budgeting evaluation pool"},
    {"seed", Kind::kSeed, "random seed"},
    {"record_timing", Kind::kFlag, "record wall times (artifacts stop being reproducible)"},
};

std::map<std::string, std::vector<Setting>> CommandSettings() {
  std::map<std::string, std::vector<Setting>> m;
  m["gen"] = {{"family", Kind::kString, "knapsack or capital_budgeting"},
              {"count", Kind::kInt, "number of instances"},
              {"n_min", Kind::kInt, "smallest instance size"},
              {"n_max", Kind::kInt, "largest instance size"},
              {"seed", Kind::kSeed, "random seed"},
              {"out", Kind::kString, "output directory"}};
  m["data"] = {{"family", Kind::kString, "knapsack or capital_budgeting"},
               {"instances", Kind::kInt, "instances to sample"},
               {"decisions", Kind::kInt, "first-stage decisions per instance"},
               {"scenarios", Kind::kInt, "scenarios per decision"},
               {"n_min", Kind::kInt, "smallest instance size"},
               {"n_max", Kind::kInt, "largest instance size"},
               {"target_mode", Kind::kString, "sum or second-only"},
               {"seed", Kind::kSeed, "random seed"},
               {"out", Kind::kString, "output directory"}};
  m["train"] = {{"dataset", Kind::kString, "directory written by the data command"},
                {"profile", Kind::kString, "architecture profile: desk or paper"},
                {"epochs", Kind::kInt, "training epochs"},
                {"batch_size", Kind::kInt, "minibatch size"},
                {"learning_rate", Kind::kDouble, "Adam step size"},
                {"validation_interval", Kind::kInt, "epochs between validation passes"},
                {"validation_fraction", Kind::kDouble, "share of records held out"},
                {"seed", Kind::kSeed, "random seed"},
                {"out", Kind::kString, "output directory"}};
  m["solve"] = {{"instance", Kind::kString, "instance JSON file"},
                {"method", Kind::kString, "ml-ccg, ccg or brute"},
                {"model", Kind::kString, "model JSON file (ml-ccg)"},
                {"mp_mode", Kind::kString, "argmax or max"},
                {"ap_mode", Kind::kString, "milp, sampling or lp-relax"},
                {"out", Kind::kString, "output directory"}};
  m["bench"] = {{"instances", Kind::kString, "directory written by the gen command"},
                {"methods", Kind::kList,
                 "comma-separated: ml-ccg, ml-ccg-max, ml-ccg-sampling, ml-ccg-lp, ccg, brute"},
                {"model", Kind::kString, "model JSON file (ml-ccg methods)"},
                {"dataset", Kind::kString, "dataset directory whose scenarios join the "
                                           "capital budgeting evaluation pool"},
                {"out", Kind::kString, "output directory"}};
  for (const char* cmd : {"solve", "bench"}) {
    m[cmd].insert(m[cmd].end() - 1, kSolverSettings.begin(), kSolverSettings.end());
  }
  return m;
}

std::string FlagName(const std::string& key) {
  std::string flag = "--" + key;
  for (char& c : flag) {
    if (c == '_') c = '-';
  }
  return flag;
}

// Parsed value of a flag, or a usage message.
json Convert(const Setting& s, const std::string& raw) {
  const std::string flag = FlagName(s.key);
  try {
    std::size_t used = 0;
    switch (s.kind) {
      case Kind::kInt: {
        const long long v = std::stoll(raw, &used);
        if (used != raw.size()) break;
        return v;
      }
      case Kind::kSeed: {
        if (raw.empty() || raw[0] == '-') break;
        const unsigned long long v = std::stoull(raw, &used);
        if (used != raw.size()) break;
        return v;
      }
      case Kind::kDouble: {
        const double v = std::stod(raw, &used);
        if (used != raw.size()) break;
        return v;
      }
      case Kind::kString:
        return raw;
      case Kind::kList: {
        json list = json::array();
        std::stringstream ss(raw);
        std::string item;
        while (std::getline(ss, item, ',')) {
          if (!item.empty()) list.push_back(item);
        }
        return list;
      }
      case Kind::kFlag:
        return true;
    }
  } catch (const std::exception&) {
  }
  throw CLI::ValidationError(flag, "invalid value '" + raw + "'");
}

int ExitCode(roccg_status status) {
  return status == ROCCG_ERR_INTERNAL ? 3 : static_cast<int>(status);
}

std::optional<json> ReadConfigFile(const std::string& path, std::string* error) {
  std::ifstream in(path);
  if (!in) {
    *error = "cannot read config '" + path + "'";
    return std::nullopt;
  }
  try {
    json doc = json::parse(in);
    if (!doc.is_object()) {
      *error = "config '" + path + "' is not a JSON object";
      return std::nullopt;
    }
    return doc;
  } catch (const json::parse_error& e) {
    *error = "config '" + path + "' is not valid JSON: " + e.what();
    return std::nullopt;
  }
}

int Fail(int code, const std::string& message) {
  std::cerr << "roccg: error: " << message << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learning-augmented column-and-constraint generation for two-stage robust "
               "optimization",
               "roccg"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(roccg_version()));

  const auto settings = CommandSettings();
  std::map<std::string, std::string> config_paths;
  std::map<std::string, std::map<std::string, std::string>> raw;
  std::map<std::string, std::map<std::string, bool>> flags;
  std::map<std::string, CLI::App*> subs;
  const std::map<std::string, std::string> descriptions = {
      {"gen", "generate instance files and an index"},
      {"data", "build a labeled dataset"},
      {"train", "train a value network on a dataset"},
      {"solve", "solve one instance"},
      {"bench", "compare methods on an instance directory"}};
  for (const auto& [cmd, list] : settings) {
    CLI::App* sub = app.add_subcommand(cmd, descriptions.at(cmd));
    subs[cmd] = sub;
    sub->add_option("--config", config_paths[cmd],
                    "JSON config; explicit flags take precedence");
    for (const Setting& s : list) {
      if (s.kind == Kind::kFlag) {
        sub->add_flag(FlagName(s.key), flags[cmd][s.key], s.help);
      } else {
        sub->add_option(FlagName(s.key), raw[cmd][s.key], s.help);
      }
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  std::string command;
  for (const auto& [cmd, sub] : subs) {
    if (sub->parsed()) command = cmd;
  }
  CLI::App* sub = subs.at(command);

  json config = json::object();
  if (!config_paths[command].empty()) {
    std::string error;
    std::optional<json> doc = ReadConfigFile(config_paths[command], &error);
    if (!doc) return Fail(2, error);
    config = std::move(*doc);
  }
  if (const char* env_seed = std::getenv("RO_SEED")) {
    try {
      config["seed"] = Convert({"seed", Kind::kSeed, ""}, env_seed);
    } catch (const CLI::ValidationError&) {
      return Fail(1, std::string("RO_SEED must be a non-negative integer, got '") + env_seed +
                         "'");
    }
  }
  try {
    for (const Setting& s : settings.at(command)) {
      if (s.kind == Kind::kFlag) {
        if (flags[command][s.key]) config[s.key] = true;
      } else if (sub->count(FlagName(s.key)) > 0) {
        config[s.key] = Convert(s, raw[command][s.key]);
      }
    }
  } catch (const CLI::ValidationError& e) {
    return Fail(1, e.what());
  }

  int threads = 1;
  if (const char* env_threads = std::getenv("RO_THREADS")) {
    try {
      std::size_t used = 0;
      threads = std::stoi(env_threads, &used);
      if (used != std::string(env_threads).size() || threads < 1) throw std::invalid_argument("");
    } catch (const std::exception&) {
      return Fail(1, std::string("RO_THREADS must be a positive integer, got '") + env_threads +
                         "'");
    }
  }

  char* summary = nullptr;
  const roccg_status status =
      roccg_run(command.c_str(), config.dump().c_str(), threads, &summary);
  if (status != ROCCG_OK) return Fail(ExitCode(status), roccg_last_error());
  std::cout << summary << "\n";
  roccg_string_free(summary);
  return 0;
}
