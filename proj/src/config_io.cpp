#include "hvrp/config_io.hpp"

#include <functional>
#include <map>

#include "hvrp/error.hpp"

namespace hvrp {

namespace {

using Setter = std::function<void(const Json&)>;

void apply(const Json& j, const std::map<std::string, Setter>& keys, const std::string& what) {
  if (!j.is_object()) throw ConfigError(what + ": expected a JSON object");
  for (const auto& [k, v] : j.items()) {
    const auto it = keys.find(k);
    if (it == keys.end()) throw ConfigError(what + ": unknown key '" + k + "'");
    try {
      it->second(v);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(what + ": bad value for '" + k + "': " + e.what());
    }
  }
}

template <class T>
Setter set(T& field) {
  return [&field](const Json& v) { field = v.get<T>(); };
}

template <class T>
Setter set_optional(std::optional<T>& field) {
  return [&field](const Json& v) {
    if (v.is_null())
      field.reset();
    else
      field = v.get<T>();
  };
}

template <class T>
Json optional_value(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

}  // namespace

Json to_json_value(const GaConfig& c) {
  Json j;
  j["pop_low"] = c.pop_low;
  j["pop_high"] = c.pop_high;
  j["generations"] = c.generations;
  j["stall_limit"] = c.stall_limit;
  j["p_repair"] = c.p_repair;
  j["p_flip"] = c.p_flip;
  j["mutation_fraction"] = c.mutation_fraction;
  j["targeted_fraction"] = c.targeted_fraction;
  j["targeted_gene_fraction"] = c.targeted_gene_fraction;
  j["elite_fraction"] = c.elite_fraction;
  j["w1"] = c.w1;
  j["w2"] = c.w2;
  j["w3"] = c.w3;
  j["top_k"] = c.top_k;
  j["inject_nda"] = c.inject_nda;
  j["seed"] = c.seed;
  j["routing_iterations"] = optional_value(c.routing_iterations);
  return j;
}

GaConfig ga_config_from_json(const Json& j, GaConfig c) {
  apply(j,
        {{"pop_low", set(c.pop_low)},
         {"pop_high", set(c.pop_high)},
         {"generations", set(c.generations)},
         {"stall_limit", set(c.stall_limit)},
         {"p_repair", set(c.p_repair)},
         {"p_flip", set(c.p_flip)},
         {"mutation_fraction", set(c.mutation_fraction)},
         {"targeted_fraction", set(c.targeted_fraction)},
         {"targeted_gene_fraction", set(c.targeted_gene_fraction)},
         {"elite_fraction", set(c.elite_fraction)},
         {"w1", set(c.w1)},
         {"w2", set(c.w2)},
         {"w3", set(c.w3)},
         {"top_k", set(c.top_k)},
         {"inject_nda", set(c.inject_nda)},
         {"seed", set(c.seed)},
         {"routing_iterations", set_optional(c.routing_iterations)}},
        "ga config");
  c.validate();
  return c;
}

Json to_json_value(const ModelConfig& c) {
  return Json{{"hidden", c.hidden}, {"heads", c.heads}, {"layers", c.layers}, {"knn", c.knn},
              {"ff_multiplier", c.ff_multiplier}};
}

ModelConfig model_config_from_json(const Json& j, ModelConfig c) {
  apply(j,
        {{"hidden", set(c.hidden)},
         {"heads", set(c.heads)},
         {"layers", set(c.layers)},
         {"knn", set(c.knn)},
         {"ff_multiplier", set(c.ff_multiplier)}},
        "model config");
  c.validate();
  return c;
}

Json to_json_value(const TrainConfig& c) {
  Json j;
  j["learning_rate"] = c.learning_rate;
  j["schedule"] = c.schedule == LrSchedule::Cosine ? "cosine" : "constant";
  j["epochs"] = c.epochs;
  j["batch_size"] = optional_value(c.batch_size);
  j["validation_fraction"] = c.validation_fraction;
  j["seed"] = c.seed;
  j["init_bias_from_data"] = c.init_bias_from_data;
  j["patience"] = optional_value(c.patience);
  j["augment_symmetries"] = c.augment_symmetries;
  return j;
}

TrainConfig train_config_from_json(const Json& j, TrainConfig c) {
  apply(j,
        {{"learning_rate", set(c.learning_rate)},
         {"schedule",
          [&c](const Json& v) {
            const auto s = v.get<std::string>();
            if (s == "cosine")
              c.schedule = LrSchedule::Cosine;
            else if (s == "constant")
              c.schedule = LrSchedule::Constant;
            else
              throw ConfigError("train config: schedule must be constant or cosine");
          }},
         {"epochs", set(c.epochs)},
         {"batch_size", set_optional(c.batch_size)},
         {"validation_fraction", set(c.validation_fraction)},
         {"seed", set(c.seed)},
         {"init_bias_from_data", set(c.init_bias_from_data)},
         {"patience", set_optional(c.patience)},
         {"augment_symmetries", set(c.augment_symmetries)}},
        "train config");
  c.validate();
  return c;
}

Json to_json_value(const FinalSolution& f) {
  Json j;
  j["assignment"] = f.assignment;
  j["predicted_cost"] = f.predicted_cost;
  j["actual_cost"] = f.solution.total_cost;
  j["solution"] = to_json_value(f.solution);
  Json cands = Json::array();
  for (const auto& c : f.routed) {
    cands.push_back({{"predicted_cost", c.predicted_cost},
                     {"actual_cost", optional_value(c.actual_cost)},
                     {"nda", c.nda},
                     {"assignment", c.genes}});
  }
  j["candidates"] = cands;
  return j;
}

}  // namespace hvrp
