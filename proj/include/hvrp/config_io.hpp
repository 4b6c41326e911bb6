#pragma once

// JSON for the tunable configs. Readers start from the defaults, override
// the keys present and reject unknown keys.

#include "hvrp/gancp.hpp"
#include "hvrp/json_io.hpp"
#include "hvrp/predictor.hpp"

namespace hvrp {

Json to_json_value(const GaConfig& c);
Json to_json_value(const ModelConfig& c);
Json to_json_value(const TrainConfig& c);

GaConfig ga_config_from_json(const Json& j, GaConfig base = {});
ModelConfig model_config_from_json(const Json& j, ModelConfig base = {});
TrainConfig train_config_from_json(const Json& j, TrainConfig base = {});

Json to_json_value(const FinalSolution& f);

}  // namespace hvrp
