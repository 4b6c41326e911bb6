#pragma once

#include "json.hpp"

#include "hvrp/instances.hpp"

namespace hvrp {

using Json = nlohmann::ordered_json;

Json to_json_value(const CvrpInstance& inst);
Json to_json_value(const MdvrpInstance& inst);
Json to_json_value(const ClrpInstance& inst);
Json to_json_value(const RoutingSolution& sol);

CvrpInstance cvrp_from_json(const Json& j);
MdvrpInstance mdvrp_from_json(const Json& j);
ClrpInstance clrp_from_json(const Json& j);

}  // namespace hvrp
