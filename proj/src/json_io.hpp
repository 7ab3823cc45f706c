#pragma once

// Internal JSON helpers shared by the file formats.

#include <json.hpp>

#include "gridloc/core.hpp"
#include "gridloc/grid.hpp"
#include "gridloc/scenario.hpp"

namespace gridloc::detail {

using nlohmann::json;

json grid_to_json(const GridTopology& grid);
GridTopology grid_from_json(const json& j);

json plan_to_json(const ScenarioPlan& plan);
ScenarioPlan plan_from_json(const json& j);

json complex_to_json(const ComplexVector& v);
ComplexVector complex_from_json(const json& j);

json real_to_json(const RealVector& v);
RealVector real_from_json(const json& j);

}  // namespace gridloc::detail
