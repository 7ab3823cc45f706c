#pragma once

#include <iosfwd>
#include <string>

#include "gridloc/sweeps.hpp"

namespace gridloc {

/// SVG line chart of seed-averaged overall accuracy against the swept axis,
/// one series per variant. Infinite axis values are skipped.
void render_svg(std::ostream& out, const EvalReport& report, const std::string& title);

}  // namespace gridloc
