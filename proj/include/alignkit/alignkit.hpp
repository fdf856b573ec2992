#pragma once

#include "alignkit/text.hpp"
#include "alignkit/core.hpp"
#include "alignkit/symmetrize.hpp"
#include "alignkit/stat_align.hpp"
#include "alignkit/assignment.hpp"
#include "alignkit/sim_align.hpp"
#include "alignkit/sent_align.hpp"
#include "alignkit/eval.hpp"
#include "alignkit/grid.hpp"
#include "alignkit/config.hpp"
#include "alignkit/annotation.hpp"

namespace alignkit {
inline constexpr const char* kVersion = "0.1.0";
}  // namespace alignkit
