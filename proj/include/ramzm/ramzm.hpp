#pragma once

#include "ramzm/error.hpp"
#include "ramzm/units.hpp"
#include "ramzm/device_models.hpp"
#include "ramzm/link_params.hpp"
#include "ramzm/numeric_oracle.hpp"
#include "ramzm/link_metrics.hpp"
#include "ramzm/distortion.hpp"
#include "ramzm/sweep_optimize.hpp"
