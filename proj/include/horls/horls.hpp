#pragma once

// Umbrella header for the horls library.

#include "horls/bench.hpp"
#include "horls/config.hpp"
#include "horls/correlations.hpp"
#include "horls/filters.hpp"
#include "horls/linalg.hpp"
#include "horls/noise.hpp"
#include "horls/penalty.hpp"
#include "horls/solvers.hpp"
#include "horls/synthdata.hpp"
