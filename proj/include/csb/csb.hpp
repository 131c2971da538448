#pragma once

// Umbrella header for the censored semi-bandits library.

#include "csb/core.hpp"
#include "csb/estimation.hpp"
#include "csb/harness.hpp"
#include "csb/knapsack.hpp"
#include "csb/policies.hpp"
#include "csb/rng.hpp"
