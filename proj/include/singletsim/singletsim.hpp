#pragma once

#include "singletsim/analytics.hpp"
#include "singletsim/deutsch_hayden.hpp"
#include "singletsim/geometry.hpp"
#include "singletsim/instances.hpp"
#include "singletsim/protocol_common.hpp"
#include "singletsim/rng.hpp"
#include "singletsim/stats.hpp"
#include "singletsim/toner_bacon.hpp"
#include "singletsim/two_instance.hpp"
