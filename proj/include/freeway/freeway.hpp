#pragma once

#include "freeway/errors.hpp"
#include "freeway/fundamental.hpp"
#include "freeway/junctions.hpp"
#include "freeway/network.hpp"
#include "freeway/scenario.hpp"
#include "freeway/metrics.hpp"
#include "freeway/control.hpp"
#include "freeway/feasibility.hpp"
#include "freeway/pwa.hpp"
#include "freeway/reach.hpp"
