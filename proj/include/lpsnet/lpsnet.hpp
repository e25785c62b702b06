#pragma once

#include "lpsnet/ctmc.hpp"
#include "lpsnet/distributions.hpp"
#include "lpsnet/error.hpp"
#include "lpsnet/fluid.hpp"
#include "lpsnet/heavy_traffic.hpp"
#include "lpsnet/linalg.hpp"
#include "lpsnet/model.hpp"
#include "lpsnet/rng.hpp"
#include "lpsnet/sim.hpp"
#include "lpsnet/stats.hpp"
#include "lpsnet/table1.hpp"
