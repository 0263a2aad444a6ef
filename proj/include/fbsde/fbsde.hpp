#pragma once

#include "fbsde/core/brownian.hpp"
#include "fbsde/core/errors.hpp"
#include "fbsde/core/ito.hpp"
#include "fbsde/core/parallel.hpp"
#include "fbsde/core/path_array.hpp"
#include "fbsde/core/philox.hpp"
#include "fbsde/core/regression.hpp"
#include "fbsde/core/statistics.hpp"
#include "fbsde/core/time_grid.hpp"
#include "fbsde/filter/consistency.hpp"
#include "fbsde/filter/kalman_bucy.hpp"
#include "fbsde/filter/models.hpp"
#include "fbsde/filter/riccati.hpp"
#include "fbsde/game/cost.hpp"
#include "fbsde/game/hamiltonian.hpp"
#include "fbsde/game/market.hpp"
#include "fbsde/game/scenario.hpp"
#include "fbsde/game/strategy.hpp"
#include "fbsde/game/wealth.hpp"
#include "fbsde/equilibrium/adaptedness.hpp"
#include "fbsde/equilibrium/conditional.hpp"
#include "fbsde/equilibrium/convexity.hpp"
#include "fbsde/equilibrium/deviation.hpp"
#include "fbsde/equilibrium/game_run.hpp"
#include "fbsde/equilibrium/mp_residual.hpp"
