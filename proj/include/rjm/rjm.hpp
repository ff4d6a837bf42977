#pragma once

// Robust joint modeling of a continuous and a binary response: penalized
// density-power-divergence estimation, sandwich inference, criterion-driven
// penalty selection, and a replication harness for contamination studies.

#include "rjm/asymptotics.hpp"
#include "rjm/cli.hpp"
#include "rjm/csv.hpp"
#include "rjm/errors.hpp"
#include "rjm/lasso.hpp"
#include "rjm/loss.hpp"
#include "rjm/model.hpp"
#include "rjm/model_io.hpp"
#include "rjm/parallel.hpp"
#include "rjm/rng.hpp"
#include "rjm/scale.hpp"
#include "rjm/selection.hpp"
#include "rjm/simulation.hpp"
#include "rjm/solver.hpp"
#include "rjm/types.hpp"
