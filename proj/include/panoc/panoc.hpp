#pragma once

// Umbrella header: adaptive proximal-gradient solvers with quasi-Newton
// acceleration for fully nonconvex composite problems f + g.

#include "bench.hpp"
#include "directions.hpp"
#include "errors.hpp"
#include "fbe.hpp"
#include "problem.hpp"
#include "prox.hpp"
#include "solver.hpp"
#include "vec.hpp"
