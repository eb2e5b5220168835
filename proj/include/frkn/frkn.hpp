#pragma once

// Umbrella header: functionally fitted Runge-Kutta-Nystrom methods for
// special second-order IVPs y'' = f(t, y), with tableau derivation from
// declared basis functions, linear stability analysis, benchmark problems,
// and the convergence-table harness.

#include "frkn/basis.hpp"
#include "frkn/errors.hpp"
#include "frkn/harness.hpp"
#include "frkn/integrator.hpp"
#include "frkn/numeric.hpp"
#include "frkn/problems.hpp"
#include "frkn/stability.hpp"
#include "frkn/tableau.hpp"
