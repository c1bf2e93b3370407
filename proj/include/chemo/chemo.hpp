#pragma once

#include "chemo/diagnostics.hpp"
#include "chemo/errors.hpp"
#include "chemo/grid.hpp"
#include "chemo/interpolation_check.hpp"
#include "chemo/linear_solvers.hpp"
#include "chemo/model.hpp"
#include "chemo/regimes.hpp"
#include "chemo/stepper.hpp"
