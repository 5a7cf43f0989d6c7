#pragma once

// Umbrella header for the numerical library (report.hpp is separate: it pulls in JSON).

#include "entropy_flow/analytic.hpp"
#include "entropy_flow/convolution.hpp"
#include "entropy_flow/errors.hpp"
#include "entropy_flow/functionals.hpp"
#include "entropy_flow/grid.hpp"
#include "entropy_flow/heat_flow.hpp"
#include "entropy_flow/inequalities.hpp"
