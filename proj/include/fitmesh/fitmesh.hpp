#pragma once

// Umbrella header for the fitted-mesh solver library.

#include "fitmesh/config.hpp"
#include "fitmesh/convergence.hpp"
#include "fitmesh/csv.hpp"
#include "fitmesh/discretization.hpp"
#include "fitmesh/errors.hpp"
#include "fitmesh/expression.hpp"
#include "fitmesh/linalg.hpp"
#include "fitmesh/mesh.hpp"
#include "fitmesh/problem.hpp"
