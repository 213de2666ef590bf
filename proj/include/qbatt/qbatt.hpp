#pragma once

// Umbrella header for the quantum-battery charging simulator.

#include "qbatt/arrowhead.hpp"
#include "qbatt/asymptotics.hpp"
#include "qbatt/energetics.hpp"
#include "qbatt/errors.hpp"
#include "qbatt/kernels.hpp"
#include "qbatt/oracle.hpp"
#include "qbatt/params.hpp"
#include "qbatt/quadrature.hpp"
#include "qbatt/response.hpp"
#include "qbatt/special_functions.hpp"
#include "qbatt/spectral.hpp"
#include "qbatt/variances.hpp"
