#pragma once

#include "nemasim/errors.hpp"
#include "nemasim/parameters.hpp"
#include "nemasim/rates.hpp"
#include "nemasim/state.hpp"
#include "nemasim/solver.hpp"
#include "nemasim/quadrature.hpp"
#include "nemasim/threshold.hpp"
#include "nemasim/production.hpp"
#include "nemasim/verification.hpp"
