#pragma once

#include "surfgrow/errors.hpp"
#include "surfgrow/spectral.hpp"
#include "surfgrow/solver.hpp"
#include "surfgrow/eigen_bound.hpp"
#include "surfgrow/error_ode.hpp"
#include "surfgrow/verifier.hpp"
#include "surfgrow/initial_condition.hpp"
#include "surfgrow/io.hpp"
