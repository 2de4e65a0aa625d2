#pragma once

#include "atflow/csv.hpp"
#include "atflow/diagnostics.hpp"
#include "atflow/energy.hpp"
#include "atflow/errors.hpp"
#include "atflow/fields.hpp"
#include "atflow/flow.hpp"
#include "atflow/galerkin.hpp"
#include "atflow/linear_solve.hpp"
#include "atflow/pgm.hpp"
#include "atflow/trajectory.hpp"
