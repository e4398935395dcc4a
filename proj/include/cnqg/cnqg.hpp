#pragma once

#include "cnqg/checkpoint.hpp"
#include "cnqg/config.hpp"
#include "cnqg/diagnostics.hpp"
#include "cnqg/errors.hpp"
#include "cnqg/field.hpp"
#include "cnqg/grid.hpp"
#include "cnqg/initial_data.hpp"
#include "cnqg/operators.hpp"
#include "cnqg/oracle.hpp"
#include "cnqg/solver.hpp"
#include "cnqg/transform.hpp"
