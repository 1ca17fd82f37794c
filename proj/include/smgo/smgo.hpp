#pragma once

#include "smgo/candidates.hpp"
#include "smgo/harness.hpp"
#include "smgo/problems.hpp"
#include "smgo/sobol.hpp"
#include "smgo/solver.hpp"
#include "smgo/surrogate.hpp"
#include "smgo/trace.hpp"
