#pragma once

#include "balson/baselines.hpp"
#include "balson/bench.hpp"
#include "balson/dirichlet.hpp"
#include "balson/error.hpp"
#include "balson/metrics.hpp"
#include "balson/model.hpp"
#include "balson/random.hpp"
#include "balson/samplers.hpp"
#include "balson/solver.hpp"
#include "balson/special_functions.hpp"
