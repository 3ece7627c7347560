#pragma once

#include "bvpdisc/discovery.hpp"
#include "bvpdisc/error.hpp"
#include "bvpdisc/features.hpp"
#include "bvpdisc/grid.hpp"
#include "bvpdisc/models.hpp"
#include "bvpdisc/regression.hpp"
#include "bvpdisc/signal.hpp"
#include "bvpdisc/solver.hpp"
