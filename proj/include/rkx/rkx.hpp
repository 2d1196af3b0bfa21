#pragma once

#include "rkx/numeric.hpp"
#include "rkx/tableau.hpp"
#include "rkx/trees.hpp"
#include "rkx/order_conditions.hpp"
#include "rkx/stage_graph.hpp"
#include "rkx/method.hpp"
#include "rkx/builders.hpp"
#include "rkx/reference_pairs.hpp"
#include "rkx/method_spec.hpp"
#include "rkx/stability.hpp"
#include "rkx/schedule.hpp"
#include "rkx/analysis.hpp"
#include "rkx/executor.hpp"
#include "rkx/integrator.hpp"
#include "rkx/problems.hpp"
#include "rkx/csv.hpp"
#include "rkx/bench.hpp"
