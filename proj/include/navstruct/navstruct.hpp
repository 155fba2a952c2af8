#pragma once

#include "navstruct/errors.hpp"
#include "navstruct/scenario.hpp"
#include "navstruct/cost.hpp"
#include "navstruct/evaluator.hpp"
#include "navstruct/oracle.hpp"
#include "navstruct/landmark.hpp"
#include "navstruct/parallel.hpp"
#include "navstruct/refiner.hpp"
#include "navstruct/baselines.hpp"
#include "navstruct/merge.hpp"
#include "navstruct/adapters.hpp"
#include "navstruct/io.hpp"
