#pragma once

#include "flcqm/config.hpp"
#include "flcqm/csv.hpp"
#include "flcqm/fuzzy.hpp"
#include "flcqm/qos.hpp"
#include "flcqm/scenario.hpp"
#include "flcqm/scenario_spec.hpp"
#include "flcqm/sim.hpp"
