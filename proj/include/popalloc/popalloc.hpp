#pragma once

#include "popalloc/dynamics.hpp"
#include "popalloc/errors.hpp"
#include "popalloc/game.hpp"
#include "popalloc/graph.hpp"
#include "popalloc/scenario.hpp"
#include "popalloc/trigger.hpp"
