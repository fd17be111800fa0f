#pragma once

#include "engine.hpp"
#include "io.hpp"
#include "metrics.hpp"
#include "model.hpp"
#include "penrose.hpp"
#include "rounding_opt.hpp"
#include "rules.hpp"
#include "weights.hpp"
