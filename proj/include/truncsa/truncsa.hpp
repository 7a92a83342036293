#pragma once

#include "core.hpp"
#include "diagnostics.hpp"
#include "estimators.hpp"
#include "io.hpp"
#include "models.hpp"
#include "runner.hpp"
#include "sa.hpp"
#include "scenario.hpp"
#include "sequence.hpp"
#include "specfun.hpp"
#include "stepsize.hpp"
#include "trajectory.hpp"
#include "truncation.hpp"
