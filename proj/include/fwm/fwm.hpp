#pragma once

#include "fwm/budget.hpp"
#include "fwm/calibration.hpp"
#include "fwm/dispersion.hpp"
#include "fwm/error.hpp"
#include "fwm/experiment.hpp"
#include "fwm/interference.hpp"
#include "fwm/io.hpp"
#include "fwm/jsa.hpp"
#include "fwm/parallel.hpp"
#include "fwm/phasematch.hpp"
#include "fwm/schmidt.hpp"
#include "fwm/units.hpp"
