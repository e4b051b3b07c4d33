#pragma once

#include "heli/config.hpp"
#include "heli/dynamics.hpp"
#include "heli/hinf.hpp"
#include "heli/integrator.hpp"
#include "heli/io.hpp"
#include "heli/observer.hpp"
#include "heli/outer_loop.hpp"
#include "heli/params.hpp"
#include "heli/pid.hpp"
#include "heli/scenario.hpp"
#include "heli/scenarios.hpp"
#include "heli/trim.hpp"
#include "heli/types.hpp"
#include "heli/wind.hpp"
