#pragma once

#include "errors.hpp"
#include "precision.hpp"
#include "specfun.hpp"
#include "system.hpp"
#include "scheme_params.hpp"
#include "bler.hpp"
#include "asymptotics.hpp"
#include "blocklength.hpp"
#include "montecarlo.hpp"
#include "scenario.hpp"
#include "sweep.hpp"
#include "validate.hpp"
