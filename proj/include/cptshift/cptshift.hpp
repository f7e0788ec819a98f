#pragma once

#include "cptshift/units.hpp"
#include "cptshift/error.hpp"
#include "cptshift/model.hpp"
#include "cptshift/signal.hpp"
#include "cptshift/harmonic.hpp"
#include "cptshift/time_domain.hpp"
#include "cptshift/thick.hpp"
#include "cptshift/sweep.hpp"
#include "cptshift/csv.hpp"
#include "cptshift/config.hpp"
#include "cptshift/scenario.hpp"
