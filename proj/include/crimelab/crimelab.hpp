#pragma once

#include "crimelab/config.hpp"
#include "crimelab/diagnostics.hpp"
#include "crimelab/discretization.hpp"
#include "crimelab/errors.hpp"
#include "crimelab/exponents.hpp"
#include "crimelab/hypotheses.hpp"
#include "crimelab/integrator.hpp"
#include "crimelab/model.hpp"
#include "crimelab/run.hpp"
#include "crimelab/steady_state.hpp"
#include "crimelab/svg.hpp"
