#pragma once

#include "mida/baselines.hpp"
#include "mida/cli.hpp"
#include "mida/demand.hpp"
#include "mida/diagnostics.hpp"
#include "mida/equilibrium.hpp"
#include "mida/errors.hpp"
#include "mida/experiments.hpp"
#include "mida/generator.hpp"
#include "mida/mechanism.hpp"
#include "mida/model.hpp"
#include "mida/properties.hpp"
#include "mida/random.hpp"
#include "mida/rational.hpp"
#include "mida/scenario_io.hpp"
