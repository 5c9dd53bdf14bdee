#pragma once

// Umbrella header.
#include "leodop/cli.hpp"
#include "leodop/config.hpp"
#include "leodop/csv.hpp"
#include "leodop/ddop.hpp"
#include "leodop/doppler.hpp"
#include "leodop/estimator.hpp"
#include "leodop/experiments.hpp"
#include "leodop/geometry.hpp"
#include "leodop/montecarlo.hpp"
#include "leodop/orbit.hpp"
#include "leodop/pass.hpp"
#include "leodop/scenario.hpp"
#include "leodop/sgp4.hpp"
#include "leodop/time.hpp"
#include "leodop/tle.hpp"
