#pragma once

// Umbrella header for the ssal toolkit.

#include "ssal/attack.hpp"
#include "ssal/calibration.hpp"
#include "ssal/config.hpp"
#include "ssal/errors.hpp"
#include "ssal/experiment.hpp"
#include "ssal/io.hpp"
#include "ssal/linalg.hpp"
#include "ssal/metrics.hpp"
#include "ssal/ofs.hpp"
#include "ssal/optim.hpp"
#include "ssal/rng.hpp"
#include "ssal/sphere.hpp"
#include "ssal/stats.hpp"
#include "ssal/subspace.hpp"
#include "ssal/world.hpp"
