#pragma once

// Umbrella header for the predictive-beamforming simulator and harness.

#include "predbeam/channel.hpp"
#include "predbeam/checkpoint.hpp"
#include "predbeam/clrnet.hpp"
#include "predbeam/config.hpp"
#include "predbeam/dataset.hpp"
#include "predbeam/errors.hpp"
#include "predbeam/evaluation.hpp"
#include "predbeam/gradcheck.hpp"
#include "predbeam/mobility.hpp"
#include "predbeam/optimizer.hpp"
#include "predbeam/predictors.hpp"
#include "predbeam/results_io.hpp"
#include "predbeam/rng.hpp"
#include "predbeam/sensing.hpp"
#include "predbeam/textio.hpp"
#include "predbeam/training.hpp"
#include "predbeam/version.hpp"
