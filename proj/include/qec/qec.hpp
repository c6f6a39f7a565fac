#pragma once

// Umbrella header for the quantum ensemble classification library.

#include "qec/common.hpp"
#include "qec/config.hpp"
#include "qec/dynamics.hpp"
#include "qec/ensemble.hpp"
#include "qec/evaluation.hpp"
#include "qec/gradient.hpp"
#include "qec/io.hpp"
#include "qec/learning.hpp"
#include "qec/parallel.hpp"
#include "qec/runner.hpp"
#include "qec/systems.hpp"
