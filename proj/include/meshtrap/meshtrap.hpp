#pragma once

// Umbrella header: phase-transition toolkit for l1 recovery of sparse
// solutions to random underdetermined linear systems. Theory side: the
// weak-threshold characterization and the escape / trapped mesh bounds.
// Experiment side: Monte Carlo Gaussian-width estimation, a convex
// intersection test for random null spaces against the l1 descent set,
// basis-pursuit recovery trials, and a sweep harness that reconciles all
// of them on one phase diagram.

#include "meshtrap/cone.hpp"
#include "meshtrap/errors.hpp"
#include "meshtrap/geometry.hpp"
#include "meshtrap/l1.hpp"
#include "meshtrap/linalg.hpp"
#include "meshtrap/parallel.hpp"
#include "meshtrap/phase.hpp"
#include "meshtrap/rng.hpp"
#include "meshtrap/specfn.hpp"
#include "meshtrap/thresholds.hpp"
#include "meshtrap/trap.hpp"
#include "meshtrap/version.hpp"
