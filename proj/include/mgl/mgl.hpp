#pragma once

// Umbrella header: mixture graphical lasso estimation, baselines, synthetic
// benchmarks, evaluation, file formats and figure rendering.

#include "mgl/baselines.hpp"
#include "mgl/defaults.hpp"
#include "mgl/errors.hpp"
#include "mgl/eval.hpp"
#include "mgl/glasso.hpp"
#include "mgl/io.hpp"
#include "mgl/linalg.hpp"
#include "mgl/matrix.hpp"
#include "mgl/mixture.hpp"
#include "mgl/render.hpp"
#include "mgl/rng.hpp"
#include "mgl/synth.hpp"
