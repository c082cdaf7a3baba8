#pragma once

#include "matfac/baselines.hpp"
#include "matfac/error.hpp"
#include "matfac/factor_projection.hpp"
#include "matfac/harness.hpp"
#include "matfac/io.hpp"
#include "matfac/least_squares.hpp"
#include "matfac/linalg.hpp"
#include "matfac/matrix.hpp"
#include "matfac/metrics.hpp"
#include "matfac/rng.hpp"
#include "matfac/rpils.hpp"
#include "matfac/simulate.hpp"
#include "matfac/types.hpp"
#include "matfac/weights.hpp"
