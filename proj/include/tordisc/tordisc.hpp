#pragma once

#include "convex_body.hpp"
#include "discrepancy.hpp"
#include "errors.hpp"
#include "io.hpp"
#include "lattice.hpp"
#include "limit_law.hpp"
#include "numeric.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "stats.hpp"
#include "types.hpp"
