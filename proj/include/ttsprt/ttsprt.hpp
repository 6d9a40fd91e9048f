#pragma once

#include "ttsprt/algorithms.hpp"
#include "ttsprt/allocation.hpp"
#include "ttsprt/errors.hpp"
#include "ttsprt/expfam.hpp"
#include "ttsprt/harness.hpp"
#include "ttsprt/rng.hpp"
#include "ttsprt/stats.hpp"
#include "ttsprt/thresholds.hpp"
