#pragma once

#include "scw/core.hpp"
#include "scw/data.hpp"
#include "scw/eval.hpp"
#include "scw/learners.hpp"
#include "scw/numeric.hpp"
#include "scw/probit.hpp"
#include "scw/rng.hpp"
