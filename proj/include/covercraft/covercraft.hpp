#pragma once

// covercraft: optimization-based cover learning for point clouds, with the
// nerve / persistence machinery needed to evaluate the learned covers and the
// classical baselines to compare against.

#include "covercraft/baselines.hpp"
#include "covercraft/common.hpp"
#include "covercraft/complex.hpp"
#include "covercraft/eval.hpp"
#include "covercraft/geometry.hpp"
#include "covercraft/learner.hpp"
#include "covercraft/losses.hpp"
#include "covercraft/persistence.hpp"
