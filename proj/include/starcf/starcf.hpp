// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The starcf Authors

#pragma once

#include "starcf/ao.hpp"
#include "starcf/apso.hpp"
#include "starcf/bisection.hpp"
#include "starcf/channel.hpp"
#include "starcf/closedform.hpp"
#include "starcf/config.hpp"
#include "starcf/error.hpp"
#include "starcf/estimator.hpp"
#include "starcf/impairments.hpp"
#include "starcf/linalg.hpp"
#include "starcf/montecarlo.hpp"
#include "starcf/parallel.hpp"
#include "starcf/rng.hpp"
#include "starcf/scenario.hpp"
#include "starcf/soc.hpp"
#include "starcf/experiments.hpp"
