// Copyright (c) 2026 The subquad authors
// SPDX-License-Identifier: MIT

#ifndef SUBQUAD_SUBQUAD_HPP
#define SUBQUAD_SUBQUAD_HPP

#include "subquad/common.hpp"
#include "subquad/config.hpp"
#include "subquad/expression.hpp"
#include "subquad/grid.hpp"
#include "subquad/io.hpp"
#include "subquad/nonlinearity.hpp"
#include "subquad/rng.hpp"
#include "subquad/solvers.hpp"
#include "subquad/system.hpp"
#include "subquad/thresholds.hpp"

#endif
