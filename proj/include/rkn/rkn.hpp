#pragma once

#include "rkn/errors.hpp"
#include "rkn/scheme.hpp"
#include "rkn/linear_flow.hpp"
#include "rkn/system.hpp"
#include "rkn/splitting.hpp"
#include "rkn/extrapolation.hpp"
#include "rkn/integrate.hpp"
#include "rkn/problems.hpp"
#include "rkn/schrodinger.hpp"
#include "rkn/bench.hpp"
