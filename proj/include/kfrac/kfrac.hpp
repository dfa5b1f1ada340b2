#pragma once

#include "kfrac/error.hpp"
#include "kfrac/expr.hpp"
#include "kfrac/functions.hpp"
#include "kfrac/inequalities.hpp"
#include "kfrac/operator.hpp"
#include "kfrac/quadrature.hpp"
#include "kfrac/random.hpp"
#include "kfrac/special_functions.hpp"
