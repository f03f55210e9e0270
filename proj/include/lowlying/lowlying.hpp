#pragma once

#include "arith.hpp"
#include "cm_quartic.hpp"
#include "dirichlet.hpp"
#include "explicit_formula.hpp"
#include "lower_order.hpp"
#include "primes.hpp"
#include "quadfield.hpp"
#include "sweep.hpp"
#include "testfn.hpp"
