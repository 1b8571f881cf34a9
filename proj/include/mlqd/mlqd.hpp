#pragma once

#include "array2d.hpp"
#include "config.hpp"
#include "cycles.hpp"
#include "error.hpp"
#include "grey.hpp"
#include "grids.hpp"
#include "loqd.hpp"
#include "moments.hpp"
#include "opacity_table.hpp"
#include "output.hpp"
#include "phys.hpp"
#include "problem.hpp"
#include "quadrature.hpp"
#include "transport.hpp"
#include "tridiag.hpp"
