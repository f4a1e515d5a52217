#pragma once

#include "epmp/annealing.hpp"
#include "epmp/arnoldi.hpp"
#include "epmp/bench.hpp"
#include "epmp/error.hpp"
#include "epmp/linalg.hpp"
#include "epmp/matrix_market.hpp"
#include "epmp/parallel.hpp"
#include "epmp/solver.hpp"
