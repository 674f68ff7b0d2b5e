#pragma once

// Everything in one include.

#include "dioph/badness.hpp"
#include "dioph/counting.hpp"
#include "dioph/covers.hpp"
#include "dioph/error.hpp"
#include "dioph/fracsum.hpp"
#include "dioph/lattice.hpp"
#include "dioph/matrices.hpp"
#include "dioph/matrix.hpp"
#include "dioph/numerics.hpp"
#include "dioph/parallel.hpp"
#include "dioph/selberg.hpp"
