#pragma once

#include "dioph/numerics/ball.hpp"
#include "dioph/numerics/bigfloat.hpp"
#include "dioph/numerics/certified_real.hpp"
#include "dioph/numerics/dword.hpp"
#include "dioph/numerics/fixed_frac.hpp"
#include "dioph/numerics/precision.hpp"
#include "dioph/numerics/surd.hpp"
