#pragma once

#include "ssgp/numerics.hpp"
#include "ssgp/matrix.hpp"
#include "ssgp/kernels.hpp"
#include "ssgp/fbm.hpp"
#include "ssgp/covariance.hpp"
#include "ssgp/lamperti.hpp"
#include "ssgp/sampling.hpp"
#include "ssgp/equivalence.hpp"
