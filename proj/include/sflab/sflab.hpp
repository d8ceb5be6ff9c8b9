#pragma once

#include "sflab/basis.hpp"
#include "sflab/bessel.hpp"
#include "sflab/config.hpp"
#include "sflab/domain.hpp"
#include "sflab/pohozaev.hpp"
#include "sflab/quadrature.hpp"
#include "sflab/random.hpp"
#include "sflab/report.hpp"
#include "sflab/semilinear.hpp"
#include "sflab/spectral_function.hpp"
#include "sflab/subordination.hpp"
#include "sflab/suites.hpp"
