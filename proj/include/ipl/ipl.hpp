#pragma once

#include "ipl/errors.hpp"
#include "ipl/specfun.hpp"
#include "ipl/spectral.hpp"
#include "ipl/optim.hpp"
#include "ipl/heat1d.hpp"
#include "ipl/tank.hpp"
#include "ipl/born.hpp"
#include "ipl/radon.hpp"
#include "ipl/io.hpp"
