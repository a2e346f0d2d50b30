// Umbrella header.

#pragma once

#include "rok/errors.hpp"
#include "rok/gaussian.hpp"
#include "rok/json_io.hpp"
#include "rok/kernel.hpp"
#include "rok/kolmogorov.hpp"
#include "rok/matrix.hpp"
#include "rok/moment.hpp"
#include "rok/rng.hpp"
