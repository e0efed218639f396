#pragma once

#include "sta/classical.hpp"
#include "sta/error.hpp"
#include "sta/floquet.hpp"
#include "sta/gauge.hpp"
#include "sta/iontrap.hpp"
#include "sta/linalg.hpp"
#include "sta/parallel.hpp"
#include "sta/propagator.hpp"
#include "sta/rescaling.hpp"
