#pragma once

#include "quasispec/characteristic.hpp"
#include "quasispec/chebyshev.hpp"
#include "quasispec/core.hpp"
#include "quasispec/exterior.hpp"
#include "quasispec/free_case.hpp"
#include "quasispec/identities.hpp"
#include "quasispec/inversion.hpp"
#include "quasispec/model.hpp"
#include "quasispec/parallel.hpp"
#include "quasispec/propagator.hpp"
#include "quasispec/rootfinder.hpp"
