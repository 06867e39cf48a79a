// telegraph.hpp: umbrella header for the telegraph dephasing library

#pragma once

#include "telegraph/cubic.hpp"
#include "telegraph/decoherence.hpp"
#include "telegraph/dynamics.hpp"
#include "telegraph/geometry.hpp"
#include "telegraph/model.hpp"
#include "telegraph/nonmarkov.hpp"
#include "telegraph/ode.hpp"
#include "telegraph/oracles.hpp"
#include "telegraph/quadrature.hpp"
#include "telegraph/runner.hpp"
