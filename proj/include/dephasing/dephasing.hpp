#pragma once

#include "bloch.hpp"
#include "core.hpp"
#include "fano.hpp"
#include "inversion.hpp"
#include "mc_oracle.hpp"
#include "noise.hpp"
#include "ramsey.hpp"
#include "scattering.hpp"
