#pragma once

#include "basis.hpp"
#include "core_types.hpp"
#include "diagnostics.hpp"
#include "dynamics.hpp"
#include "hierarchy.hpp"
#include "integrator.hpp"
#include "interaction.hpp"
#include "io.hpp"
#include "model_spec.hpp"
#include "stability.hpp"
#include "sweep.hpp"
#include "trig.hpp"
