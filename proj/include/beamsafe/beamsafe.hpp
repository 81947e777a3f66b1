#pragma once

#include "beamsafe/errors.hpp"
#include "beamsafe/units.hpp"
#include "beamsafe/numerics.hpp"
#include "beamsafe/gaussian_beam.hpp"
#include "beamsafe/transverse_modes.hpp"
#include "beamsafe/mode_presets.hpp"
#include "beamsafe/exposure_limits.hpp"
#include "beamsafe/optical_elements.hpp"
#include "beamsafe/safety_engine.hpp"
