#pragma once

#include "projrec/numerics.hpp"
#include "projrec/geometry.hpp"
#include "projrec/reconstruction.hpp"
#include "projrec/epipolar.hpp"
#include "projrec/decision.hpp"
#include "projrec/synth.hpp"
