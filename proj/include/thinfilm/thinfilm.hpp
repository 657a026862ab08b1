#pragma once

#include "thinfilm/continuation.hpp"
#include "thinfilm/errors.hpp"
#include "thinfilm/grid.hpp"
#include "thinfilm/io.hpp"
#include "thinfilm/model.hpp"
#include "thinfilm/newton.hpp"
#include "thinfilm/spectral_iter.hpp"
#include "thinfilm/stability.hpp"
#include "thinfilm/threshold.hpp"

namespace thinfilm {
inline constexpr const char* kVersion = "0.1.0";
}
