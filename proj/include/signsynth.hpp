#pragma once

#include "signsynth/augment.hpp"
#include "signsynth/compose.hpp"
#include "signsynth/config.hpp"
#include "signsynth/csv.hpp"
#include "signsynth/demo.hpp"
#include "signsynth/environment.hpp"
#include "signsynth/error.hpp"
#include "signsynth/execute.hpp"
#include "signsynth/homography.hpp"
#include "signsynth/image_io.hpp"
#include "signsynth/occlusion.hpp"
#include "signsynth/plan.hpp"
#include "signsynth/raster.hpp"
#include "signsynth/rng.hpp"
#include "signsynth/stats.hpp"
