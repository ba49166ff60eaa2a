#pragma once

#include "panolab/geometry/camera.hpp"
#include "panolab/geometry/sampling.hpp"
#include "panolab/geometry/sphere.hpp"
#include "panolab/geometry/warp.hpp"
