#pragma once

#include "panolab/metrics/farneback.hpp"
#include "panolab/metrics/motion.hpp"
#include "panolab/metrics/pose_stats.hpp"
#include "panolab/metrics/seam.hpp"
