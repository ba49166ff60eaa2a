#pragma once

#include "panolab/geometry.hpp"
#include "panolab/io.hpp"
#include "panolab/lora.hpp"
#include "panolab/metrics.hpp"
