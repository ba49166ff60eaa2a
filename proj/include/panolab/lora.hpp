#pragma once

#include "panolab/lora/adapter.hpp"
#include "panolab/lora/experiments.hpp"
#include "panolab/lora/network.hpp"
#include "panolab/lora/rank.hpp"
