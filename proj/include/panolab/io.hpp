#pragma once

#include "panolab/io/atomic_write.hpp"
#include "panolab/io/frames.hpp"
#include "panolab/io/json_report.hpp"
#include "panolab/io/matrix_fixture.hpp"
#include "panolab/io/params.hpp"
#include "panolab/io/pfm.hpp"
#include "panolab/io/png.hpp"
#include "panolab/io/pose_csv.hpp"
