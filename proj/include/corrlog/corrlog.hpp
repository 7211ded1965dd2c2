#pragma once

#include "corrlog/errors.hpp"
#include "corrlog/matrix_types.hpp"
#include "corrlog/symkernel.hpp"
#include "corrlog/quadratic_form.hpp"
#include "corrlog/flat_geometry.hpp"
#include "corrlog/offlog.hpp"
#include "corrlog/logscaling.hpp"
#include "corrlog/trajectory.hpp"
#include "corrlog/baselines.hpp"
#include "corrlog/regression.hpp"
#include "corrlog/pipeline/windowing.hpp"
#include "corrlog/pipeline/synth.hpp"
#include "corrlog/pipeline/pca.hpp"
#include "corrlog/pipeline/io.hpp"
