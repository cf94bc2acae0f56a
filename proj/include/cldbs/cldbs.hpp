#pragma once

#include "cldbs/config.hpp"
#include "cldbs/control.hpp"
#include "cldbs/dataset_io.hpp"
#include "cldbs/dsp.hpp"
#include "cldbs/experiments.hpp"
#include "cldbs/metrics.hpp"
#include "cldbs/plant.hpp"
#include "cldbs/plot.hpp"
#include "cldbs/random.hpp"
#include "cldbs/time_series.hpp"
