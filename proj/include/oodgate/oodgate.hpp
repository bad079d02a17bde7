#pragma once

#include "oodgate/error.hpp"
#include "oodgate/feature_store.hpp"
#include "oodgate/gaussian_stats.hpp"
#include "oodgate/auto_threshold.hpp"
#include "oodgate/cv_gate.hpp"
#include "oodgate/synth_bench.hpp"
#include "oodgate/json_io.hpp"
