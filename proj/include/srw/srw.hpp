#pragma once

#include "srw/config.hpp"
#include "srw/detection.hpp"
#include "srw/errors.hpp"
#include "srw/experiment.hpp"
#include "srw/geometry.hpp"
#include "srw/mobility.hpp"
#include "srw/parallel.hpp"
#include "srw/percolation.hpp"
#include "srw/random.hpp"
#include "srw/sampling.hpp"
#include "srw/stationary.hpp"
#include "srw/stats.hpp"
#include "srw/trace.hpp"
