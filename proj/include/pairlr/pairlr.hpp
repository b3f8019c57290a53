#pragma once

#include "pairlr/error.hpp"
#include "pairlr/counts.hpp"
#include "pairlr/core.hpp"
#include "pairlr/normal.hpp"
#include "pairlr/quantile.hpp"
#include "pairlr/random.hpp"
#include "pairlr/parallel.hpp"
#include "pairlr/intervals.hpp"
#include "pairlr/simulation.hpp"
#include "pairlr/samplesize.hpp"
#include "pairlr/io.hpp"
#include "pairlr/report.hpp"
