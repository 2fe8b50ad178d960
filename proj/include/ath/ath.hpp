#pragma once

#include "ath/core.hpp"
#include "ath/stats.hpp"
#include "ath/thresholding.hpp"
#include "ath/forecast.hpp"
#include "ath/detect.hpp"
#include "ath/drift.hpp"
#include "ath/pipeline.hpp"
#include "ath/dataio.hpp"
#include "ath/eval.hpp"
#include "ath/config.hpp"
