#pragma once

#include "lmcca/classify.hpp"
#include "lmcca/dataset_io.hpp"
#include "lmcca/errors.hpp"
#include "lmcca/experiment.hpp"
#include "lmcca/features.hpp"
#include "lmcca/fusion.hpp"
#include "lmcca/linalg.hpp"
#include "lmcca/properties.hpp"
