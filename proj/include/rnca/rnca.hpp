#pragma once

#include "rnca/applications.hpp"
#include "rnca/bounds_lab.hpp"
#include "rnca/component_models.hpp"
#include "rnca/csv.hpp"
#include "rnca/errors.hpp"
#include "rnca/kernel_features.hpp"
#include "rnca/model_io.hpp"
#include "rnca/numeric_core.hpp"
