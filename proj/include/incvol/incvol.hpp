#pragma once

#include "incvol/error.hpp"
#include "incvol/estimators.hpp"
#include "incvol/falsify.hpp"
#include "incvol/generators.hpp"
#include "incvol/io.hpp"
#include "incvol/json_format.hpp"
#include "incvol/model_fit.hpp"
#include "incvol/optim.hpp"
#include "incvol/parallel.hpp"
#include "incvol/random.hpp"
#include "incvol/report.hpp"
#include "incvol/series.hpp"
#include "incvol/stats.hpp"
