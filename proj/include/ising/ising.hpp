#pragma once

#include "ising/conditions.hpp"
#include "ising/error.hpp"
#include "ising/estimators.hpp"
#include "ising/experiment.hpp"
#include "ising/io.hpp"
#include "ising/logistic.hpp"
#include "ising/metrics.hpp"
#include "ising/model.hpp"
#include "ising/random.hpp"
#include "ising/sampler.hpp"
