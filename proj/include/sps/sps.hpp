#pragma once

#include "sps/error.hpp"
#include "sps/vector.hpp"
#include "sps/random.hpp"
#include "sps/objectives/objective.hpp"
#include "sps/objectives/logistic.hpp"
#include "sps/objectives/quadratic.hpp"
#include "sps/objectives/absolute.hpp"
#include "sps/objectives/generators.hpp"
#include "sps/objectives/reference.hpp"
#include "sps/steppers.hpp"
#include "sps/oracles.hpp"
#include "sps/data_io.hpp"
#include "sps/problems.hpp"
#include "sps/runner.hpp"
#include "sps/config.hpp"
