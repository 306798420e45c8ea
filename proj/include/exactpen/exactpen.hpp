#pragma once

#include "exactpen/corpus.hpp"
#include "exactpen/errors.hpp"
#include "exactpen/expression.hpp"
#include "exactpen/ext_real.hpp"
#include "exactpen/geometry.hpp"
#include "exactpen/global_analysis.hpp"
#include "exactpen/local_analysis.hpp"
#include "exactpen/minimizer.hpp"
#include "exactpen/modulus.hpp"
#include "exactpen/perturbation.hpp"
#include "exactpen/problem.hpp"
#include "exactpen/schedule.hpp"
#include "exactpen/solver.hpp"
#include "exactpen/stationarity.hpp"
