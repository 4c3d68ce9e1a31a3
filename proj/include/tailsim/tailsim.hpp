#pragma once

// Tail simulation for monotone targets of bounded variables: guaranteed tail
// draws with importance scores, equal-score stage sampling, covering-region
// rejection sampling, a Monte Carlo baseline, exact oracles, and weighted
// tail CDF assembly.

#include "tailsim/baseline.hpp"
#include "tailsim/equal_scores.hpp"
#include "tailsim/errors.hpp"
#include "tailsim/estimator.hpp"
#include "tailsim/model.hpp"
#include "tailsim/no_rejection.hpp"
#include "tailsim/oracles.hpp"
#include "tailsim/random.hpp"
#include "tailsim/reduced_rejection.hpp"
#include "tailsim/sample.hpp"
#include "tailsim/target.hpp"
