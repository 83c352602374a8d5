#pragma once

#include "histories/builtins.hpp"
#include "histories/compiled.hpp"
#include "histories/composite.hpp"
#include "histories/distribution.hpp"
#include "histories/errors.hpp"
#include "histories/linalg.hpp"
#include "histories/paths.hpp"
#include "histories/probability.hpp"
#include "histories/propagator.hpp"
#include "histories/sampler.hpp"
#include "histories/scenario.hpp"
#include "histories/scenario_io.hpp"
#include "histories/spectral.hpp"
#include "histories/weak.hpp"
