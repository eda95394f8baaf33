#pragma once

#include "glfr/censored.hpp"
#include "glfr/common_scale.hpp"
#include "glfr/distribution.hpp"
#include "glfr/error.hpp"
#include "glfr/general.hpp"
#include "glfr/io.hpp"
#include "glfr/known_scale.hpp"
#include "glfr/likelihood.hpp"
#include "glfr/numerics.hpp"
#include "glfr/parallel.hpp"
#include "glfr/posterior.hpp"
#include "glfr/random.hpp"
#include "glfr/simulation.hpp"
