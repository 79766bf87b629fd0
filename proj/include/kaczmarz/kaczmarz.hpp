#pragma once

#include "kaczmarz/controls.hpp"
#include "kaczmarz/error.hpp"
#include "kaczmarz/hypothesis.hpp"
#include "kaczmarz/io.hpp"
#include "kaczmarz/linalg.hpp"
#include "kaczmarz/problems.hpp"
#include "kaczmarz/random.hpp"
#include "kaczmarz/solver.hpp"
#include "kaczmarz/state.hpp"
