#pragma once

#include "surfenv/core.hpp"
#include "surfenv/density.hpp"
#include "surfenv/simplex.hpp"
#include "surfenv/envelope.hpp"
#include "surfenv/geometry.hpp"
#include "surfenv/quadrature.hpp"
#include "surfenv/fields.hpp"
#include "surfenv/constructions.hpp"
#include "surfenv/checkers.hpp"
