#pragma once

#include "cgq/algebras.hpp"
#include "cgq/analysis.hpp"
#include "cgq/constrained.hpp"
#include "cgq/core.hpp"
#include "cgq/errors.hpp"
#include "cgq/geometry.hpp"
#include "cgq/open_system.hpp"
#include "cgq/reduced.hpp"
#include "cgq/rk4.hpp"
