#pragma once

#include "cocycle_lab/errors.hpp"
#include "cocycle_lab/groupoid.hpp"
#include "cocycle_lab/transformation.hpp"
#include "cocycle_lab/linalg.hpp"
#include "cocycle_lab/bundle.hpp"
#include "cocycle_lab/meb.hpp"
#include "cocycle_lab/hull.hpp"
#include "cocycle_lab/solvers.hpp"
#include "cocycle_lab/growth.hpp"
#include "cocycle_lab/orbit_hull.hpp"
#include "cocycle_lab/convexity.hpp"
#include "cocycle_lab/scenario.hpp"
#include "cocycle_lab/generate.hpp"
#include "cocycle_lab/verify.hpp"
