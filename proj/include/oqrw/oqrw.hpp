#pragma once

#include "oqrw/analysis.hpp"
#include "oqrw/constructors.hpp"
#include "oqrw/error.hpp"
#include "oqrw/io.hpp"
#include "oqrw/matrix.hpp"
#include "oqrw/realization.hpp"
#include "oqrw/trajectory.hpp"
#include "oqrw/walk.hpp"
