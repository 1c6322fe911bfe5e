#pragma once

#include "carnot/algebra.hpp"
#include "carnot/beta.hpp"
#include "carnot/carleson.hpp"
#include "carnot/group.hpp"
#include "carnot/io.hpp"
#include "carnot/lines.hpp"
#include "carnot/norms.hpp"
#include "carnot/tsp.hpp"
#include "carnot/verify.hpp"
