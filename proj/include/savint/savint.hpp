#pragma once

// Umbrella header: the whole library except the CLI front end.

#include "savint/baselines.hpp"
#include "savint/csv.hpp"
#include "savint/errors.hpp"
#include "savint/harness.hpp"
#include "savint/linalg.hpp"
#include "savint/problems.hpp"
#include "savint/reference.hpp"
#include "savint/sav_cpd.hpp"
#include "savint/sav_osde.hpp"
#include "savint/svg.hpp"
#include "savint/types.hpp"
