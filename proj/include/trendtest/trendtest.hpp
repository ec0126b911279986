#pragma once

// Umbrella header.

#include "trendtest/bootstrap.hpp"
#include "trendtest/counts.hpp"
#include "trendtest/dataset.hpp"
#include "trendtest/exact.hpp"
#include "trendtest/io.hpp"
#include "trendtest/normal.hpp"
#include "trendtest/rng.hpp"
#include "trendtest/simulation.hpp"
#include "trendtest/tables.hpp"
#include "trendtest/version.hpp"
