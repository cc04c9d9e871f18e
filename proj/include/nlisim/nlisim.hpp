#pragma once

#include "nlisim/analysis.hpp"
#include "nlisim/bench.hpp"
#include "nlisim/config_io.hpp"
#include "nlisim/errors.hpp"
#include "nlisim/model.hpp"
#include "nlisim/random.hpp"
#include "nlisim/scan.hpp"
#include "nlisim/scan_io.hpp"
#include "nlisim/sweep.hpp"
#include "nlisim/sweep_io.hpp"
#include "nlisim/units.hpp"
