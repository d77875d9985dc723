#pragma once

#include "mcdiag/chain_core.hpp"
#include "mcdiag/diagnostics.hpp"
#include "mcdiag/ess.hpp"
#include "mcdiag/mcse.hpp"
#include "mcdiag/plots.hpp"
#include "mcdiag/report_io.hpp"
#include "mcdiag/rhat.hpp"
#include "mcdiag/simulate.hpp"
#include "mcdiag/transforms.hpp"
#include "mcdiag/version.hpp"
