#pragma once

#include "meanrev/backtest.hpp"
#include "meanrev/csv.hpp"
#include "meanrev/errors.hpp"
#include "meanrev/estimators.hpp"
#include "meanrev/experiment.hpp"
#include "meanrev/linalg.hpp"
#include "meanrev/philox.hpp"
#include "meanrev/proxies.hpp"
#include "meanrev/sdp.hpp"
#include "meanrev/sparse_eig.hpp"
#include "meanrev/synth.hpp"
#include "meanrev/timeseries.hpp"
#include "meanrev/universe.hpp"
