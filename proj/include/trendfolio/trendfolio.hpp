#pragma once

#include "trendfolio/analytics.hpp"
#include "trendfolio/backtest.hpp"
#include "trendfolio/csv.hpp"
#include "trendfolio/date.hpp"
#include "trendfolio/error.hpp"
#include "trendfolio/market_data.hpp"
#include "trendfolio/pipeline.hpp"
#include "trendfolio/portfolio.hpp"
#include "trendfolio/results_io.hpp"
#include "trendfolio/returns.hpp"
#include "trendfolio/signals.hpp"
#include "trendfolio/synthetic.hpp"
