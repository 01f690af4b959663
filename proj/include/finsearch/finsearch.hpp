#pragma once

// Umbrella header for the FinSearch engine. Offline pipelines can include
// individual headers instead; finsearch/services.hpp is the only one that
// drags in the HTTP stack.

#include "finsearch/benchmark.hpp"
#include "finsearch/config.hpp"
#include "finsearch/connectors.hpp"
#include "finsearch/dates.hpp"
#include "finsearch/engine.hpp"
#include "finsearch/error.hpp"
#include "finsearch/events.hpp"
#include "finsearch/executor.hpp"
#include "finsearch/fixtures.hpp"
#include "finsearch/graph.hpp"
#include "finsearch/llm.hpp"
#include "finsearch/planner.hpp"
#include "finsearch/prompts.hpp"
#include "finsearch/reporter.hpp"
#include "finsearch/services.hpp"
#include "finsearch/temporal.hpp"
#include "finsearch/time.hpp"
#include "finsearch/types.hpp"
