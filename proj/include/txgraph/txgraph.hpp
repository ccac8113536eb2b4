#pragma once

#include "txgraph/error.hpp"
#include "txgraph/records.hpp"
#include "txgraph/ingest.hpp"
#include "txgraph/explorer.hpp"
#include "txgraph/graph.hpp"
#include "txgraph/snapshot.hpp"
#include "txgraph/metrics.hpp"
#include "txgraph/fitting.hpp"
#include "txgraph/pipeline.hpp"
#include "txgraph/synthetic.hpp"
