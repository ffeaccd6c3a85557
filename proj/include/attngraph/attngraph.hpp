#pragma once

#include "attngraph/aggregate.hpp"
#include "attngraph/arborescence.hpp"
#include "attngraph/attn_io.hpp"
#include "attngraph/attn_model.hpp"
#include "attngraph/coincide.hpp"
#include "attngraph/cst.hpp"
#include "attngraph/cst_metrics.hpp"
#include "attngraph/errors.hpp"
#include "attngraph/graph_build.hpp"
#include "attngraph/graph_io.hpp"
#include "attngraph/head_stats.hpp"
#include "attngraph/matrix.hpp"
#include "attngraph/pipeline.hpp"
#include "attngraph/program_graph.hpp"
#include "attngraph/task_records.hpp"
