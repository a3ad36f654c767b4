#pragma once

#include "mdlregion/cluster_state.hpp"
#include "mdlregion/codelength.hpp"
#include "mdlregion/delaunay.hpp"
#include "mdlregion/enumerate.hpp"
#include "mdlregion/evaluation.hpp"
#include "mdlregion/ingest.hpp"
#include "mdlregion/optimizer.hpp"
#include "mdlregion/rng.hpp"
#include "mdlregion/serialize.hpp"
#include "mdlregion/spanning_tree.hpp"
#include "mdlregion/spatial_graph.hpp"
#include "mdlregion/symbol_matrix.hpp"
#include "mdlregion/synthetic.hpp"
