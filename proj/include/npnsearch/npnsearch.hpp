#pragma once

#include "npnsearch/bench.hpp"
#include "npnsearch/errors.hpp"
#include "npnsearch/gauss.hpp"
#include "npnsearch/ges.hpp"
#include "npnsearch/graph.hpp"
#include "npnsearch/metrics.hpp"
#include "npnsearch/npn.hpp"
#include "npnsearch/pc.hpp"
#include "npnsearch/semsim.hpp"
