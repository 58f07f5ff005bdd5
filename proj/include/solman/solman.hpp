#pragma once

#include "errors.hpp"
#include "tail.hpp"
#include "segment.hpp"
#include "segment_io.hpp"
#include "scalar.hpp"
#include "random.hpp"
#include "problem.hpp"
#include "transversal.hpp"
#include "almost_graph.hpp"
#include "dde.hpp"
