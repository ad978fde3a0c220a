#pragma once

#include "specdist/types.hpp"
#include "specdist/rng.hpp"
#include "specdist/graph.hpp"
#include "specdist/mesh.hpp"
#include "specdist/shapes.hpp"
#include "specdist/operators.hpp"
#include "specdist/eigensolver.hpp"
#include "specdist/basis.hpp"
#include "specdist/oracles.hpp"
#include "specdist/sampler.hpp"
#include "specdist/pipeline.hpp"
#include "specdist/metrics.hpp"
