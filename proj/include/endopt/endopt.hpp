#pragma once

#include "endopt/algorithms/abc.hpp"
#include "endopt/algorithms/admm.hpp"
#include "endopt/algorithms/merit.hpp"
#include "endopt/algorithms/push_sum.hpp"
#include "endopt/design.hpp"
#include "endopt/graph.hpp"
#include "endopt/graph_io.hpp"
#include "endopt/harness/config.hpp"
#include "endopt/harness/experiment.hpp"
#include "endopt/harness/rng.hpp"
#include "endopt/harness/scenario.hpp"
#include "endopt/layout.hpp"
#include "endopt/layout_io.hpp"
#include "endopt/problem_io.hpp"
#include "endopt/problems.hpp"
