#pragma once

#include "qnet/arrivals.hpp"
#include "qnet/capacity.hpp"
#include "qnet/core_queue.hpp"
#include "qnet/counterexamples.hpp"
#include "qnet/dpp.hpp"
#include "qnet/format.hpp"
#include "qnet/lp.hpp"
#include "qnet/markov_chain.hpp"
#include "qnet/network.hpp"
#include "qnet/replication.hpp"
#include "qnet/rng.hpp"
#include "qnet/sample_path.hpp"
#include "qnet/scenario.hpp"
#include "qnet/scenario_json.hpp"
#include "qnet/stability.hpp"
