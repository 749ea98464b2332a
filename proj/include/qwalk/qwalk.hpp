#pragma once

#include "qwalk/combinatorics.hpp"
#include "qwalk/cost_ledger.hpp"
#include "qwalk/cost_model.hpp"
#include "qwalk/distinctness/collisions.hpp"
#include "qwalk/distinctness/garbage.hpp"
#include "qwalk/distinctness/instance.hpp"
#include "qwalk/distinctness/setup.hpp"
#include "qwalk/distinctness/solver.hpp"
#include "qwalk/distinctness/tripartition.hpp"
#include "qwalk/errors.hpp"
#include "qwalk/hash_family.hpp"
#include "qwalk/history_set.hpp"
#include "qwalk/markov_chain.hpp"
#include "qwalk/nested_update.hpp"
#include "qwalk/random.hpp"
#include "qwalk/version.hpp"
#include "qwalk/walk_quantize.hpp"
