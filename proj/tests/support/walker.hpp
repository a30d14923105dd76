#pragma once

// Physics-free reachability probe: breadth-first search over a 0.5 m floor
// grid from the spawn to any food. Walls are inflated by the agent's reach,
// holes block (except where a toppled plank would bridge them), gates that
// start open are passable.

#include "aai/arena.hpp"

namespace aai::testing {

struct WalkResult {
    bool reachable = false;
    int expanded = 0;
};

WalkResult oracle_walk(const ArenaSpec& spec);

}  // namespace aai::testing
