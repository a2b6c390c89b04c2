#pragma once

#include <utility>

#include "aoi/model.hpp"

namespace aoi {

// Two sources, three sensors; sensors 1/2 observe one source each with
// probability p, sensor 3 observes both with probability 1-p. Perfect
// channels. Variant 'a' is stateless; 'b' drops sensor 3 and gives each
// source a two-state chain with mirrored alpha-transitions; 'c' combines
// both.
SystemSpec scenario_toy(char variant, double p, double alpha = 0.0);

// Four-zone ring patrolled by three AGVs; zones 1, 2 and 4 are covered by
// cameras with hit probability p, zone 3 is hidden. Adjacent-zone moves with
// probability alpha each, stay with 1-2*alpha.
SystemSpec scenario_small_factory(double alpha, double p);

// 8x8 grid with 10 AGVs and hierarchical sensor levels (64 + 16 + 4 + 1);
// level-l sensors hit cells in their zone with probability gamma^(l-1).
// Boundary cells absorb missing neighbors into the stay probability.
SystemSpec scenario_large_factory(double gamma, double alpha);

// Deterministic 5-state ring (zone 1 split into two holding sub-states) with
// three cameras at p = 1 and the initial condition of the motivating single
// round. The sensor ordering (C4, C1, C2) makes lowest-index tie-breaking
// reproduce the published myopic round.
std::pair<SystemSpec, SystemState> scenario_motivating();

}  // namespace aoi
