#pragma once

#include "anchorloc/scenario.hpp"

namespace anchorloc {

/// Drive the forward model along the scenario trajectory. Emits frames for
/// both radars on asynchronous jittered chirp clocks, IMU attitude records
/// with the injected clock offset, and dense ground truth. Deterministic
/// for a fixed scenario seed. Throws ValidationError when the scenario is
/// invalid.
MeasurementLog simulate_scenario(const Scenario& scn);

} // namespace anchorloc
