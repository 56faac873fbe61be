#pragma once

namespace mwpose {

inline constexpr const char* kToolName = "mwpose";
inline constexpr const char* kVersion = "1.0.0";
// Bumped whenever the JSON report layout changes incompatibly.
inline constexpr int kReportSchemaVersion = 1;
// Identifies the deterministic RNG so published evaluation numbers stay
// replicable if the generator ever has to change.
inline constexpr const char* kRngName = "splitmix64-streams-v1";

}  // namespace mwpose
