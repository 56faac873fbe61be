#pragma once

// Method constants. Grid resolutions, the peak threshold, the refinement
// window, the filter bands and the evaluation protocol bounds are the
// published operating points of the method; the CLI exposes them as flags
// with exactly these defaults.
namespace mwpose::defaults {

inline constexpr double kHistogramResolutionDeg = 1.0;
inline constexpr double kSphereResolutionDeg = 1.0;
inline constexpr double kPeakThresholdFraction = 0.75;
inline constexpr double kRefineWindowDeg = 5.0;

// Horizontal-normal band: angle to z in [45, 135] degrees, inclusive.
inline constexpr double kHorizontalBandMinDeg = 45.0;
inline constexpr double kHorizontalBandMaxDeg = 135.0;

// Vertical-normal band: angle to z at most 40 degrees from either pole.
inline constexpr double kVerticalBandDeg = 40.0;
// The folded inclination grid consequently spans [0, 40] degrees.
inline constexpr double kInclinationExtentDeg = 40.0;

// Per-cell normal clustering tolerance on the folded sphere grid.
inline constexpr double kNormalClusterToleranceDeg = 2.0;
// Frames closer than this (mod 90) are reported as one Manhattan frame.
inline constexpr double kFrameMergeToleranceDeg = 2.0;

inline constexpr int kEvalTrials = 50;
inline constexpr double kEvalTiltBoundDeg = 30.0;
inline constexpr double kEvalGammaBoundDeg = 180.0;

inline constexpr double kSubsampleCellMeters = 0.02;
inline constexpr int kNormalEstimationK = 30;

}  // namespace mwpose::defaults
