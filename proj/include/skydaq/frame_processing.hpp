#pragma once

#include <vector>

#include "skydaq/frame.hpp"

// Burst denoising: a capture instant yields a stack of nominally identical
// frames; duplicated frames (buffer re-reads) and defective frames (garbage)
// are rejected by correlation against the rest, and the survivors averaged.

namespace skydaq {

// Where deviations are measured from when correlating two frames:
//  - EnsembleMean: from the pixelwise mean image of the whole stack. This
//    cancels the shared scene, so a defect-free stack decorrelates to
//    ~ -1/(N-1) and the defect filter then keeps only the best frame; with a
//    defect present the good frames cohere and the defect stands out at -1.
//  - PerFrameMean: classical image correlation (deviations from each frame's
//    own scalar mean). Structure dominates, good frames sit near +1, and a
//    defect-free stack passes through untouched. This is the variant that
//    actually attenuates noise on clean bursts.
enum class DeviationMode {
    EnsembleMean,
    PerFrameMean,
};

struct FilterOptions {
    double duplicate_tol = 1e-6;     // rho >= 1 - tol marks a duplicate pair
    double defect_threshold = 0.9;   // mean rho below this marks a defect
    DeviationMode mode = DeviationMode::EnsembleMean;
};

struct FrameStack {
    std::vector<Frame> frames;
    Frame mean_frame;                            // pixelwise mean of frames
    std::vector<std::vector<double>> pearson;    // filled when computed
};

// Pixelwise mean; timestamp is the mean of the input timestamps.
Frame ensemble_mean(const std::vector<Frame>& frames);

FrameStack make_stack(std::vector<Frame> frames);

// Pairwise correlation matrix over flattened pixels (all channels).
// Symmetric, unit diagonal. Throws DegenerateStack when a frame coincides
// with its reference exactly (zero deviation norm), reporting its index.
std::vector<std::vector<double>> pearson_matrix(const std::vector<Frame>& frames,
                                                DeviationMode mode = DeviationMode::EnsembleMean);

// Index-level filtering result, mapped to positions in the input stack.
struct FilterSelection {
    std::vector<int> kept;                       // ascending input indices
    std::vector<int> duplicate_drops;            // ascending input indices
    std::vector<int> defect_drops;               // in removal order
    std::vector<std::vector<double>> pearson;    // matrix over post-duplicate frames
    std::vector<int> pearson_index;              // input index per matrix row
};

// Rejection policy:
//   1. bitwise-identical frames: every later copy is dropped as a duplicate
//      (identical frames would otherwise poison the stack mean);
//   2. near-duplicates: pairs with rho >= 1 - duplicate_tol drop the
//      later-indexed frame;
//   3. defects: while the frame with the worst mean correlation against the
//      other survivors falls below defect_threshold, drop it (ties drop the
//      later index) and re-evaluate. The best-correlated frame is never
//      dropped, so at least one frame always survives.
FilterSelection select_frames(const std::vector<Frame>& frames, const FilterOptions& opts = {});

struct FilterResult {
    FrameStack stack;                 // survivors with their recomputed mean
    std::vector<int> kept;
    std::vector<int> duplicate_drops;
    std::vector<int> defect_drops;
};

FilterResult filter_stack(const std::vector<Frame>& frames, const FilterOptions& opts = {});

// Filter then average. A single-frame stack bypasses filtering. The output
// carries the earliest input timestamp (the capture instant).
Frame denoise(const std::vector<Frame>& frames, const FilterOptions& opts = {});

}  // namespace skydaq
