#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "skydaq/frame.hpp"
#include "skydaq/frame_processing.hpp"

// Merges four grayscale frames of increasing exposure time into one 16-bit
// image: concentric radial regions around the sun take their pixels from
// successively longer exposures, region boundaries are feathered with a
// Gaussian, and per-exposure gains are chained so intensities stay continuous
// across each boundary.

namespace skydaq {

// Binary indicator grid over a square D x D image.
struct BinaryMask {
    int size = 0;
    std::vector<std::uint8_t> cells;  // row-major, values 0 or 1

    std::uint8_t at(int y, int x) const { return cells[static_cast<std::size_t>(y) * size + x]; }
    std::size_t count() const;
};

// Real-valued grid (smoothed masks, region weights).
struct RealGrid {
    int size = 0;
    std::vector<double> cells;

    double at(int y, int x) const { return cells[static_cast<std::size_t>(y) * size + x]; }
};

// Square convolution kernel, entries summing to 1.
struct Kernel {
    int size = 0;
    std::vector<double> weights;

    double at(int y, int x) const { return weights[static_cast<std::size_t>(y) * size + x]; }
};

struct FusionConfig {
    std::array<double, 4> radii_px{5.0, 6.25, 12.5, 25.0};
    double gaussian_sigma = 7.5;
    int kernel_size = 15;
    double ring_epsilon = 1.4142135623730951;  // sqrt(2)
    double regularizer = 1.0;                  // lambda, one 8-bit LSB
    std::array<double, 3> luma_weights{0.299, 0.587, 0.114};
    double max_amplitude = 225.0;              // fused value that maps to full scale
    int output_bit_depth = 16;
    int image_size = 450;                      // D, square frames
    double sun_center_x = -1.0;                // < 0 means D / 2
    double sun_center_y = -1.0;
    double fisheye_radius = -1.0;              // < 0 means D / 2

    double center_x() const { return sun_center_x < 0 ? image_size * 0.5 : sun_center_x; }
    double center_y() const { return sun_center_y < 0 ? image_size * 0.5 : sun_center_y; }
    double lens_radius() const { return fisheye_radius < 0 ? image_size * 0.5 : fisheye_radius; }
};

// Throws DomainError unless radii are strictly increasing and above
// ring_epsilon, the kernel side is odd and positive, and sigma/lambda > 0.
void validate_config(const FusionConfig& config);

// Four frames of one capture instant, ordered by strictly increasing
// exposure time. For fusion they must be single-channel, D x D, and already
// regularized (every intensity >= lambda).
struct ExposureSet {
    std::vector<Frame> frames;
    std::array<double, 4> exposure_times_ms{1.0, 4.0, 12.0, 28.0};
    double capture_instant = 0.0;  // unix seconds
};

// Adds lambda to every value of every channel (keeps intensities away from
// zero so ring means can be divided by).
Frame regularize(const Frame& frame, double lambda);

// Luma projection of a 3-channel frame. Throws ChannelMismatch otherwise.
Frame to_grayscale(const Frame& frame, const std::array<double, 3>& beta = {0.299, 0.587, 0.114});

// Disk indicator: cell (y, x) is set iff its squared grid distance from
// (center_x, center_y) is <= radius^2.
BinaryMask radial_mask(double radius, double center_x, double center_y, int size);

// exp(-(x^2 + y^2) / (2 sigma^2)) on the centered size x size lattice,
// normalized to sum exactly to 1. Size must be odd.
Kernel gaussian_kernel(double sigma, int size);

// Plain 2-D convolution; borders handled by edge replication, so a constant
// mask stays constant.
RealGrid smooth_mask(const BinaryMask& mask, const Kernel& kernel);

// One-cell-wide annuli hugging the circle of the given radius: `outer` lies
// just beyond it (distance in (r, r + eps]), `inner` just within (distance in
// (r - eps, r]). Throws EmptyRing when either annulus holds no cells.
struct EdgeRings {
    BinaryMask outer;  // R1
    BinaryMask inner;  // R2
};
EdgeRings edge_rings(double radius, double eps, double center_x, double center_y, int size);

// Everything derivable from the configuration alone, built once and shared:
// masks and their smoothed versions at each radius, the per-region blending
// weights, and the boundary rings used to chain the gains. Weights are the
// smoothed indicators of the five concentric regions (disk, three annuli,
// exterior); because smoothing is linear they telescope from the smoothed
// disk masks and sum to 1 at every pixel.
struct FusionTables {
    FusionConfig config;
    Kernel kernel;
    std::vector<BinaryMask> masks;     // 4, at radii_px
    std::vector<RealGrid> smoothed;    // 4, smoothed disk masks
    std::vector<RealGrid> weights;     // 5 region weights, partition of unity
    std::vector<EdgeRings> rings;      // 3, at radii_px[0..2]
};
FusionTables build_tables(const FusionConfig& config);

// Per-exposure gains: alpha_1 = 1, and each later gain matches the mean
// intensity just inside a region boundary (ring R2 of the shorter exposure)
// with the mean just outside it (ring R1 of the longer one). Ring means are
// used rather than sums so identical frames chain to unit gain. Throws
// DivisionDegenerate when a ring mean falls below lambda / 2.
struct FusionWeights {
    std::array<double, 4> alphas{1.0, 1.0, 1.0, 1.0};
};
FusionWeights compute_alphas(const ExposureSet& set, const FusionTables& tables);

struct FusionStats {
    FusionWeights weights;
    double saturated_fraction = 0.0;   // of pixels inside the lens circle
    bool saturation_warning = false;   // saturated_fraction > 1%
};

// Blend the four gain-scaled exposures with the region weights (the exterior
// region reuses the longest exposure), rescale so max_amplitude maps to full
// 16-bit range, round, clamp, and zero everything outside the lens circle.
// The result carries the set's capture instant as its timestamp.
Frame fuse(const ExposureSet& set, const FusionTables& tables, FusionStats* stats = nullptr);

// Full visible pipeline for one capture instant: the repeats of each exposure
// group are denoised down to one frame, regularized, projected to grayscale,
// and fused. `raw` holds one vector of repeated 3-channel frames per exposure
// time, ordered as in the set. Errors are rethrown as StageError naming the
// failing stage.
Frame process_visible_capture(const std::vector<std::vector<Frame>>& raw,
                              const FusionTables& tables,
                              const FilterOptions& filter = {1e-6, 0.9, DeviationMode::PerFrameMean});

}  // namespace skydaq
