#include "skydaq/exposure_fusion.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace skydaq {

namespace {

double sq(double v) { return v * v; }

// Mean intensity of a frame over the set cells of a binary mask.
double ring_mean(const Frame& frame, const BinaryMask& ring) {
    double sum = 0.0;
    std::size_t n = 0;
    const std::uint8_t* m = ring.cells.data();
    const float* px = frame.pixels.data();
    for (std::size_t k = 0; k < ring.cells.size(); ++k)
        if (m[k]) {
            sum += px[k];
            ++n;
        }
    return sum / static_cast<double>(n);  // rings are never empty (edge_rings throws)
}

void check_exposure_set(const ExposureSet& set, const FusionConfig& config) {
    if (set.frames.size() != 4) throw DomainError("exposure set must hold exactly four frames");
    for (std::size_t e = 1; e < set.exposure_times_ms.size(); ++e)
        if (!(set.exposure_times_ms[e] > set.exposure_times_ms[e - 1]))
            throw DomainError("exposure times must be strictly increasing");
    for (const Frame& f : set.frames) {
        if (f.channels != 1) throw ChannelMismatch("fusion expects single-channel frames");
        if (f.width != config.image_size || f.height != config.image_size)
            throw ShapeMismatch("exposure frame size disagrees with the configuration");
    }
}

}  // namespace

std::size_t BinaryMask::count() const {
    std::size_t n = 0;
    for (std::uint8_t c : cells) n += c;
    return n;
}

void validate_config(const FusionConfig& config) {
    if (config.image_size <= 0) throw DomainError("image size must be positive");
    if (!(config.gaussian_sigma > 0)) throw DomainError("gaussian sigma must be positive");
    if (config.kernel_size <= 0 || config.kernel_size % 2 == 0)
        throw DomainError("kernel size must be odd and positive");
    if (!(config.regularizer > 0)) throw DomainError("regularizer must be positive");
    if (!(config.ring_epsilon > 0)) throw DomainError("ring width must be positive");
    double prev = config.ring_epsilon;
    for (double r : config.radii_px) {
        if (!(r > prev)) throw DomainError("radii must be strictly increasing and exceed the ring width");
        prev = r;
    }
    double wsum = config.luma_weights[0] + config.luma_weights[1] + config.luma_weights[2];
    if (std::abs(wsum - 1.0) > 1e-9) throw DomainError("luma weights must sum to 1");
    if (!(config.max_amplitude > 0)) throw DomainError("max amplitude must be positive");
    if (config.output_bit_depth != 8 && config.output_bit_depth != 16)
        throw DomainError("output bit depth must be 8 or 16");
}

Frame regularize(const Frame& frame, double lambda) {
    if (!(lambda > 0)) throw DomainError("regularizer must be positive");
    Frame out = frame;
    float l = static_cast<float>(lambda);
    for (float& v : out.pixels) v += l;
    return out;
}

Frame to_grayscale(const Frame& frame, const std::array<double, 3>& beta) {
    if (frame.channels != 3) throw ChannelMismatch("luma projection expects a 3-channel frame");
    Frame out = Frame::make(frame.width, frame.height, 1, 0.0f, frame.timestamp, frame.bit_depth);
    std::size_t n = out.pixels.size();
    for (std::size_t k = 0; k < n; ++k)
        out.pixels[k] = static_cast<float>(beta[0] * frame.pixels[3 * k] +
                                           beta[1] * frame.pixels[3 * k + 1] +
                                           beta[2] * frame.pixels[3 * k + 2]);
    return out;
}

BinaryMask radial_mask(double radius, double center_x, double center_y, int size) {
    if (radius < 0) throw DomainError("mask radius must be non-negative");
    if (size <= 0) throw DomainError("mask size must be positive");
    BinaryMask m;
    m.size = size;
    m.cells.assign(static_cast<std::size_t>(size) * size, 0);
    double r2 = radius * radius;
    for (int y = 0; y < size; ++y) {
        double dy2 = sq(y - center_y);
        for (int x = 0; x < size; ++x)
            if (dy2 + sq(x - center_x) <= r2) m.cells[static_cast<std::size_t>(y) * size + x] = 1;
    }
    return m;
}

Kernel gaussian_kernel(double sigma, int size) {
    if (!(sigma > 0)) throw DomainError("gaussian sigma must be positive");
    if (size <= 0 || size % 2 == 0) throw DomainError("kernel size must be odd and positive");
    Kernel k;
    k.size = size;
    k.weights.resize(static_cast<std::size_t>(size) * size);
    int half = size / 2;
    double inv = 1.0 / (2.0 * sigma * sigma);
    double sum = 0.0;
    for (int y = -half; y <= half; ++y)
        for (int x = -half; x <= half; ++x) {
            double w = std::exp(-(sq(x) + sq(y)) * inv);
            k.weights[static_cast<std::size_t>(y + half) * size + (x + half)] = w;
            sum += w;
        }
    for (double& w : k.weights) w /= sum;
    return k;
}

RealGrid smooth_mask(const BinaryMask& mask, const Kernel& kernel) {
    RealGrid out;
    out.size = mask.size;
    out.cells.resize(mask.cells.size());
    int n = mask.size;
    int half = kernel.size / 2;
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            double acc = 0.0;
            for (int dy = -half; dy <= half; ++dy) {
                int sy = std::clamp(y + dy, 0, n - 1);  // edge replication
                const std::uint8_t* row = mask.cells.data() + static_cast<std::size_t>(sy) * n;
                const double* krow = kernel.weights.data() + static_cast<std::size_t>(dy + half) * kernel.size;
                for (int dx = -half; dx <= half; ++dx) {
                    int sx = std::clamp(x + dx, 0, n - 1);
                    acc += krow[dx + half] * row[sx];
                }
            }
            out.cells[static_cast<std::size_t>(y) * n + x] = acc;
        }
    return out;
}

EdgeRings edge_rings(double radius, double eps, double center_x, double center_y, int size) {
    if (!(radius > eps)) throw DomainError("ring radius must exceed the ring width");
    BinaryMask at = radial_mask(radius, center_x, center_y, size);
    BinaryMask grown = radial_mask(radius + eps, center_x, center_y, size);
    BinaryMask shrunk = radial_mask(radius - eps, center_x, center_y, size);

    EdgeRings rings;
    rings.outer.size = size;
    rings.inner.size = size;
    rings.outer.cells.resize(at.cells.size());
    rings.inner.cells.resize(at.cells.size());
    for (std::size_t k = 0; k < at.cells.size(); ++k) {
        rings.outer.cells[k] = grown.cells[k] ^ at.cells[k];
        rings.inner.cells[k] = at.cells[k] ^ shrunk.cells[k];
    }
    if (rings.outer.count() == 0 || rings.inner.count() == 0)
        throw EmptyRing("boundary annulus holds no cells at radius " + std::to_string(radius));
    return rings;
}

FusionTables build_tables(const FusionConfig& config) {
    validate_config(config);
    FusionTables t;
    t.config = config;
    t.kernel = gaussian_kernel(config.gaussian_sigma, config.kernel_size);

    double cx = config.center_x();
    double cy = config.center_y();
    int d = config.image_size;
    for (double r : config.radii_px) {
        t.masks.push_back(radial_mask(r, cx, cy, d));
        t.smoothed.push_back(smooth_mask(t.masks.back(), t.kernel));
    }
    for (int e = 0; e < 3; ++e)
        t.rings.push_back(edge_rings(config.radii_px[e], config.ring_epsilon, cx, cy, d));

    // Region weights: smoothed indicator of each concentric region. Smoothing
    // is linear, so these are differences of the smoothed disk masks; the
    // exterior takes the remainder and the five sum to 1 at every cell.
    std::size_t cells = t.smoothed[0].cells.size();
    for (int e = 0; e < 5; ++e) {
        RealGrid w;
        w.size = d;
        w.cells.resize(cells);
        t.weights.push_back(std::move(w));
    }
    for (std::size_t k = 0; k < cells; ++k) {
        double prev = 0.0;
        for (int e = 0; e < 4; ++e) {
            double cur = t.smoothed[e].cells[k];
            t.weights[e].cells[k] = std::max(0.0, cur - prev);
            prev = cur;
        }
        t.weights[4].cells[k] = std::max(0.0, 1.0 - prev);
    }
    return t;
}

FusionWeights compute_alphas(const ExposureSet& set, const FusionTables& tables) {
    check_exposure_set(set, tables.config);
    double floor = tables.config.regularizer / 2.0;

    FusionWeights w;
    for (int e = 0; e < 3; ++e) {
        double inside = ring_mean(set.frames[e], tables.rings[e].inner);
        double outside = ring_mean(set.frames[e + 1], tables.rings[e].outer);
        if (inside < floor || outside < floor)
            throw DivisionDegenerate("ring mean below half the regularizer at radius " +
                                     std::to_string(tables.config.radii_px[e]));
        w.alphas[e + 1] = w.alphas[e] * inside / outside;
    }
    return w;
}

Frame fuse(const ExposureSet& set, const FusionTables& tables, FusionStats* stats) {
    check_exposure_set(set, tables.config);
    FusionWeights gains = compute_alphas(set, tables);

    const FusionConfig& cfg = tables.config;
    int d = cfg.image_size;
    double full = std::pow(2.0, cfg.output_bit_depth) - 1.0;
    double scale = full / cfg.max_amplitude;
    double lens2 = sq(cfg.lens_radius());
    double cx = cfg.center_x();
    double cy = cfg.center_y();

    Frame out = Frame::make(d, d, 1, 0.0f, set.capture_instant, cfg.output_bit_depth);
    std::size_t saturated = 0;
    std::size_t valid = 0;
    std::size_t k = 0;
    for (int y = 0; y < d; ++y) {
        double dy2 = sq(y - cy);
        for (int x = 0; x < d; ++x, ++k) {
            if (dy2 + sq(x - cx) > lens2) continue;  // outside the lens: stays 0
            ++valid;
            double v = 0.0;
            for (int e = 0; e < 4; ++e)
                v += tables.weights[e].cells[k] * gains.alphas[e] * set.frames[e].pixels[k];
            v += tables.weights[4].cells[k] * gains.alphas[3] * set.frames[3].pixels[k];
            double q = std::round(v * scale);
            if (q > full) {
                q = full;
                ++saturated;
            }
            out.pixels[k] = static_cast<float>(std::max(0.0, q));
        }
    }

    if (stats) {
        stats->weights = gains;
        stats->saturated_fraction =
            valid ? static_cast<double>(saturated) / static_cast<double>(valid) : 0.0;
        stats->saturation_warning = stats->saturated_fraction > 0.01;
    }
    return out;
}

Frame process_visible_capture(const std::vector<std::vector<Frame>>& raw,
                              const FusionTables& tables, const FilterOptions& filter) {
    if (raw.size() != 4) throw DomainError("expected one frame group per exposure time");

    ExposureSet set;
    set.capture_instant = 0.0;
    bool first = true;
    for (std::size_t e = 0; e < raw.size(); ++e) {
        if (raw[e].empty()) throw DomainError("exposure group " + std::to_string(e) + " is empty");
        for (const Frame& f : raw[e]) {
            if (first || f.timestamp < set.capture_instant) set.capture_instant = f.timestamp;
            first = false;
        }
        std::string stage = "exposure group " + std::to_string(e);
        try {
            Frame denoised = denoise(raw[e], filter);
            Frame gray = denoised.channels == 3
                             ? to_grayscale(regularize(denoised, tables.config.regularizer),
                                            tables.config.luma_weights)
                             : regularize(denoised, tables.config.regularizer);
            set.frames.push_back(std::move(gray));
        } catch (const StageError&) {
            throw;
        } catch (const Error& e2) {
            throw StageError(stage, e2.what());
        }
    }
    try {
        return fuse(set, tables);
    } catch (const Error& e2) {
        throw StageError("fuse", e2.what());
    }
}

}  // namespace skydaq
