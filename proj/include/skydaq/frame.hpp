#pragma once

#include <cstddef>
#include <vector>

#include "skydaq/errors.hpp"

namespace skydaq {

// One image: row-major, channel-interleaved real intensities. Pixel values
// are non-negative; bit_depth records the source quantization (8 or 16) and
// sets the legal ceiling when a frame is written back to disk.
struct Frame {
    int width = 0;
    int height = 0;
    int channels = 1;
    int bit_depth = 16;
    double timestamp = 0.0;  // unix seconds of capture
    std::vector<float> pixels;

    static Frame make(int width, int height, int channels = 1, float fill = 0.0f,
                      double timestamp = 0.0, int bit_depth = 16) {
        if (width <= 0 || height <= 0 || channels <= 0)
            throw DomainError("frame dimensions must be positive");
        Frame f;
        f.width = width;
        f.height = height;
        f.channels = channels;
        f.bit_depth = bit_depth;
        f.timestamp = timestamp;
        f.pixels.assign(static_cast<std::size_t>(width) * height * channels, fill);
        return f;
    }

    std::size_t index(int y, int x, int c = 0) const {
        return (static_cast<std::size_t>(y) * width + x) * channels + c;
    }
    float& at(int y, int x, int c = 0) { return pixels[index(y, x, c)]; }
    float at(int y, int x, int c = 0) const { return pixels[index(y, x, c)]; }
    std::size_t value_count() const { return pixels.size(); }

    bool same_shape(const Frame& o) const {
        return width == o.width && height == o.height && channels == o.channels;
    }
};

// Full invariant check (finite, non-negative, consistent buffer size).
void validate(const Frame& f);

}  // namespace skydaq
