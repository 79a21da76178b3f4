#include "skydaq/frame_processing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <numeric>

namespace skydaq {

namespace {

void check_stack_shape(const std::vector<Frame>& frames) {
    if (frames.empty()) throw EmptyStack("frame stack is empty");
    for (std::size_t i = 1; i < frames.size(); ++i)
        if (!frames[i].same_shape(frames[0]))
            throw ShapeMismatch("stack frames disagree in shape");
}

// Mean image in double precision, flattened.
std::vector<double> mean_image(const std::vector<Frame>& frames,
                               const std::vector<int>& indices) {
    std::size_t p = frames[indices[0]].value_count();
    std::vector<double> m(p, 0.0);
    for (int idx : indices) {
        const float* src = frames[idx].pixels.data();
        for (std::size_t k = 0; k < p; ++k) m[k] += src[k];
    }
    double inv = 1.0 / static_cast<double>(indices.size());
    for (std::size_t k = 0; k < p; ++k) m[k] *= inv;
    return m;
}

Frame mean_frame_of(const std::vector<Frame>& frames, const std::vector<int>& indices) {
    const Frame& proto = frames[indices[0]];
    Frame out = Frame::make(proto.width, proto.height, proto.channels, 0.0f, 0.0, proto.bit_depth);
    std::vector<double> m = mean_image(frames, indices);
    double tsum = 0.0;
    for (int idx : indices) tsum += frames[idx].timestamp;
    out.timestamp = tsum / static_cast<double>(indices.size());
    for (std::size_t k = 0; k < m.size(); ++k) out.pixels[k] = static_cast<float>(m[k]);
    return out;
}

// Pairwise deviation dot products, blocked so all rows of the working set
// stay cache-resident. dev holds n rows of p doubles.
std::vector<double> gram(const std::vector<double>& dev, std::size_t n, std::size_t p) {
    std::vector<double> g(n * n, 0.0);
    constexpr std::size_t kBlock = 4096;
    for (std::size_t p0 = 0; p0 < p; p0 += kBlock) {
        std::size_t p1 = std::min(p, p0 + kBlock);
        for (std::size_t i = 0; i < n; ++i) {
            const double* a = dev.data() + i * p;
            for (std::size_t j = i; j < n; ++j) {
                const double* b = dev.data() + j * p;
                double s = 0.0;
                for (std::size_t k = p0; k < p1; ++k) s += a[k] * b[k];
                g[i * n + j] += s;
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) g[i * n + j] = g[j * n + i];
    return g;
}

std::vector<std::vector<double>> pearson_of(const std::vector<Frame>& frames,
                                            const std::vector<int>& indices,
                                            DeviationMode mode) {
    std::size_t n = indices.size();
    std::size_t p = frames[indices[0]].value_count();

    std::vector<double> dev(n * p);
    if (mode == DeviationMode::EnsembleMean) {
        std::vector<double> m = mean_image(frames, indices);
        for (std::size_t i = 0; i < n; ++i) {
            const float* src = frames[indices[i]].pixels.data();
            double* d = dev.data() + i * p;
            for (std::size_t k = 0; k < p; ++k) d[k] = src[k] - m[k];
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const float* src = frames[indices[i]].pixels.data();
            double mean = 0.0;
            for (std::size_t k = 0; k < p; ++k) mean += src[k];
            mean /= static_cast<double>(p);
            double* d = dev.data() + i * p;
            for (std::size_t k = 0; k < p; ++k) d[k] = src[k] - mean;
        }
    }

    std::vector<double> g = gram(dev, n, p);
    for (std::size_t i = 0; i < n; ++i)
        if (g[i * n + i] == 0.0)
            throw DegenerateStack("frame deviations vanish: correlation undefined",
                                  static_cast<int>(i));

    std::vector<std::vector<double>> rho(n, std::vector<double>(n, 1.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double r = g[i * n + j] / std::sqrt(g[i * n + i] * g[j * n + j]);
            rho[i][j] = r;
            rho[j][i] = r;
        }
    return rho;
}

std::uint64_t content_hash(const Frame& f) {
    // FNV-1a over the pixel buffer, 8 bytes at a time; used only to make the
    // bitwise-duplicate scan cheap, equality is always confirmed by compare.
    const unsigned char* bytes = reinterpret_cast<const unsigned char*>(f.pixels.data());
    std::size_t nbytes = f.pixels.size() * sizeof(float);
    std::uint64_t h = 1469598103934665603ull;
    std::size_t k = 0;
    for (; k + 8 <= nbytes; k += 8) {
        std::uint64_t chunk;
        std::memcpy(&chunk, bytes + k, 8);
        h = (h ^ chunk) * 1099511628211ull;
    }
    for (; k < nbytes; ++k) h = (h ^ bytes[k]) * 1099511628211ull;
    return h;
}

}  // namespace

void validate(const Frame& f) {
    if (f.width <= 0 || f.height <= 0 || f.channels <= 0)
        throw DomainError("frame dimensions must be positive");
    if (f.pixels.size() != static_cast<std::size_t>(f.width) * f.height * f.channels)
        throw DomainError("frame buffer size disagrees with its dimensions");
    if (f.bit_depth != 8 && f.bit_depth != 16)
        throw DomainError("frame bit depth must be 8 or 16");
    for (float v : f.pixels)
        if (!(v >= 0.0f) || !std::isfinite(v))
            throw DomainError("frame intensities must be finite and non-negative");
}

Frame ensemble_mean(const std::vector<Frame>& frames) {
    check_stack_shape(frames);
    std::vector<int> all(frames.size());
    std::iota(all.begin(), all.end(), 0);
    return mean_frame_of(frames, all);
}

FrameStack make_stack(std::vector<Frame> frames) {
    check_stack_shape(frames);
    FrameStack s;
    s.mean_frame = ensemble_mean(frames);
    s.frames = std::move(frames);
    return s;
}

std::vector<std::vector<double>> pearson_matrix(const std::vector<Frame>& frames,
                                                DeviationMode mode) {
    check_stack_shape(frames);
    if (frames.size() < 2) throw DomainError("correlation needs at least two frames");
    std::vector<int> all(frames.size());
    std::iota(all.begin(), all.end(), 0);
    return pearson_of(frames, all, mode);
}

FilterSelection select_frames(const std::vector<Frame>& frames, const FilterOptions& opts) {
    check_stack_shape(frames);
    if (!(opts.duplicate_tol >= 0.0) || !(opts.defect_threshold <= 1.0))
        throw DomainError("invalid filter options");

    FilterSelection sel;
    int n = static_cast<int>(frames.size());

    // 1. bitwise duplicates: keep the earliest copy of identical content
    std::vector<char> alive(n, 1);
    std::vector<std::uint64_t> hashes(n);
    for (int i = 0; i < n; ++i) hashes[i] = content_hash(frames[i]);
    for (int i = 0; i < n; ++i) {
        if (!alive[i]) continue;
        for (int j = i + 1; j < n; ++j) {
            if (!alive[j] || hashes[i] != hashes[j]) continue;
            if (frames[i].pixels == frames[j].pixels) {
                alive[j] = 0;
                sel.duplicate_drops.push_back(j);
            }
        }
    }

    std::vector<int> candidates;
    for (int i = 0; i < n; ++i)
        if (alive[i]) candidates.push_back(i);

    if (candidates.size() == 1) {
        sel.kept = candidates;
        return sel;
    }

    // 2. correlation matrix over the de-duplicated stack
    try {
        sel.pearson = pearson_of(frames, candidates, opts.mode);
    } catch (const DegenerateStack& e) {
        throw DegenerateStack(e.what(), candidates[e.frame_index]);
    }
    sel.pearson_index = candidates;

    int m = static_cast<int>(candidates.size());
    std::vector<char> live(m, 1);

    // near-duplicates: the later-indexed member of each pair is dropped
    for (int i = 0; i < m; ++i) {
        if (!live[i]) continue;
        for (int j = i + 1; j < m; ++j) {
            if (!live[j]) continue;
            if (sel.pearson[i][j] >= 1.0 - opts.duplicate_tol) {
                live[j] = 0;
                sel.duplicate_drops.push_back(candidates[j]);
            }
        }
    }

    // 3. defects: repeatedly drop the worst-correlated frame while it falls
    // below the threshold; the matrix is fixed, means shrink with the set
    for (;;) {
        std::vector<int> current;
        for (int i = 0; i < m; ++i)
            if (live[i]) current.push_back(i);
        if (current.size() <= 1) break;

        int worst = -1;
        double worst_mean = 0.0;
        for (int i : current) {
            double s = 0.0;
            for (int j : current)
                if (j != i) s += sel.pearson[i][j];
            double mean = s / static_cast<double>(current.size() - 1);
            if (worst < 0 || mean <= worst_mean) {  // ties drop the later index
                worst = i;
                worst_mean = mean;
            }
        }
        if (worst_mean < opts.defect_threshold) {
            live[worst] = 0;
            sel.defect_drops.push_back(candidates[worst]);
        } else {
            break;
        }
    }

    for (int i = 0; i < m; ++i)
        if (live[i]) sel.kept.push_back(candidates[i]);
    std::sort(sel.duplicate_drops.begin(), sel.duplicate_drops.end());
    return sel;
}

FilterResult filter_stack(const std::vector<Frame>& frames, const FilterOptions& opts) {
    FilterSelection sel = select_frames(frames, opts);

    FilterResult res;
    res.kept = sel.kept;
    res.duplicate_drops = sel.duplicate_drops;
    res.defect_drops = sel.defect_drops;
    res.stack.frames.reserve(sel.kept.size());
    for (int idx : sel.kept) res.stack.frames.push_back(frames[idx]);
    res.stack.mean_frame = mean_frame_of(frames, sel.kept);

    // correlation entries for the survivors, when a matrix was computed
    if (!sel.pearson.empty()) {
        std::vector<int> rows;
        for (std::size_t r = 0; r < sel.pearson_index.size(); ++r)
            if (std::find(sel.kept.begin(), sel.kept.end(), sel.pearson_index[r]) != sel.kept.end())
                rows.push_back(static_cast<int>(r));
        res.stack.pearson.assign(rows.size(), std::vector<double>(rows.size(), 1.0));
        for (std::size_t a = 0; a < rows.size(); ++a)
            for (std::size_t b = 0; b < rows.size(); ++b)
                res.stack.pearson[a][b] = sel.pearson[rows[a]][rows[b]];
    }
    return res;
}

Frame denoise(const std::vector<Frame>& frames, const FilterOptions& opts) {
    check_stack_shape(frames);
    double earliest = frames[0].timestamp;
    for (const Frame& f : frames) earliest = std::min(earliest, f.timestamp);

    if (frames.size() == 1) {
        Frame out = frames[0];
        out.timestamp = earliest;
        return out;
    }
    FilterSelection sel = select_frames(frames, opts);
    Frame out = mean_frame_of(frames, sel.kept);
    out.timestamp = earliest;
    return out;
}

}  // namespace skydaq
