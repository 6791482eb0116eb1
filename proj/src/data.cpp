#include "otnn/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numeric>

#include <zlib.h>

#include "otnn/errors.hpp"

namespace otnn::data {

void Dataset::validate() const {
    if (inputs.rank() != 2) throw DimensionError("Dataset: inputs must be n x d");
    if (inputs.rows() != labels.size()) throw DimensionError("Dataset: labels length != sample count");
    if (meta.d != inputs.cols()) throw DimensionError("Dataset: meta.d mismatch");
    for (int y : labels) {
        if (y < 0 || static_cast<std::size_t>(y) >= meta.q) {
            throw DimensionError("Dataset: label out of [0, q)");
        }
    }
    inputs.check_finite("Dataset");
}

// ---------------------------------------------------------------------------
// Koch snowflakes
// ---------------------------------------------------------------------------

std::vector<std::pair<double, double>> koch_polyline(int order, double scale) {
    if (order < 0 || order > 6) throw DimensionError("koch_polyline: order must be in [0, 6]");
    if (scale <= 0.0) throw DimensionError("koch_polyline: scale must be positive");
    constexpr double kPi = 3.141592653589793238462643383279502884;
    // Equilateral triangle, circumradius = scale, counterclockwise.
    std::vector<std::pair<double, double>> pts;
    for (int k = 0; k < 3; ++k) {
        const double ang = kPi / 2.0 + 2.0 * kPi * k / 3.0;
        pts.emplace_back(scale * std::cos(ang), scale * std::sin(ang));
    }
    pts.push_back(pts.front());  // closed

    const double root3_over6 = std::sqrt(3.0) / 6.0;
    for (int it = 0; it < order; ++it) {
        std::vector<std::pair<double, double>> next;
        next.reserve(4 * (pts.size() - 1) + 1);
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
            const double ax = pts[i].first, ay = pts[i].second;
            const double bx = pts[i + 1].first, by = pts[i + 1].second;
            const double dx = bx - ax, dy = by - ay;
            // Outward bump for a counterclockwise contour: rotate (b-a) by -90deg.
            const double px = ax + dx / 2.0 + dy * root3_over6;
            const double py = ay + dy / 2.0 - dx * root3_over6;
            next.emplace_back(ax, ay);
            next.emplace_back(ax + dx / 3.0, ay + dy / 3.0);
            next.emplace_back(px, py);
            next.emplace_back(ax + 2.0 * dx / 3.0, ay + 2.0 * dy / 3.0);
        }
        next.push_back(pts.back());
        pts = std::move(next);
    }
    return pts;
}

namespace {

std::pair<double, double> sample_polyline_by_arclength(
    const std::vector<std::pair<double, double>>& pts, const std::vector<double>& cumlen, double t) {
    // cumlen[i] = length up to vertex i; t in [0, total)
    const auto it = std::upper_bound(cumlen.begin(), cumlen.end(), t);
    std::size_t seg = static_cast<std::size_t>(std::distance(cumlen.begin(), it));
    if (seg == 0) seg = 1;
    if (seg >= pts.size()) seg = pts.size() - 1;
    const double seg_start = cumlen[seg - 1];
    const double seg_len = cumlen[seg] - cumlen[seg - 1];
    const double u = seg_len > 0.0 ? (t - seg_start) / seg_len : 0.0;
    const double x = pts[seg - 1].first + u * (pts[seg].first - pts[seg - 1].first);
    const double y = pts[seg - 1].second + u * (pts[seg].second - pts[seg - 1].second);
    return {x, y};
}

}  // namespace

Dataset koch_snowflakes(int order, double r1, double r2, std::size_t samples_per_class,
                        double noise_sd, Rng& rng) {
    if (r1 == r2) throw DimensionError("koch_snowflakes: scales must differ");
    if (samples_per_class == 0) throw DimensionError("koch_snowflakes: need samples");

    const double scales[2] = {r1, r2};
    Dataset ds;
    ds.inputs = Tensor({2 * samples_per_class, 2});
    ds.labels.resize(2 * samples_per_class);
    std::size_t row = 0;
    for (int c = 0; c < 2; ++c) {
        const auto pts = koch_polyline(order, scales[c]);
        std::vector<double> cumlen(pts.size(), 0.0);
        for (std::size_t i = 1; i < pts.size(); ++i) {
            cumlen[i] = cumlen[i - 1] + std::hypot(pts[i].first - pts[i - 1].first,
                                                   pts[i].second - pts[i - 1].second);
        }
        const double total = cumlen.back();
        for (std::size_t s = 0; s < samples_per_class; ++s, ++row) {
            const auto [x, y] = sample_polyline_by_arclength(pts, cumlen, rng.uniform01() * total);
            ds.inputs.at(row, 0) = x + (noise_sd > 0.0 ? rng.normal(0.0, noise_sd) : 0.0);
            ds.inputs.at(row, 1) = y + (noise_sd > 0.0 ? rng.normal(0.0, noise_sd) : 0.0);
            ds.labels[row] = c;
        }
    }
    ds.meta = {"koch", 2, 2, 0, 0};
    ds.validate();
    return ds;
}

// ---------------------------------------------------------------------------
// IDX loader
// ---------------------------------------------------------------------------

namespace {

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("load_idx: cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

std::vector<std::uint8_t> gunzip(const std::vector<std::uint8_t>& in) {
    z_stream zs;
    std::memset(&zs, 0, sizeof(zs));
    if (inflateInit2(&zs, 15 + 16) != Z_OK) throw ParseError("load_idx: inflateInit failed");
    std::vector<std::uint8_t> out;
    out.resize(std::max<std::size_t>(in.size() * 4, 1 << 16));
    zs.next_in = const_cast<Bytef*>(in.data());
    zs.avail_in = static_cast<uInt>(in.size());
    std::size_t written = 0;
    int ret = Z_OK;
    while (ret != Z_STREAM_END) {
        if (written == out.size()) out.resize(out.size() * 2);
        zs.next_out = out.data() + written;
        zs.avail_out = static_cast<uInt>(out.size() - written);
        ret = inflate(&zs, Z_NO_FLUSH);
        if (ret != Z_OK && ret != Z_STREAM_END) {
            inflateEnd(&zs);
            throw ParseError("load_idx: corrupt gzip stream");
        }
        written = out.size() - zs.avail_out;
    }
    inflateEnd(&zs);
    out.resize(written);
    return out;
}

std::vector<std::uint8_t> read_maybe_gzip(const std::string& path) {
    std::vector<std::uint8_t> bytes = read_file_bytes(path);
    if (bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b) return gunzip(bytes);
    return bytes;
}

std::uint32_t be32(const std::vector<std::uint8_t>& b, std::size_t off) {
    if (off + 4 > b.size()) throw ParseError("load_idx: truncated header");
    return (std::uint32_t(b[off]) << 24) | (std::uint32_t(b[off + 1]) << 16) |
           (std::uint32_t(b[off + 2]) << 8) | std::uint32_t(b[off + 3]);
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    const auto img = read_maybe_gzip(images_path);
    const auto lab = read_maybe_gzip(labels_path);

    if (be32(img, 0) != 0x00000803u) throw ParseError("load_idx: bad magic in images file");
    if (be32(lab, 0) != 0x00000801u) throw ParseError("load_idx: bad magic in labels file");

    const std::size_t n_img = be32(img, 4);
    const std::size_t h = be32(img, 8);
    const std::size_t w = be32(img, 12);
    const std::size_t n_lab = be32(lab, 4);
    if (n_img != n_lab) {
        throw ParseError("load_idx: image/label count mismatch (" + std::to_string(n_img) + " vs " +
                         std::to_string(n_lab) + ")");
    }
    if (n_img == 0 || h == 0 || w == 0) throw ParseError("load_idx: zero dimension");
    const std::size_t d = h * w;
    if (img.size() < 16 + n_img * d) throw ParseError("load_idx: truncated image payload");
    if (lab.size() < 8 + n_lab) throw ParseError("load_idx: truncated label payload");

    Dataset ds;
    ds.inputs = Tensor({n_img, d});
    ds.labels.resize(n_img);
    int max_label = 0;
    for (std::size_t i = 0; i < n_img; ++i) {
        for (std::size_t p = 0; p < d; ++p) {
            ds.inputs.at(i, p) = static_cast<double>(img[16 + i * d + p]) / 255.0;
        }
        ds.labels[i] = static_cast<int>(lab[8 + i]);
        max_label = std::max(max_label, ds.labels[i]);
    }
    ds.meta = {"idx", d, static_cast<std::size_t>(max_label) + 1, h, w};
    ds.validate();
    return ds;
}

// ---------------------------------------------------------------------------
// Synthetic fixtures
// ---------------------------------------------------------------------------

Dataset gaussian_blobs(std::size_t samples_per_class, double separation, double sd, Rng& rng) {
    Dataset ds;
    ds.inputs = Tensor({2 * samples_per_class, 2});
    ds.labels.resize(2 * samples_per_class);
    std::size_t row = 0;
    for (int c = 0; c < 2; ++c) {
        const double cx = (c == 0 ? -0.5 : 0.5) * separation;
        for (std::size_t s = 0; s < samples_per_class; ++s, ++row) {
            ds.inputs.at(row, 0) = cx + rng.normal(0.0, sd);
            ds.inputs.at(row, 1) = rng.normal(0.0, sd);
            ds.labels[row] = c;
        }
    }
    ds.meta = {"blobs", 2, 2, 0, 0};
    ds.validate();
    return ds;
}

Dataset dirac_pair(double a, std::size_t replicate) {
    if (a <= 0.0) throw DimensionError("dirac_pair: classes coincide for a <= 0");
    if (replicate == 0) throw DimensionError("dirac_pair: need replicate >= 1");
    Dataset ds;
    ds.inputs = Tensor({2 * replicate, 1});
    ds.labels.resize(2 * replicate);
    for (std::size_t i = 0; i < replicate; ++i) {
        ds.inputs.at(2 * i, 0) = a;
        ds.labels[2 * i] = 1;
        ds.inputs.at(2 * i + 1, 0) = -a;
        ds.labels[2 * i + 1] = 0;
    }
    ds.meta = {"dirac_pair", 1, 2, 0, 0};
    ds.validate();
    return ds;
}

BlockMnist block_mnist(const Dataset& base, Rng& rng) {
    base.validate();
    if (!base.meta.is_image() || base.meta.img_h != base.meta.img_w) {
        throw DimensionError("block_mnist: base images must be square");
    }
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < base.size(); ++i) {
        if (base.labels[i] == 0 || base.labels[i] == 1) keep.push_back(i);
    }
    if (keep.empty()) throw DimensionError("block_mnist: base has no 0/1 samples");

    const std::size_t h = base.meta.img_h, w = base.meta.img_w, d = h * w;
    BlockMnist out;
    out.dataset.inputs = Tensor({keep.size(), 2 * d});
    out.dataset.labels.resize(keep.size());
    out.null_masks = Tensor({keep.size(), 2 * d});

    for (std::size_t r = 0; r < keep.size(); ++r) {
        const std::size_t i = keep[r];
        // Null block: a pixel-permuted digit keeps digit-like statistics but no structure.
        const std::size_t donor = keep[rng.below(keep.size())];
        std::vector<std::size_t> perm(d);
        std::iota(perm.begin(), perm.end(), 0);
        for (std::size_t k = d; k > 1; --k) std::swap(perm[k - 1], perm[rng.below(k)]);

        const bool null_on_top = rng.uniform01() < 0.5;
        const std::size_t null_off = null_on_top ? 0 : d;
        const std::size_t digit_off = null_on_top ? d : 0;
        for (std::size_t p = 0; p < d; ++p) {
            out.dataset.inputs.at(r, digit_off + p) = base.inputs.at(i, p);
            out.dataset.inputs.at(r, null_off + p) = base.inputs.at(donor, perm[p]);
            out.null_masks.at(r, null_off + p) = 1.0;
        }
        out.dataset.labels[r] = base.labels[i];
    }
    out.dataset.meta = {"blockmnist", 2 * d, 2, 2 * h, w};
    out.dataset.validate();
    return out;
}

double min_interclass_distance(const Dataset& ds) {
    ds.validate();
    const std::size_t n = ds.size(), d = ds.meta.d;
    double best = 1e300;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (ds.labels[i] == ds.labels[j]) continue;
            double s = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                const double diff = ds.inputs.at(i, k) - ds.inputs.at(j, k);
                s += diff * diff;
            }
            best = std::min(best, s);
        }
    }
    return std::sqrt(best);
}

Dataset shuffled(const Dataset& ds, Rng& rng) {
    ds.validate();
    std::vector<std::size_t> order(ds.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t k = order.size(); k > 1; --k) std::swap(order[k - 1], order[rng.below(k)]);
    Dataset out;
    out.inputs = Tensor({ds.size(), ds.meta.d});
    out.labels.resize(ds.size());
    for (std::size_t r = 0; r < order.size(); ++r) {
        for (std::size_t c = 0; c < ds.meta.d; ++c) out.inputs.at(r, c) = ds.inputs.at(order[r], c);
        out.labels[r] = ds.labels[order[r]];
    }
    out.meta = ds.meta;
    return out;
}

Dataset head_subset(const Dataset& ds, std::size_t n) {
    ds.validate();
    n = std::min(n, ds.size());
    if (n == 0) throw DimensionError("head_subset: empty subset");
    Dataset out;
    out.inputs = Tensor({n, ds.meta.d});
    out.labels.assign(ds.labels.begin(), ds.labels.begin() + static_cast<std::ptrdiff_t>(n));
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < ds.meta.d; ++c) out.inputs.at(r, c) = ds.inputs.at(r, c);
    out.meta = ds.meta;
    return out;
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, double test_fraction, Rng& rng) {
    if (test_fraction <= 0.0 || test_fraction >= 1.0) {
        throw DimensionError("train_test_split: fraction must be in (0,1)");
    }
    Dataset mixed = shuffled(ds, rng);
    const std::size_t n_test = std::max<std::size_t>(1, static_cast<std::size_t>(
                                                            std::floor(mixed.size() * test_fraction)));
    const std::size_t n_train = mixed.size() - n_test;
    if (n_train == 0) throw DimensionError("train_test_split: empty train side");
    Dataset train = head_subset(mixed, n_train);
    Dataset test;
    test.inputs = Tensor({n_test, mixed.meta.d});
    test.labels.resize(n_test);
    for (std::size_t r = 0; r < n_test; ++r) {
        for (std::size_t c = 0; c < mixed.meta.d; ++c)
            test.inputs.at(r, c) = mixed.inputs.at(n_train + r, c);
        test.labels[r] = mixed.labels[n_train + r];
    }
    test.meta = mixed.meta;
    return {std::move(train), std::move(test)};
}

}  // namespace otnn::data
