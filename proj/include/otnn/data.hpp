#pragma once

#include <string>
#include <utility>
#include <vector>

#include "otnn/rng.hpp"
#include "otnn/tensor.hpp"

namespace otnn::data {

struct DatasetMeta {
    std::string name;
    std::size_t d = 0;      // input width
    std::size_t q = 0;      // number of classes
    std::size_t img_h = 0;  // 0 when not an image dataset
    std::size_t img_w = 0;

    bool is_image() const { return img_h > 0 && img_w > 0; }
};

struct Dataset {
    Tensor inputs;            // n x d
    std::vector<int> labels;  // in [0, q)
    DatasetMeta meta;

    std::size_t size() const { return labels.size(); }
    void validate() const;
};

// Vertices of the closed order-n Koch snowflake polyline (equilateral base
// triangle of circumradius `scale`, bumps outward). Edge count is 3 * 4^order.
std::vector<std::pair<double, double>> koch_polyline(int order, double scale);

// Two concentric snowflake classes, sampled uniformly by arc length along the
// polylines, with optional Gaussian jitter. Class 0 uses r1, class 1 uses r2.
Dataset koch_snowflakes(int order, double r1, double r2, std::size_t samples_per_class,
                        double noise_sd, Rng& rng);

// IDX container (magic 0x803 images / 0x801 labels, big-endian dims). Accepts
// raw files and gzip-wrapped files; pixels come out in [0,1].
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

// Two 2-D Gaussian blobs at (+-separation/2, 0), labels 0/1.
Dataset gaussian_blobs(std::size_t samples_per_class, double separation, double sd, Rng& rng);

// The two points +-a in 1-D, labels {0 at -a, 1 at +a}, each replicated.
Dataset dirac_pair(double a, std::size_t replicate = 64);

struct BlockMnist {
    Dataset dataset;    // images of height 2h: digit block + null block
    Tensor null_masks;  // n x d, 1 inside the per-sample null block
};

// Stacks each base digit with a structured null block (a pixel-permuted digit
// drawn from the base) at a uniformly chosen top/bottom position. Base images
// must be square; labels are restricted to the {0,1} classes.
BlockMnist block_mnist(const Dataset& base, Rng& rng);

// Brute-force nearest pair between the two classes (binary datasets).
double min_interclass_distance(const Dataset& ds);

Dataset shuffled(const Dataset& ds, Rng& rng);
Dataset head_subset(const Dataset& ds, std::size_t n);
std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, double test_fraction, Rng& rng);

}  // namespace otnn::data
