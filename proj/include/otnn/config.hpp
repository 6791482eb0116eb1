#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "otnn/data.hpp"
#include "otnn/optim.hpp"

namespace otnn::cli {

struct DatasetSpec {
    std::string kind;  // koch | idx | blobs | dirac | blockmnist

    // koch
    int order = 4;
    double scale1 = 1.0;
    double scale2 = 1.6;
    std::size_t n = 2000;  // samples per class
    double noise_sd = 0.03;

    // idx / blockmnist (paths resolved against OTNN_DATA_DIR when relative)
    std::string images;
    std::string labels;

    // blobs
    double separation = 4.0;
    double sd = 0.5;

    // dirac
    double a = 1.0;
    std::size_t replicate = 64;

    std::uint64_t seed = 7;
    double test_fraction = 0.25;
    std::size_t subset = 0;  // 0 = all
};

struct ModelSpec {
    std::string arch = "otnn";  // otnn | unconstrained
    std::vector<std::size_t> widths;  // {in, hidden..., out}
};

struct LossSpecConfig {
    std::string variant = "binary";  // binary | multiclass_ova | multiclass_softmax
                                      // | cross_entropy | bce (hkr_ prefix accepted)
    double lambda = 10.0;
    double margin = 0.5;
    double alpha = 10.0;
};

struct OptimSpec {
    std::size_t batch_size = 128;
    std::size_t epochs = 100;
    std::vector<std::pair<std::size_t, double>> schedule = {{0, 5e-4}};
};

struct ExperimentConfig {
    DatasetSpec dataset;
    ModelSpec model;
    LossSpecConfig loss;
    OptimSpec optimizer;
    std::uint64_t seed = 42;
};

// Strict parse: unknown keys are rejected with the offending field path.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Canonical (sorted-key) JSON; parse(to_config_json(c)) == c.
std::string to_config_json(const ExperimentConfig& c);

// FNV-1a 64 over the canonical dump, as a fixed-width hex string.
std::string config_hash(const ExperimentConfig& c);

// Builds the dataset named by the spec. BlockMNIST returns masks too.
data::Dataset build_dataset(const DatasetSpec& spec);
data::BlockMnist build_blockmnist(const DatasetSpec& spec);

// Resolves a possibly relative path against OTNN_DATA_DIR.
std::string resolve_data_path(const std::string& path);

LossSpec to_loss_spec(const LossSpecConfig& c);
TrainConfig to_train_config(const ExperimentConfig& c);
LipNet build_model(const ExperimentConfig& c, Rng& rng);

}  // namespace otnn::cli
