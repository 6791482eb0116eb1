#include "otnn/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/stat.h>

#include <json.hpp>

namespace otnn::cli {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& ctx, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError("config: '" + ctx + "' must be an object");
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) {
            if (key == a) {
                ok = true;
                break;
            }
        }
        if (!ok) throw ConfigError("config: unknown key '" + ctx + "." + key + "'");
    }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("config: field '") + key + "' has the wrong type");
    }
}

bool file_exists(const std::string& path) {
    struct stat st{};
    return ::stat(path.c_str(), &st) == 0;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: malformed JSON: ") + e.what());
    }
    check_keys(j, "", {"dataset", "model", "loss", "optimizer", "seed"});

    ExperimentConfig c;
    c.seed = get_or<std::uint64_t>(j, "seed", 42);

    if (j.contains("dataset")) {
        const json& d = j["dataset"];
        check_keys(d, "dataset",
                   {"kind", "order", "scales", "n", "noise_sd", "images", "labels", "separation",
                    "sd", "a", "replicate", "seed", "test_fraction", "subset"});
        c.dataset.kind = get_or<std::string>(d, "kind", "");
        c.dataset.order = get_or<int>(d, "order", 4);
        if (d.contains("scales")) {
            const auto scales = d.at("scales").get<std::vector<double>>();
            if (scales.size() != 2) throw ConfigError("config: dataset.scales needs two entries");
            c.dataset.scale1 = scales[0];
            c.dataset.scale2 = scales[1];
        }
        c.dataset.n = get_or<std::size_t>(d, "n", 2000);
        c.dataset.noise_sd = get_or<double>(d, "noise_sd", 0.03);
        c.dataset.images = get_or<std::string>(d, "images", "");
        c.dataset.labels = get_or<std::string>(d, "labels", "");
        c.dataset.separation = get_or<double>(d, "separation", 4.0);
        c.dataset.sd = get_or<double>(d, "sd", 0.5);
        c.dataset.a = get_or<double>(d, "a", 1.0);
        c.dataset.replicate = get_or<std::size_t>(d, "replicate", 64);
        c.dataset.seed = get_or<std::uint64_t>(d, "seed", 7);
        c.dataset.test_fraction = get_or<double>(d, "test_fraction", 0.25);
        c.dataset.subset = get_or<std::size_t>(d, "subset", 0);
    }

    if (j.contains("model")) {
        const json& m = j["model"];
        check_keys(m, "model", {"arch", "widths"});
        c.model.arch = get_or<std::string>(m, "arch", "otnn");
        if (m.contains("widths")) c.model.widths = m.at("widths").get<std::vector<std::size_t>>();
        if (c.model.arch != "otnn" && c.model.arch != "unconstrained") {
            throw ConfigError("config: model.arch must be 'otnn' or 'unconstrained'");
        }
    }

    if (j.contains("loss")) {
        const json& l = j["loss"];
        check_keys(l, "loss", {"variant", "lambda", "margin", "alpha"});
        c.loss.variant = get_or<std::string>(l, "variant", "binary");
        c.loss.lambda = get_or<double>(l, "lambda", 10.0);
        c.loss.margin = get_or<double>(l, "margin", 0.5);
        c.loss.alpha = get_or<double>(l, "alpha", 10.0);
        to_loss_spec(c.loss);  // validates the variant name
    }

    if (j.contains("optimizer")) {
        const json& o = j["optimizer"];
        check_keys(o, "optimizer", {"batch_size", "epochs", "schedule"});
        c.optimizer.batch_size = get_or<std::size_t>(o, "batch_size", 128);
        c.optimizer.epochs = get_or<std::size_t>(o, "epochs", 100);
        if (o.contains("schedule")) {
            c.optimizer.schedule.clear();
            for (const auto& stage : o.at("schedule")) {
                check_keys(stage, "optimizer.schedule[]", {"epoch", "lr"});
                c.optimizer.schedule.emplace_back(stage.at("epoch").get<std::size_t>(),
                                                  stage.at("lr").get<double>());
            }
        }
    }
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("config: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::string to_config_json(const ExperimentConfig& c) {
    json d;
    d["kind"] = c.dataset.kind;
    d["order"] = c.dataset.order;
    d["scales"] = {c.dataset.scale1, c.dataset.scale2};
    d["n"] = c.dataset.n;
    d["noise_sd"] = c.dataset.noise_sd;
    d["images"] = c.dataset.images;
    d["labels"] = c.dataset.labels;
    d["separation"] = c.dataset.separation;
    d["sd"] = c.dataset.sd;
    d["a"] = c.dataset.a;
    d["replicate"] = c.dataset.replicate;
    d["seed"] = c.dataset.seed;
    d["test_fraction"] = c.dataset.test_fraction;
    d["subset"] = c.dataset.subset;

    json j;
    j["dataset"] = std::move(d);
    j["model"] = {{"arch", c.model.arch}, {"widths", c.model.widths}};
    j["loss"] = {{"variant", c.loss.variant},
                 {"lambda", c.loss.lambda},
                 {"margin", c.loss.margin},
                 {"alpha", c.loss.alpha}};
    json sched = json::array();
    for (const auto& [epoch, lr] : c.optimizer.schedule) {
        sched.push_back({{"epoch", epoch}, {"lr", lr}});
    }
    j["optimizer"] = {{"batch_size", c.optimizer.batch_size},
                      {"epochs", c.optimizer.epochs},
                      {"schedule", std::move(sched)}};
    j["seed"] = c.seed;
    return j.dump(2);
}

std::string config_hash(const ExperimentConfig& c) {
    const std::string text = to_config_json(c);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string resolve_data_path(const std::string& path) {
    if (path.empty() || path.front() == '/' || file_exists(path)) return path;
    const char* root = std::getenv("OTNN_DATA_DIR");
    if (root == nullptr) return path;
    const std::string joined = std::string(root) + "/" + path;
    if (file_exists(joined)) return joined;
    if (file_exists(joined + ".gz")) return joined + ".gz";
    return path;
}

data::Dataset build_dataset(const DatasetSpec& spec) {
    Rng rng(spec.seed);
    data::Dataset ds;
    if (spec.kind == "koch") {
        ds = data::koch_snowflakes(spec.order, spec.scale1, spec.scale2, spec.n, spec.noise_sd, rng);
    } else if (spec.kind == "idx") {
        ds = data::load_idx(resolve_data_path(spec.images), resolve_data_path(spec.labels));
    } else if (spec.kind == "blobs") {
        ds = data::gaussian_blobs(spec.n, spec.separation, spec.sd, rng);
    } else if (spec.kind == "dirac") {
        ds = data::dirac_pair(spec.a, spec.replicate);
    } else if (spec.kind == "blockmnist") {
        return build_blockmnist(spec).dataset;
    } else {
        throw ConfigError("config: unknown dataset kind '" + spec.kind + "'");
    }
    if (spec.subset > 0 && spec.subset < ds.size()) {
        Rng mix(spec.seed ^ 0x5eedu);
        ds = data::head_subset(data::shuffled(ds, mix), spec.subset);
    }
    return ds;
}

data::BlockMnist build_blockmnist(const DatasetSpec& spec) {
    data::Dataset base = data::load_idx(resolve_data_path(spec.images), resolve_data_path(spec.labels));
    Rng rng(spec.seed);
    data::BlockMnist bm = data::block_mnist(base, rng);
    if (spec.subset > 0 && spec.subset < bm.dataset.size()) {
        // Keep masks aligned: subset the rows of both tensors head-first.
        data::BlockMnist cut;
        cut.dataset = data::head_subset(bm.dataset, spec.subset);
        cut.null_masks = Tensor({spec.subset, bm.dataset.meta.d});
        for (std::size_t r = 0; r < spec.subset; ++r)
            for (std::size_t c = 0; c < bm.dataset.meta.d; ++c)
                cut.null_masks.at(r, c) = bm.null_masks.at(r, c);
        return cut;
    }
    return bm;
}

LossSpec to_loss_spec(const LossSpecConfig& c) {
    LossSpec spec;
    spec.hkr.lambda = c.lambda;
    spec.hkr.margin = c.margin;
    spec.hkr.alpha = c.alpha;
    if (c.variant == "binary" || c.variant == "hkr_binary") {
        spec.kind = LossKind::HkrBinary;
        spec.hkr.variant = HkrConfig::Variant::Binary;
    } else if (c.variant == "multiclass_ova" || c.variant == "hkr_multiclass_ova") {
        spec.kind = LossKind::HkrMulticlassOva;
        spec.hkr.variant = HkrConfig::Variant::MulticlassOva;
    } else if (c.variant == "multiclass_softmax" || c.variant == "hkr_multiclass_softmax") {
        spec.kind = LossKind::HkrMulticlassSoftmax;
        spec.hkr.variant = HkrConfig::Variant::MulticlassSoftmax;
    } else if (c.variant == "cross_entropy") {
        spec.kind = LossKind::CrossEntropy;
    } else if (c.variant == "bce") {
        spec.kind = LossKind::Bce;
    } else {
        throw ConfigError("config: unknown loss variant '" + c.variant + "'");
    }
    return spec;
}

TrainConfig to_train_config(const ExperimentConfig& c) {
    TrainConfig tc;
    tc.batch_size = c.optimizer.batch_size;
    tc.epochs = c.optimizer.epochs;
    tc.schedule.stages = c.optimizer.schedule;
    tc.seed = c.seed;
    return tc;
}

LipNet build_model(const ExperimentConfig& c, Rng& rng) {
    if (c.model.widths.size() < 2) throw ConfigError("config: model.widths needs at least {in, out}");
    if (c.model.arch == "otnn") return make_otnn(c.model.widths, rng);
    return make_unconstrained(c.model.widths, rng);
}

}  // namespace otnn::cli
