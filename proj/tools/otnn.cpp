#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "otnn/attribution.hpp"
#include "otnn/config.hpp"
#include "otnn/figio.hpp"
#include "otnn/verify.hpp"
#include "otnn/xaimetrics.hpp"

using json = nlohmann::json;
using namespace otnn;

namespace {

struct CommonFlags {
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 1;
    std::size_t subset = 0;
};

cli::ExperimentConfig load_and_override(const CommonFlags& flags) {
    cli::ExperimentConfig cfg = cli::load_config(flags.config_path);
    if (flags.seed_set) cfg.seed = flags.seed;
    if (flags.subset > 0) cfg.dataset.subset = flags.subset;
    return cfg;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path);
    out << text;
    if (!out) throw IoError("write failed for " + path);
}

std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

json provenance(const cli::ExperimentConfig& cfg) {
    return {{"config_hash", cli::config_hash(cfg)},
            {"seed", cfg.seed},
            {"config", json::parse(cli::to_config_json(cfg))}};
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

int cmd_train(const CommonFlags& flags, const std::string& out_model, const std::string& out_history) {
    cli::ExperimentConfig cfg = load_and_override(flags);
    const data::Dataset full = cli::build_dataset(cfg.dataset);
    Rng split_rng(cfg.dataset.seed ^ 0xA5A5u);
    const auto [train_ds, test_ds] = data::train_test_split(full, cfg.dataset.test_fraction, split_rng);

    Rng arch_rng(cfg.seed);
    LipNet net = cli::build_model(cfg, arch_rng);
    const TrainResult res = train(std::move(net), train_ds, cli::to_loss_spec(cfg.loss),
                                  cli::to_train_config(cfg));

    save(res.net, out_model);

    std::string csv = "# config_hash=" + cli::config_hash(cfg) + " seed=" + std::to_string(cfg.seed) + "\n";
    csv += "epoch,loss,accuracy,lr\n";
    const LrSchedule sched{cfg.optimizer.schedule};
    for (std::size_t e = 0; e < res.history.loss.size(); ++e) {
        csv += std::to_string(e) + "," + fmt_g17(res.history.loss[e]) + "," +
               fmt_g17(res.history.accuracy[e]) + "," + fmt_g17(sched.at(e)) + "\n";
    }
    write_text(out_history, csv);

    std::printf("trained %s: train_acc=%.4f test_acc=%.4f model=%s history=%s\n",
                cfg.model.arch.c_str(),
                res.history.accuracy.empty() ? 0.0 : res.history.accuracy.back(),
                accuracy(res.net, test_ds), out_model.c_str(), out_history.c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// explain
// ---------------------------------------------------------------------------

int cmd_explain(const CommonFlags& flags, const std::string& model_path, const std::string& method,
                const std::string& input_spec, const std::string& out_path, int target) {
    cli::ExperimentConfig cfg = load_and_override(flags);
    const LipNet net = load(model_path);
    const data::Dataset ds = cli::build_dataset(cfg.dataset);

    if (input_spec.rfind("idx:", 0) != 0) throw ConfigError("explain: --input must look like idx:<k>");
    const std::size_t index = std::stoul(input_spec.substr(4));
    if (index >= ds.size()) throw ConfigError("explain: sample index out of range");
    const Tensor x = ds.inputs.row_slice(index).reshaped({ds.meta.d});

    const int tgt = target >= 0 ? target
                                : (net.out_dim() == 1
                                       ? 0
                                       : predict_class(net, forward(net, x), ds.meta.q));

    Rng rng(cfg.seed);
    attr::Attribution a;
    const xai::MethodKind kind = xai::method_from_name(method);
    switch (kind) {
        case xai::MethodKind::Saliency:
            a = attr::saliency(net, x, tgt);
            break;
        case xai::MethodKind::Smoothgrad:
            a = attr::smoothgrad(net, x, tgt, 50, 0.2, rng);
            break;
        case xai::MethodKind::IntegratedGradients:
            a = attr::integrated_gradients(net, x, tgt, Tensor({ds.meta.d}), 50);
            break;
        case xai::MethodKind::GradientInput:
            a = attr::gradient_input(net, x, tgt);
            break;
    }

    const std::size_t h = ds.meta.is_image() ? ds.meta.img_h : 1;
    const std::size_t w = ds.meta.is_image() ? ds.meta.img_w : ds.meta.d;
    fig::write_pgm(out_path, a.values, h, w);

    json side = provenance(cfg);
    side["method"] = a.method;
    side["target_class"] = tgt;
    side["sample_index"] = index;
    side["params"] = a.params;
    side["values"] = a.values.values();
    write_text(out_path + ".json", side.dump(2) + "\n");
    std::printf("explain %s sample=%zu target=%d -> %s (+.json)\n", method.c_str(), index, tgt,
                out_path.c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// metrics
// ---------------------------------------------------------------------------

int cmd_metrics(const CommonFlags& flags, const std::string& model_path, const std::string& methods_csv,
                const std::string& metrics_csv, const std::string& out_path, std::size_t max_samples) {
    cli::ExperimentConfig cfg = load_and_override(flags);
    const LipNet net = load(model_path);
    const data::Dataset ds = cli::build_dataset(cfg.dataset);

    std::vector<std::string> methods, metrics;
    {
        std::stringstream ms(methods_csv);
        for (std::string tok; std::getline(ms, tok, ',');) methods.push_back(tok);
        std::stringstream ts(metrics_csv);
        for (std::string tok; std::getline(ts, tok, ',');) metrics.push_back(tok);
    }
    const std::size_t n = std::min(max_samples, ds.size());
    if (n == 0) throw ConfigError("metrics: empty dataset");

    xai::GridSpec grid;
    grid.img_h = ds.meta.img_h;
    grid.img_w = ds.meta.img_w;

    json results = json::object();
    for (const std::string& method_name : methods) {
        const xai::MethodKind method = xai::method_from_name(method_name);
        json per_metric = json::object();
        for (const std::string& metric : metrics) {
            std::vector<double> vals;
            std::size_t excluded = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const Tensor x = ds.inputs.row_slice(i).reshaped({ds.meta.d});
                const int tgt =
                    net.out_dim() == 1 ? 0 : predict_class(net, forward(net, x), ds.meta.q);
                Rng rng(cfg.seed + 31 * i);
                Tensor attribution;
                switch (method) {
                    case xai::MethodKind::Saliency:
                        attribution = attr::saliency(net, x, tgt).values;
                        break;
                    case xai::MethodKind::Smoothgrad:
                        attribution = attr::smoothgrad(net, x, tgt, 50, 0.2, rng).values;
                        break;
                    case xai::MethodKind::IntegratedGradients:
                        attribution =
                            attr::integrated_gradients(net, x, tgt, Tensor({ds.meta.d}), 50).values;
                        break;
                    case xai::MethodKind::GradientInput:
                        attribution = attr::gradient_input(net, x, tgt).values;
                        break;
                }
                try {
                    if (metric == "mufid_zero" || metric == "mufid_uniform") {
                        xai::MuFidelityOptions mo;
                        mo.grid = grid;
                        mo.seed = cfg.seed + i;
                        mo.baseline = metric == "mufid_zero" ? xai::BaselineKind::Zero
                                                             : xai::BaselineKind::Uniform;
                        vals.push_back(xai::mu_fidelity(net, x, tgt, attribution, mo));
                    } else if (metric == "deletion" || metric == "deletion_uniform") {
                        xai::PerturbOptions po;
                        po.grid = grid;
                        po.seed = cfg.seed + i;
                        po.baseline = metric == "deletion" ? xai::BaselineKind::Zero
                                                           : xai::BaselineKind::Uniform;
                        vals.push_back(xai::deletion_auc(net, x, tgt, attribution, po));
                    } else if (metric == "insertion" || metric == "insertion_uniform") {
                        xai::PerturbOptions po;
                        po.grid = grid;
                        po.seed = cfg.seed + i;
                        po.baseline = metric == "insertion" ? xai::BaselineKind::Zero
                                                            : xai::BaselineKind::Uniform;
                        vals.push_back(xai::insertion_auc(net, x, tgt, attribution, po));
                    } else if (metric == "robustness_sr") {
                        xai::RobustnessOptions ro;
                        vals.push_back(xai::robustness_sr(net, x, tgt, attribution, ro).auc);
                    } else if (metric == "stability_spearman" || metric == "stability_l2") {
                        xai::StabilityOptions so;
                        so.seed = cfg.seed + i;
                        so.distance = metric == "stability_l2" ? xai::DistanceKind::L2
                                                               : xai::DistanceKind::OneMinusSpearman;
                        vals.push_back(xai::stability(net, x, tgt, method, so));
                    } else if (metric == "complexity") {
                        vals.push_back(static_cast<double>(xai::complexity(attribution)));
                    } else if (metric == "sal_sg_distance") {
                        Rng sg_rng(cfg.seed + 7 * i);
                        const Tensor sg = attr::smoothgrad_signed(net, x, tgt, 50, 0.2, sg_rng);
                        vals.push_back(l2_distance(attr::input_gradient(net, x, tgt), sg));
                    } else {
                        throw ConfigError("metrics: unknown metric '" + metric + "'");
                    }
                } catch (const UndefinedCorrelationError&) {
                    ++excluded;
                }
            }
            double mean = 0.0, sd = 0.0;
            for (double v : vals) mean += v;
            if (!vals.empty()) mean /= static_cast<double>(vals.size());
            for (double v : vals) sd += (v - mean) * (v - mean);
            if (vals.size() > 1) sd = std::sqrt(sd / static_cast<double>(vals.size() - 1));
            per_metric[metric] = {{"mean", mean},
                                  {"sd", sd},
                                  {"count", vals.size()},
                                  {"excluded", excluded},
                                  {"per_sample", vals}};
        }
        results[method_name] = std::move(per_metric);
    }

    json report = provenance(cfg);
    report["model"] = model_path;
    report["samples"] = n;
    report["settings"] = {{"smoothgrad_n", 50}, {"smoothgrad_sigma", 0.2},  {"ig_n", 50},
                          {"grid", 20},         {"mufid_k_fraction", 0.2},  {"mufid_subsets", 32},
                          {"deletion_steps", 20}, {"stability_radius", 0.3},
                          {"stability_neighbors", 8},
                          {"robustness", "restricted gradient + 20-step bisection"}};
    report["results"] = std::move(results);
    write_text(out_path, report.dump(2) + "\n");
    std::printf("metrics written to %s (%zu samples)\n", out_path.c_str(), n);
    return 0;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

int cmd_verify(const CommonFlags& flags, const std::string& model_path, const std::string& out_path,
               double tau) {
    cli::ExperimentConfig cfg = load_and_override(flags);
    const LipNet net = load(model_path);
    const data::Dataset ds = cli::build_dataset(cfg.dataset);

    const verify::GeometryReport geo = verify::check_boundary(net, ds, tau);
    const verify::CertificateReport cert = verify::check_certificate(net, ds);

    json report = provenance(cfg);
    report["model"] = model_path;
    report["samples"] = geo.samples;
    report["degenerate"] = geo.degenerate;
    report["tau"] = geo.tau;
    report["max_abs_f"] = geo.max_abs_f;
    report["grad_norm"] = {{"mean", geo.grad_norm.mean}, {"p5", geo.grad_norm.p5}, {"p95", geo.grad_norm.p95}};
    report["residual"] = {{"mean", geo.residual.mean}, {"p5", geo.residual.p5}, {"p95", geo.residual.p95}};
    report["frac_residual_le_tau"] = geo.frac_residual_le_tau;
    report["certificate"] = {{"pass_rate", cert.pass_rate},
                             {"tight_rate", cert.tight_rate},
                             {"censored", cert.censored},
                             {"samples", cert.samples}};
    write_text(out_path, report.dump(2) + "\n");
    std::printf("verify: grad_norm_mean=%.4f residual_frac=%.4f certificate_pass=%.4f -> %s\n",
                geo.grad_norm.mean, geo.frac_residual_le_tau, cert.pass_rate, out_path.c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// plot
// ---------------------------------------------------------------------------

int cmd_plot(const CommonFlags& flags, const std::string& model_path, const std::string& what,
             const std::string& out_path, int resolution, std::size_t max_points) {
    cli::ExperimentConfig cfg = load_and_override(flags);
    const LipNet net = load(model_path);
    data::Dataset ds = cli::build_dataset(cfg.dataset);
    if (max_points > 0 && max_points < ds.size()) {
        Rng mix(cfg.seed);
        ds = data::head_subset(data::shuffled(ds, mix), max_points);
    }
    if (ds.meta.d != 2) throw ConfigError("plot: needs a 2-D dataset");

    double xmin = 1e300, ymin = 1e300, xmax = -1e300, ymax = -1e300;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        xmin = std::min(xmin, ds.inputs.at(i, 0));
        xmax = std::max(xmax, ds.inputs.at(i, 0));
        ymin = std::min(ymin, ds.inputs.at(i, 1));
        ymax = std::max(ymax, ds.inputs.at(i, 1));
    }
    const double pad = 0.15 * std::max(xmax - xmin, ymax - ymin);
    fig::SvgFigure figure;
    figure.bbox = {xmin - pad, ymin - pad, xmax + pad, ymax + pad};
    figure.points = &ds;

    const bool want_levels = what.find("levelsets") != std::string::npos;
    const bool want_segments = what.find("segments") != std::string::npos;
    if (want_levels) {
        figure.contour = verify::level_set(net, figure.bbox, resolution);
    }
    if (want_segments) {
        for (std::size_t i = 0; i < ds.size(); ++i) {
            const Tensor x = ds.inputs.row_slice(i).reshaped({2});
            try {
                const attr::CounterfactualPath p = attr::boundary_point(net, x);
                figure.transport_segments.push_back(
                    {p.origin.at(0), p.origin.at(1), p.endpoint.at(0), p.endpoint.at(1)});
            } catch (const DegenerateGradientError&) {
                continue;
            }
        }
    }
    fig::write_svg(out_path, figure);
    std::printf("plot: %zu points, %zu contour segments, %zu transport segments -> %s\n", ds.size(),
                figure.contour.size(), figure.transport_segments.size(), out_path.c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// reproduce
// ---------------------------------------------------------------------------

cli::ExperimentConfig fashion_config(std::size_t subset, std::size_t epochs, const std::string& variant) {
    cli::ExperimentConfig cfg;
    cfg.dataset.kind = "idx";
    cfg.dataset.images = "train-images-idx3-ubyte";
    cfg.dataset.labels = "train-labels-idx1-ubyte";
    cfg.dataset.subset = subset;
    cfg.dataset.seed = 7;
    cfg.dataset.test_fraction = 0.2;
    cfg.model.arch = "otnn";
    cfg.model.widths = {784, 256, 256, 10};
    cfg.loss.variant = variant;
    cfg.loss.lambda = 10.0;
    cfg.loss.margin = 0.5;
    cfg.loss.alpha = 10.0;
    cfg.optimizer.batch_size = 128;
    cfg.optimizer.epochs = epochs;
    cfg.optimizer.schedule = {{0, 5e-4}, {epochs * 3 / 4, 5e-5}};
    cfg.seed = 42;
    return cfg;
}

int cmd_reproduce(const std::string& what, std::size_t subset, std::size_t epochs, int threads) {
    set_matmul_threads(threads);
    if (what == "table6") {
        // Same MLP and budget for both multiclass hKR variants.
        double acc_softmax = 0.0, acc_ova = 0.0;
        for (const std::string variant : {"multiclass_softmax", "multiclass_ova"}) {
            cli::ExperimentConfig cfg = fashion_config(subset, epochs, variant);
            const data::Dataset full = cli::build_dataset(cfg.dataset);
            Rng split_rng(cfg.dataset.seed ^ 0xA5A5u);
            const auto [train_ds, test_ds] =
                data::train_test_split(full, cfg.dataset.test_fraction, split_rng);
            Rng arch_rng(cfg.seed);
            LipNet net = cli::build_model(cfg, arch_rng);
            const TrainResult res = train(std::move(net), train_ds, cli::to_loss_spec(cfg.loss),
                                          cli::to_train_config(cfg));
            const double acc = accuracy(res.net, test_ds);
            std::printf("%-24s test_acc=%.4f\n", variant.c_str(), acc);
            if (variant == "multiclass_softmax") acc_softmax = acc;
            else acc_ova = acc;
        }
        std::printf("softmax-weighted variant %s the one-versus-all variant (%.1f vs %.1f points)\n",
                    acc_softmax >= acc_ova ? "beats or matches" : "LOSES TO", 100.0 * acc_softmax,
                    100.0 * acc_ova);
        return acc_softmax >= acc_ova ? 0 : 1;
    }
    if (what == "table1") {
        // Directional comparison of the OTNN / unconstrained pair on three
        // metrics: mufidelity-zero (higher better), saliency-smoothgrad L2
        // distance (lower), stability 1-spearman (lower).
        cli::ExperimentConfig base = fashion_config(subset, epochs, "multiclass_softmax");
        const data::Dataset full = cli::build_dataset(base.dataset);
        Rng split_rng(base.dataset.seed ^ 0xA5A5u);
        const auto [train_ds, test_ds] = data::train_test_split(full, base.dataset.test_fraction, split_rng);

        auto train_one = [&](const std::string& arch, const std::string& loss_variant) {
            cli::ExperimentConfig cfg = fashion_config(subset, epochs, loss_variant);
            cfg.model.arch = arch;
            Rng arch_rng(cfg.seed);
            LipNet net = cli::build_model(cfg, arch_rng);
            return train(std::move(net), train_ds, cli::to_loss_spec(cfg.loss),
                         cli::to_train_config(cfg))
                .net;
        };
        const LipNet otnn_net = train_one("otnn", "multiclass_softmax");
        const LipNet uncst_net = train_one("unconstrained", "cross_entropy");

        const std::size_t n = std::min<std::size_t>(200, test_ds.size());
        xai::GridSpec grid;
        grid.img_h = test_ds.meta.img_h;
        grid.img_w = test_ds.meta.img_w;
        double mufid[2] = {0, 0}, dist[2] = {0, 0}, stab[2] = {0, 0};
        const LipNet* nets[2] = {&otnn_net, &uncst_net};
        for (int m = 0; m < 2; ++m) {
            const LipNet& net = *nets[m];
            std::size_t kept = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const Tensor x = test_ds.inputs.row_slice(i).reshaped({test_ds.meta.d});
                const int tgt = predict_class(net, forward(net, x), test_ds.meta.q);
                const Tensor sal = attr::saliency(net, x, tgt).values;
                xai::MuFidelityOptions mo;
                mo.grid = grid;
                mo.seed = 1000 + i;
                try {
                    mufid[m] += xai::mu_fidelity(net, x, tgt, sal, mo);
                    ++kept;
                } catch (const UndefinedCorrelationError&) {
                }
                Rng sg(2000 + i);
                dist[m] += l2_distance(attr::input_gradient(net, x, tgt),
                                       attr::smoothgrad_signed(net, x, tgt, 50, 0.2, sg));
                xai::StabilityOptions so;
                so.seed = 3000 + i;
                stab[m] += xai::stability(net, x, tgt, xai::MethodKind::Saliency, so);
            }
            mufid[m] /= static_cast<double>(kept == 0 ? 1 : kept);
            dist[m] /= static_cast<double>(n);
            stab[m] /= static_cast<double>(n);
        }
        std::printf("%-28s %12s %12s\n", "metric", "otnn", "unconstrained");
        std::printf("%-28s %12.4g %12.4g\n", "mufidelity_zero (higher)", mufid[0], mufid[1]);
        std::printf("%-28s %12.4g %12.4g\n", "saliency_sg_l2 (lower)", dist[0], dist[1]);
        std::printf("%-28s %12.4g %12.4g\n", "stability_1-spearman (lower)", stab[0], stab[1]);
        const bool ok = mufid[0] > mufid[1] && dist[0] < dist[1] && stab[0] < stab[1];
        std::printf("directions %s\n", ok ? "hold" : "do NOT all hold");
        return ok ? 0 : 1;
    }
    throw ConfigError("reproduce: unknown target '" + what + "' (use table6 or table1)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"1-Lipschitz networks with the hKR loss: training, attribution, metrics, verification"};
    app.name("otnn");  // keep --help output independent of the invocation path
    app.require_subcommand(1);

    CommonFlags flags;

    // train
    auto* train_cmd = app.add_subcommand("train", "Train a model from a config");
    std::string out_model = "model.json", out_history = "history.csv";
    train_cmd->add_option("--config", flags.config_path, "Experiment config JSON")->required();
    train_cmd->add_option("--out", out_model, "Model output path");
    train_cmd->add_option("--history", out_history, "Loss history CSV path");

    // explain
    auto* explain_cmd = app.add_subcommand("explain", "Write an attribution map for one sample");
    std::string model_path, method = "saliency", input_spec = "idx:0", out_path = "map.pgm";
    int target = -1;
    explain_cmd->add_option("--model", model_path, "Model JSON")->required();
    explain_cmd->add_option("--config", flags.config_path, "Config with the dataset spec")->required();
    explain_cmd->add_option("--method", method, "saliency|smoothgrad|ig|gradinput");
    explain_cmd->add_option("--input", input_spec, "Sample selector, idx:<k>");
    explain_cmd->add_option("--out", out_path, "PGM output path (JSON sidecar alongside)");
    explain_cmd->add_option("--target", target, "Target class (default: predicted)");

    // metrics
    auto* metrics_cmd = app.add_subcommand("metrics", "Score attribution methods with XAI metrics");
    std::string methods_csv = "saliency", metrics_csv = "mufid_zero";
    std::size_t max_samples = 200;
    metrics_cmd->add_option("--model", model_path, "Model JSON")->required();
    metrics_cmd->add_option("--config", flags.config_path, "Config with the dataset spec")->required();
    metrics_cmd->add_option("--methods", methods_csv, "Comma list: saliency,smoothgrad,ig,gradinput");
    metrics_cmd->add_option("--metrics", metrics_csv,
                            "Comma list: mufid_zero,mufid_uniform,deletion,insertion,robustness_sr,"
                            "stability_spearman,stability_l2,complexity,sal_sg_distance");
    metrics_cmd->add_option("--out", out_path, "Report JSON path");
    metrics_cmd->add_option("--samples", max_samples, "Max samples");

    // verify
    auto* verify_cmd = app.add_subcommand("verify", "Boundary/certificate geometry report");
    double tau = -1.0;
    verify_cmd->add_option("--model", model_path, "Model JSON")->required();
    verify_cmd->add_option("--config", flags.config_path, "Config with the dataset spec")->required();
    verify_cmd->add_option("--out", out_path, "Geometry report JSON path");
    verify_cmd->add_option("--tau", tau, "Residual threshold (default 0.1 max|f|)");

    // plot
    auto* plot_cmd = app.add_subcommand("plot", "SVG figure: points, level set, transport segments");
    std::string what = "levelsets,segments";
    int resolution = 160;
    std::size_t max_points = 400;
    plot_cmd->add_option("--model", model_path, "Model JSON")->required();
    plot_cmd->add_option("--config", flags.config_path, "Config with the dataset spec")->required();
    plot_cmd->add_option("--what", what, "Comma list: levelsets,segments");
    plot_cmd->add_option("--out", out_path, "SVG output path");
    plot_cmd->add_option("--resolution", resolution, "Contour grid resolution");
    plot_cmd->add_option("--points", max_points, "Max scatter points");

    // reproduce
    auto* repro_cmd = app.add_subcommand("reproduce", "Desk-scale reproductions: table6 | table1");
    std::string what_repro;
    std::size_t subset = 10000, epochs = 15;
    repro_cmd->add_option("what", what_repro, "table6 | table1")->required();
    repro_cmd->add_option("--subset", subset, "Training subset size");
    repro_cmd->add_option("--epochs", epochs, "Epochs per variant");

    for (auto* cmd : {train_cmd, explain_cmd, metrics_cmd, verify_cmd, plot_cmd}) {
        cmd->add_option("--seed", flags.seed, "Seed override")->each([&](const std::string&) {
            flags.seed_set = true;
        });
        cmd->add_option("--threads", flags.threads, "Worker threads for matmul");
        cmd->add_option("--subset", flags.subset, "Dataset subset override");
    }
    repro_cmd->add_option("--threads", flags.threads, "Worker threads for matmul");

    try {
        app.parse(argc, argv);
        set_matmul_threads(flags.threads);
        if (train_cmd->parsed()) return cmd_train(flags, out_model, out_history);
        if (explain_cmd->parsed()) return cmd_explain(flags, model_path, method, input_spec, out_path, target);
        if (metrics_cmd->parsed())
            return cmd_metrics(flags, model_path, methods_csv, metrics_csv, out_path, max_samples);
        if (verify_cmd->parsed()) return cmd_verify(flags, model_path, out_path, tau);
        if (plot_cmd->parsed())
            return cmd_plot(flags, model_path, what, out_path, resolution, max_points);
        if (repro_cmd->parsed()) return cmd_reproduce(what_repro, subset, epochs, flags.threads);
        return 0;
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const VersionError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    } catch (const DimensionError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 5;
    } catch (const ArityError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 5;
    } catch (const DegenerateBatchError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 6;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 7;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
