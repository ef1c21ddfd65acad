// Command-line driver: seeded, reproducible experiment pipelines with
// JSON/CSV artifacts under an output directory.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wsc/adversarial.hpp"
#include "wsc/hopfield.hpp"
#include "wsc/idx.hpp"
#include "wsc/io.hpp"
#include "wsc/kernels.hpp"
#include "wsc/landscape.hpp"
#include "wsc/mlp.hpp"
#include "wsc/patterns.hpp"
#include "wsc/rng.hpp"
#include "wsc/synth.hpp"
#include "wsc/weightspace.hpp"

namespace fs = std::filesystem;

namespace {

struct GlobalOpts {
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    std::size_t threads = 1;
};

void require_file(const std::string& path, const std::string& what) {
    if (path.empty()) throw wsc::InvalidArgument("missing " + what + " path");
    if (!fs::exists(path)) {
        throw wsc::InvalidArgument(what + " file does not exist: " + path);
    }
}

fs::path prepare_out_dir(const GlobalOpts& g) {
    fs::path dir(g.out_dir);
    fs::create_directories(dir);
    return dir;
}

std::vector<wsc::GrayImage> load_limited(const std::string& images, const std::string& labels,
                                         std::size_t limit) {
    auto data = wsc::load_idx(images, labels);
    if (limit > 0 && data.size() > limit) data.resize(limit);
    return data;
}

// Per-class majority vote over binarized images (ties fall to -1), one
// prototype per class present in the data, ordered by class id.
wsc::PatternSet class_mean_prototypes(const std::vector<wsc::GrayImage>& data,
                                      double threshold) {
    if (data.empty()) throw wsc::InvalidArgument("no images to build prototypes from");
    const std::size_t dim = data.front().pixels.size();
    std::map<int, std::pair<std::vector<double>, std::size_t>> sums;
    for (const auto& img : data) {
        const wsc::BipolarPattern bp = wsc::binarize(img, threshold);
        auto& [sum, count] = sums[img.label];
        if (sum.empty()) sum.assign(dim, 0.0);
        for (std::size_t i = 0; i < dim; ++i) sum[i] += bp[i];
        ++count;
    }
    wsc::PatternSet protos;
    for (const auto& [label, entry] : sums) {
        std::vector<double> bits(dim);
        for (std::size_t i = 0; i < dim; ++i) bits[i] = entry.first[i] > 0.0 ? 1.0 : -1.0;
        protos.patterns.emplace_back(std::move(bits));
        protos.labels.push_back(label);
    }
    return protos;
}

void write_history_csv(const wsc::TrainHistory& history, const std::string& path) {
    std::ofstream os = wsc::open_out(path);
    os << "epoch,loss,accuracy\n";
    for (std::size_t e = 0; e < history.loss.size(); ++e) {
        os << e << ',' << wsc::format_double(history.loss[e]) << ','
           << wsc::format_double(history.accuracy[e]) << '\n';
    }
}

std::vector<std::size_t> parse_layer_sizes(const std::string& csv) {
    std::vector<std::size_t> sizes;
    std::size_t pos = 0;
    while (pos < csv.size()) {
        std::size_t next = csv.find(',', pos);
        if (next == std::string::npos) next = csv.size();
        sizes.push_back(static_cast<std::size_t>(std::stoull(csv.substr(pos, next - pos))));
        pos = next + 1;
    }
    return sizes;
}

// ---- subcommand option blocks -------------------------------------------

struct SynthOpts {
    std::size_t train_count = 2000;
    std::size_t test_count = 2000;
    double noise = 0.12;
    int shift = 0;
};

struct TrainMlpOpts {
    std::string images, labels;
    std::string layers = "784,64,10";
    double lr = 0.05;
    std::size_t epochs = 20;
    std::size_t batch = 32;
    std::size_t limit = 0;
    int ascendance_layer = -1;
};

struct TrainHopfieldOpts {
    std::string images, labels;
    double eta = 0.1;
    std::size_t max_iters = 1000;
    std::size_t neighbors = 0;
    double threshold = 0.5;
    std::size_t limit = 0;
};

struct AttackOpts {
    std::string model, net, prototypes, images, labels;
    std::size_t n = 40;
    double epsilon = 0.25;
    std::size_t limit = 0;
    std::size_t reject_threshold = 0;
    bool dump_idx = false;
};

struct EquioutputOpts {
    std::string layers = "2,3,2";
    std::size_t probes = 100;
    double tol = 1e-10;
    std::size_t max_enumeration = 10000;
};

struct PartitionOpts {
    std::size_t n = 4;
    std::size_t classes = 2;
    std::size_t oracle_radius = 1;
    std::size_t adversarial_radius = 1;
    double train_fraction = 0.5;
    std::string model = "trained";
    int constant_class = 0;
    std::size_t epochs = 300;
    double lr = 0.05;
    bool per_pattern = false;
};

struct LandscapeOpts {
    std::string net, prototypes;
    int anchor_a = 0;
    int anchor_b = 1;  // -1: negation of anchor_a
    std::size_t resolution = 33;
    std::size_t samples = 0;
};

// ---- subcommand implementations ------------------------------------------

void run_synth(const GlobalOpts& g, const SynthOpts& o) {
    const fs::path dir = prepare_out_dir(g);
    wsc::SynthConfig cfg;
    cfg.noise_sigma = o.noise;
    cfg.max_shift = o.shift;

    cfg.count = o.train_count;
    cfg.seed = wsc::derive_seed(g.seed, "synth-train");
    const auto train = wsc::synth_digits(cfg);
    wsc::save_idx(train, 28, 28, (dir / "train-images-idx3-ubyte").string(),
                  (dir / "train-labels-idx1-ubyte").string());

    cfg.count = o.test_count;
    cfg.seed = wsc::derive_seed(g.seed, "synth-test");
    const auto test = wsc::synth_digits(cfg);
    wsc::save_idx(test, 28, 28, (dir / "t10k-images-idx3-ubyte").string(),
                  (dir / "t10k-labels-idx1-ubyte").string());

    std::printf("synth-data: wrote %zu train / %zu test images to %s\n", train.size(),
                test.size(), dir.string().c_str());
}

void run_train_mlp(const GlobalOpts& g, const TrainMlpOpts& o) {
    require_file(o.images, "training images");
    require_file(o.labels, "training labels");
    const auto sizes = parse_layer_sizes(o.layers);
    if (sizes.size() < 2) throw wsc::InvalidArgument("need at least two layer sizes");
    if (o.lr <= 0.0) throw wsc::InvalidArgument("learning rate must be positive");
    if (o.batch == 0) throw wsc::InvalidArgument("batch size must be positive");

    const auto data = load_limited(o.images, o.labels, o.limit);
    const fs::path dir = prepare_out_dir(g);

    wsc::Mlp m = wsc::init_mlp(sizes, wsc::derive_seed(g.seed, "mlp-init"));
    wsc::TrainConfig cfg;
    cfg.learning_rate = o.lr;
    cfg.epochs = o.epochs;
    cfg.batch_size = o.batch;
    cfg.seed = wsc::derive_seed(g.seed, "mlp-train");

    wsc::TrainHistory history;
    if (o.ascendance_layer >= 0) {
        wsc::AscendanceRecorder recorder(m, static_cast<std::size_t>(o.ascendance_layer));
        history = wsc::train(m, data, cfg, recorder.hook());
        wsc::write_ascendance_csv(recorder.trace(), (dir / "ascendance.csv").string());
    } else {
        history = wsc::train(m, data, cfg);
    }

    wsc::save_mlp(m, (dir / "mlp.bin").string());
    write_history_csv(history, (dir / "mlp_history.csv").string());
    const double final_acc = history.accuracy.empty() ? 0.0 : history.accuracy.back();
    std::printf("train-mlp: %zu images, %zu epochs, final train accuracy %.4f\n",
                data.size(), o.epochs, final_acc);
}

void run_train_hopfield(const GlobalOpts& g, const TrainHopfieldOpts& o) {
    require_file(o.images, "training images");
    require_file(o.labels, "training labels");
    if (o.eta <= 0.0) throw wsc::InvalidArgument("eta must be positive");

    const auto data = load_limited(o.images, o.labels, o.limit);
    const fs::path dir = prepare_out_dir(g);

    const wsc::PatternSet protos = class_mean_prototypes(data, o.threshold);
    wsc::IterTrainConfig cfg;
    cfg.learning_rate = o.eta;
    cfg.max_iters = o.max_iters;
    cfg.neighbors_per_pattern = o.neighbors;
    cfg.seed = wsc::derive_seed(g.seed, "hopfield-train");

    const wsc::IterTrainResult result = wsc::iterative_train(protos, cfg);
    wsc::save_hopfield(result.net, (dir / "hopfield.bin").string());
    wsc::save_pattern_set(protos, (dir / "prototypes.pat").string());
    wsc::write_iter_log_csv(result.log, (dir / "hopfield_log.csv").string());

    std::printf("train-hopfield: %zu prototypes (N=%zu), stable %zu -> %zu in %zu iterations\n",
                protos.count(), protos.dim(), result.stable_before, result.stable_after,
                result.log.size());
}

void run_attack(const GlobalOpts& g, const AttackOpts& o) {
    require_file(o.model, "model");
    require_file(o.net, "hopfield net");
    require_file(o.prototypes, "prototypes");
    require_file(o.images, "attack images");
    require_file(o.labels, "attack labels");
    if (o.n == 0) throw wsc::InvalidArgument("n must be >= 1");
    if (o.epsilon < 0.0) throw wsc::InvalidArgument("epsilon must be nonnegative");

    const wsc::Mlp m = wsc::load_mlp(o.model);
    const wsc::HopfieldNet net = wsc::load_hopfield(o.net);
    const wsc::PatternSet protos = wsc::load_pattern_set(o.prototypes);
    const auto pool = load_limited(o.images, o.labels, o.limit);
    const fs::path dir = prepare_out_dir(g);

    auto records = wsc::generate_adversarial_set(m, pool, o.n, o.epsilon,
                                                 wsc::derive_seed(g.seed, "attack"));
    if (records.empty()) {
        throw wsc::InvalidArgument("no successful adversarial records were generated");
    }

    const std::size_t reject = o.reject_threshold == 0 ? net.dim() / 4 : o.reject_threshold;
    wsc::TransferOptions topts;
    topts.seed = wsc::derive_seed(g.seed, "attack-recall");
    topts.n_requested = o.n;
    const wsc::TransferReport report =
        wsc::transfer_experiment(std::move(records), net, protos, reject, topts);

    wsc::write_transfer_report_json(report, (dir / "transfer_report.json").string());
    if (o.dump_idx) {
        wsc::dump_records_idx(report.records, 28, 28,
                              (dir / "adv-images-idx3-ubyte").string(),
                              (dir / "adv-labels-idx1-ubyte").string());
    }
    std::printf("attack: %zu/%zu records; mlp fooled %.3f, hopfield fooled %.3f, "
                "unrecalled %.3f\n",
                report.n_generated, report.n_requested, report.mlp_fooled_fraction,
                report.hopfield_fooled_fraction, report.unrecalled_fraction);
}

void run_equioutput(const GlobalOpts& g, const EquioutputOpts& o) {
    const auto sizes = parse_layer_sizes(o.layers);
    if (sizes.size() < 3) throw wsc::InvalidArgument("need at least one hidden layer");
    std::vector<std::size_t> hidden(sizes.begin() + 1, sizes.end() - 1);

    const std::uint64_t count = wsc::replica_count(hidden);
    if (count > o.max_enumeration) {
        throw wsc::InvalidArgument("replica count " + std::to_string(count) +
                                   " exceeds enumeration limit " +
                                   std::to_string(o.max_enumeration));
    }
    const fs::path dir = prepare_out_dir(g);

    const wsc::Mlp m = wsc::init_mlp(sizes, wsc::derive_seed(g.seed, "equioutput"));
    const auto probes =
        wsc::make_probes(o.probes, m.input_dim(), wsc::derive_seed(g.seed, "equioutput-probes"));

    std::vector<std::vector<wsc::EquioutputTransform>> per_layer;
    for (std::size_t li = 0; li < hidden.size(); ++li) {
        per_layer.push_back(wsc::enumerate_layer_transforms(li, hidden[li]));
    }

    std::size_t checked = 0;
    std::size_t passing = 0;
    std::set<std::vector<double>> distinct;
    std::vector<std::size_t> pick(per_layer.size(), 0);
    for (;;) {
        wsc::Mlp variant = m;
        for (std::size_t li = 0; li < per_layer.size(); ++li) {
            variant = wsc::apply_transform(variant, per_layer[li][pick[li]]);
        }
        ++checked;
        if (wsc::equioutput_check(m, variant, probes, o.tol)) ++passing;
        std::vector<double> flat;
        for (const auto& layer : variant.layers) {
            flat.insert(flat.end(), layer.weights.data.begin(), layer.weights.data.end());
            flat.insert(flat.end(), layer.bias.begin(), layer.bias.end());
        }
        distinct.insert(std::move(flat));

        std::size_t li = 0;
        while (li < pick.size() && ++pick[li] == per_layer[li].size()) {
            pick[li] = 0;
            ++li;
        }
        if (li == pick.size()) break;
    }

    nlohmann::json j;
    j["hidden_sizes"] = hidden;
    j["replica_count"] = count;
    j["transforms_checked"] = checked;
    j["equioutput_passing"] = passing;
    j["distinct_weight_vectors"] = distinct.size();
    j["probes"] = o.probes;
    j["tol"] = o.tol;
    wsc::write_file_bytes((dir / "equioutput_report.json").string(), j.dump(2) + "\n");

    std::printf("equioutput: %zu/%zu transforms equioutput; %zu distinct weight vectors\n",
                passing, checked, distinct.size());
}

void run_partition(const GlobalOpts& g, const PartitionOpts& o) {
    if (o.model != "trained" && o.model != "constant" && o.model != "memorizer") {
        throw wsc::InvalidArgument("model must be trained|constant|memorizer");
    }
    const fs::path dir = prepare_out_dir(g);

    const wsc::ToySpace toy = wsc::make_toy_space(o.n, o.classes, o.oracle_radius,
                                                  o.train_fraction,
                                                  wsc::derive_seed(g.seed, "partition"));
    wsc::PatternSpace space(o.n);

    wsc::Mlp m;
    if (o.model == "constant") {
        m = wsc::init_mlp({o.n, o.classes}, 0);
        for (double& w : m.layers[0].weights.data) w = 0.0;
        m.layers[0].bias.assign(o.classes, 0.0);
        m.layers[0].bias[static_cast<std::size_t>(o.constant_class)] = 1.0;
    } else {
        std::vector<wsc::TrainSample> samples;
        if (o.model == "memorizer") {
            // Fit every oracle-labeled pattern; training to 100% makes the
            // model perfect on the whole labeled part of the space.
            for (std::size_t k = 0; k < space.size(); ++k) {
                if (toy.oracle[k].has_value()) {
                    samples.push_back(wsc::TrainSample{
                        space.at(k).bits(), wsc::one_hot(*toy.oracle[k], o.classes)});
                }
            }
        } else {
            for (std::size_t i = 0; i < toy.train.count(); ++i) {
                samples.push_back(wsc::TrainSample{toy.train.patterns[i].bits(),
                                                   wsc::one_hot(toy.train.labels[i], o.classes)});
            }
        }
        m = wsc::init_mlp({o.n, 16, o.classes}, wsc::derive_seed(g.seed, "partition-mlp"));
        wsc::TrainConfig cfg;
        cfg.learning_rate = o.lr;
        cfg.epochs = o.epochs;
        cfg.batch_size = 4;
        cfg.seed = wsc::derive_seed(g.seed, "partition-train");
        wsc::train(m, samples, cfg);
    }

    const wsc::PartitionReport report = wsc::partition_space(
        m, toy.train, toy.oracle, o.adversarial_radius, o.per_pattern, g.threads);
    wsc::write_partition_report_json(report, (dir / "partition_report.json").string());

    std::printf("partition: %zu = P_t+P_g+P_a+P_r = %zu+%zu+%zu+%zu (model=%s)\n",
                report.total, report.trained, report.generalized, report.adversarial,
                report.irrelevant, o.model.c_str());
}

void run_landscape(const GlobalOpts& g, const LandscapeOpts& o) {
    require_file(o.net, "hopfield net");
    require_file(o.prototypes, "prototypes");
    const wsc::HopfieldNet net = wsc::load_hopfield(o.net);
    const wsc::PatternSet protos = wsc::load_pattern_set(o.prototypes);
    if (o.anchor_a < 0 || static_cast<std::size_t>(o.anchor_a) >= protos.count()) {
        throw wsc::InvalidArgument("anchor-a prototype index out of range");
    }
    if (o.anchor_b >= 0 && static_cast<std::size_t>(o.anchor_b) >= protos.count()) {
        throw wsc::InvalidArgument("anchor-b prototype index out of range");
    }
    const fs::path dir = prepare_out_dir(g);

    const wsc::BipolarPattern& a = protos.patterns[static_cast<std::size_t>(o.anchor_a)];
    const wsc::BipolarPattern b =
        o.anchor_b < 0 ? a.negated() : protos.patterns[static_cast<std::size_t>(o.anchor_b)];

    wsc::SurfaceGrid grid = wsc::geodesic_grid(net, a, b, o.resolution,
                                               wsc::derive_seed(g.seed, "landscape"),
                                               g.threads);
    grid.anchors_desc = "prototype " + std::to_string(o.anchor_a) + " to " +
                        (o.anchor_b < 0 ? "its negation" : "prototype " + std::to_string(o.anchor_b));
    wsc::write_surface_csv(grid, (dir / "surface.csv").string());
    wsc::write_surface_meta_json(grid, (dir / "surface_meta.json").string());

    const auto basin = wsc::basin_depth_report(net, protos, o.samples,
                                               wsc::derive_seed(g.seed, "landscape-basin"));
    wsc::write_basin_csv(basin, (dir / "basin.csv").string());

    const auto [emin, emax] = std::minmax_element(grid.energy.begin(), grid.energy.end());
    std::printf("landscape: %zux%zu surface, energy range [%g, %g], mean basin gap %g\n",
                o.resolution, o.resolution, *emin, *emax, wsc::mean_gap(basin));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dense-network vs associative-memory experiment harness"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read options from a config file (INI, [subcommand] sections)");

    GlobalOpts g;
    app.add_option("--seed", g.seed, "global seed; per-component seeds derive from it");
    app.add_option("--out", g.out_dir, "output directory");
    app.add_option("--threads", g.threads, "worker threads for parallel-safe loops");

    SynthOpts synth;
    auto* cmd_synth = app.add_subcommand("synth-data", "generate a synthetic digit corpus (IDX)");
    cmd_synth->add_option("--count", synth.train_count, "training images");
    cmd_synth->add_option("--test-count", synth.test_count, "test images");
    cmd_synth->add_option("--noise", synth.noise, "pixel noise sigma");
    cmd_synth->add_option("--shift", synth.shift, "max translation jitter (pixels)");

    TrainMlpOpts tm;
    auto* cmd_tm = app.add_subcommand("train-mlp", "train the dense network");
    cmd_tm->add_option("--images", tm.images, "IDX image file")->required();
    cmd_tm->add_option("--labels", tm.labels, "IDX label file")->required();
    cmd_tm->add_option("--layers", tm.layers, "comma-separated layer sizes");
    cmd_tm->add_option("--lr", tm.lr, "learning rate");
    cmd_tm->add_option("--epochs", tm.epochs, "epochs");
    cmd_tm->add_option("--batch", tm.batch, "minibatch size");
    cmd_tm->add_option("--limit", tm.limit, "use only the first K images (0 = all)");
    cmd_tm->add_option("--ascendance-layer", tm.ascendance_layer,
                       "record the weight-order trace of this layer (-1 = off)");

    TrainHopfieldOpts th;
    auto* cmd_th = app.add_subcommand("train-hopfield", "build prototypes and train the net");
    cmd_th->add_option("--images", th.images, "IDX image file")->required();
    cmd_th->add_option("--labels", th.labels, "IDX label file")->required();
    cmd_th->add_option("--eta", th.eta, "correction step");
    cmd_th->add_option("--max-iters", th.max_iters, "iteration cap");
    cmd_th->add_option("--neighbors", th.neighbors, "neighbor draws per pattern (0 = N)");
    cmd_th->add_option("--threshold", th.threshold, "binarization threshold");
    cmd_th->add_option("--limit", th.limit, "use only the first K images (0 = all)");

    AttackOpts at;
    auto* cmd_at = app.add_subcommand("attack", "FGSM attack and associative-recall transfer");
    cmd_at->add_option("--model", at.model, "trained mlp file")->required();
    cmd_at->add_option("--net", at.net, "trained hopfield file")->required();
    cmd_at->add_option("--prototypes", at.prototypes, "prototype file")->required();
    cmd_at->add_option("--images", at.images, "IDX image file")->required();
    cmd_at->add_option("--labels", at.labels, "IDX label file")->required();
    cmd_at->add_option("--n", at.n, "adversarial records to generate");
    cmd_at->add_option("--epsilon", at.epsilon, "attack budget in [0,1] pixel units");
    cmd_at->add_option("--limit", at.limit, "scan only the first K images (0 = all)");
    cmd_at->add_option("--reject-threshold", at.reject_threshold,
                       "unrecalled beyond this Hamming distance (0 = N/4)");
    cmd_at->add_flag("--dump-idx", at.dump_idx, "also dump perturbed images as IDX");

    EquioutputOpts eq;
    auto* cmd_eq = app.add_subcommand("equioutput", "enumerate and verify weight replicas");
    cmd_eq->add_option("--layers", eq.layers, "comma-separated layer sizes");
    cmd_eq->add_option("--probes", eq.probes, "random probe inputs");
    cmd_eq->add_option("--tol", eq.tol, "output agreement tolerance");
    cmd_eq->add_option("--max-enumeration", eq.max_enumeration, "refuse larger groups");

    PartitionOpts pa;
    auto* cmd_pa = app.add_subcommand("partition", "partition an enumerable pattern space");
    cmd_pa->add_option("--n", pa.n, "pattern space dimension (<= 20)");
    cmd_pa->add_option("--classes", pa.classes, "toy classes");
    cmd_pa->add_option("--oracle-radius", pa.oracle_radius, "oracle Hamming ball radius");
    cmd_pa->add_option("--adversarial-radius", pa.adversarial_radius, "P_a Hamming radius");
    cmd_pa->add_option("--train-fraction", pa.train_fraction, "fraction of covered patterns trained on");
    cmd_pa->add_option("--model", pa.model, "trained|constant|memorizer");
    cmd_pa->add_option("--constant-class", pa.constant_class, "class for the constant model");
    cmd_pa->add_option("--epochs", pa.epochs, "training epochs for toy models");
    cmd_pa->add_option("--lr", pa.lr, "learning rate for toy models");
    cmd_pa->add_flag("--per-pattern", pa.per_pattern, "include per-pattern labels in the report");

    LandscapeOpts la;
    auto* cmd_la = app.add_subcommand("landscape", "sample the energy surface and basin depths");
    cmd_la->add_option("--net", la.net, "hopfield net file")->required();
    cmd_la->add_option("--prototypes", la.prototypes, "prototype file")->required();
    cmd_la->add_option("--anchor-a", la.anchor_a, "prototype index of the first anchor");
    cmd_la->add_option("--anchor-b", la.anchor_b, "prototype index of the second anchor (-1 = negation)");
    cmd_la->add_option("--resolution", la.resolution, "grid resolution per axis");
    cmd_la->add_option("--samples", la.samples, "neighbor samples per pattern (0 = exhaustive)");

    try {
        app.parse(argc, argv);
        if (*cmd_synth) run_synth(g, synth);
        if (*cmd_tm) run_train_mlp(g, tm);
        if (*cmd_th) run_train_hopfield(g, th);
        if (*cmd_at) run_attack(g, at);
        if (*cmd_eq) run_equioutput(g, eq);
        if (*cmd_pa) run_partition(g, pa);
        if (*cmd_la) run_landscape(g, la);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const wsc::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "unexpected error: %s\n", e.what());
        return 1;
    }
    return 0;
}
