#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include <json.hpp>

#include "testutil.hpp"
#include "wsc/error.hpp"
#include "wsc/io.hpp"
#include "wsc/mlp.hpp"
#include "wsc/rng.hpp"
#include "wsc/weightspace.hpp"

using namespace wsc;

namespace {

std::vector<double> flatten(const Mlp& m) {
    std::vector<double> flat;
    for (const auto& l : m.layers) {
        flat.insert(flat.end(), l.weights.data.begin(), l.weights.data.end());
        flat.insert(flat.end(), l.bias.begin(), l.bias.end());
    }
    return flat;
}

EquioutputTransform random_transform(std::size_t layer, std::size_t units, Rng& rng) {
    EquioutputTransform t = EquioutputTransform::identity(layer, units);
    rng.shuffle(t.permutation);
    for (auto& f : t.sign_flips) f = static_cast<std::uint8_t>(rng.below(2));
    return t;
}

// O(n^2) pair-counting tau, the independent oracle for the merge-sort version.
double naive_tau(const std::vector<std::uint32_t>& initial_ranks,
                 const std::vector<double>& values) {
    const std::size_t n = initial_ranks.size();
    long concordant = 0;
    long discordant = 0;
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            const double ord_initial =
                initial_ranks[a] < initial_ranks[b] ? 1.0 : -1.0;
            double ord_now = 0.0;
            if (values[a] < values[b]) ord_now = 1.0;
            else if (values[a] > values[b]) ord_now = -1.0;
            if (ord_now == 0.0 || ord_initial == ord_now) ++concordant;
            else ++discordant;
        }
    }
    const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
    return (concordant - discordant) / pairs;
}

}  // namespace

TEST_CASE("identity transform leaves the network bitwise unchanged") {
    const Mlp m = init_mlp({4, 3, 2}, 11);
    const Mlp out = apply_transform(m, EquioutputTransform::identity(0, 3));
    CHECK(flatten(out) == flatten(m));
}

TEST_CASE("all-units sign flip is an involution") {
    const Mlp m = init_mlp({4, 3, 2}, 12);
    EquioutputTransform t = EquioutputTransform::identity(0, 3);
    t.sign_flips.assign(3, 1);
    const Mlp once = apply_transform(m, t);
    CHECK(flatten(once) != flatten(m));
    const Mlp twice = apply_transform(once, t);
    CHECK(flatten(twice) == flatten(m));
}

TEST_CASE("random transforms preserve the forward function to 1e-12") {
    Rng rng(13);
    const Mlp m = init_mlp({4, 3, 2}, 14);
    const auto probes = make_probes(100, 4, 15);
    for (int trial = 0; trial < 20; ++trial) {
        const Mlp out = apply_transform(m, random_transform(0, 3, rng));
        for (const auto& x : probes) {
            const auto ya = forward(m, x);
            const auto yb = forward(out, x);
            for (std::size_t i = 0; i < ya.size(); ++i) {
                CHECK(std::abs(ya[i] - yb[i]) <= 1e-12);
            }
        }
    }
}

TEST_CASE("transform guards: layer index, activation, bijection") {
    const Mlp m = init_mlp({4, 3, 2}, 16);
    CHECK_THROWS_AS(apply_transform(m, EquioutputTransform::identity(1, 2)), InvalidArgument);

    const Mlp linear = init_mlp({4, 3, 2}, 16, Activation::identity);
    Mlp odd_broken = linear;
    odd_broken.layers[0].activation = Activation::identity;
    CHECK_THROWS_AS(apply_transform(odd_broken, EquioutputTransform::identity(0, 3)),
                    InvalidArgument);

    EquioutputTransform bad = EquioutputTransform::identity(0, 3);
    bad.permutation = {0, 0, 2};
    CHECK_THROWS_AS(apply_transform(m, bad), InvalidArgument);
}

TEST_CASE("composition law: apply(first) then apply(second) == apply(compose)") {
    Rng rng(17);
    const Mlp m = init_mlp({3, 4, 2}, 18);
    for (int trial = 0; trial < 30; ++trial) {
        const auto t1 = random_transform(0, 4, rng);
        const auto t2 = random_transform(0, 4, rng);
        const Mlp sequential = apply_transform(apply_transform(m, t1), t2);
        const Mlp composed = apply_transform(m, compose(t2, t1));
        CHECK(flatten(sequential) == flatten(composed));  // exact: moves and negations only
    }
}

TEST_CASE("equioutput_check is reflexive at tol 0 and detects perturbations") {
    const Mlp m = init_mlp({4, 3, 2}, 19);
    const auto probes = make_probes(100, 4, 20);
    CHECK(equioutput_check(m, m, probes, 0.0));

    Mlp perturbed = m;
    perturbed.layers[0].weights.at(1, 2) += 0.1;
    CHECK_FALSE(equioutput_check(m, perturbed, probes, 1e-10));
}

TEST_CASE("replica_count closed form and overflow guard") {
    CHECK(replica_count({3}) == 48);
    CHECK(replica_count({1}) == 2);
    CHECK(replica_count({2, 2}) == 64);
    CHECK(replica_count({}) == 1);
    CHECK_THROWS_AS(replica_count({25}), OverflowError);
    CHECK_THROWS_AS(replica_count({0}), InvalidArgument);
}

TEST_CASE("enumeration oracle: hidden [2] gives 8 distinct equioutput replicas") {
    const Mlp m = init_mlp({3, 2, 2}, 21);
    const auto transforms = enumerate_layer_transforms(0, 2);
    REQUIRE(transforms.size() == replica_count({2}));
    const auto probes = make_probes(60, 3, 22);
    std::set<std::vector<double>> distinct;
    for (const auto& t : transforms) {
        const Mlp out = apply_transform(m, t);
        CHECK(equioutput_check(m, out, probes, 1e-10));
        distinct.insert(flatten(out));
    }
    CHECK(distinct.size() == transforms.size());
}

TEST_CASE("kendall tau: frozen cases and the pair-counting oracle") {
    const std::vector<std::uint32_t> ranks{0, 1, 2, 3};
    CHECK(kendall_tau_vs_initial(ranks, {1.0, 2.0, 3.0, 4.0}) == 1.0);
    CHECK(kendall_tau_vs_initial(ranks, {4.0, 3.0, 2.0, 1.0}) == -1.0);
    CHECK(kendall_tau_vs_initial({0}, {5.0}) == 1.0);

    Rng rng(23);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 2 + rng.below(30);
        std::vector<double> initial_values(n);
        std::vector<double> current(n);
        for (std::size_t i = 0; i < n; ++i) {
            initial_values[i] = rng.uniform(-1.0, 1.0);
            current[i] = rng.uniform(-1.0, 1.0);
        }
        // initial ranks from the sorted order of initial_values
        std::vector<std::uint32_t> idx(n);
        for (std::uint32_t i = 0; i < n; ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) {
            return initial_values[a] < initial_values[b];
        });
        std::vector<std::uint32_t> ranks2(n);
        for (std::uint32_t r = 0; r < n; ++r) ranks2[idx[r]] = r;

        CHECK(kendall_tau_vs_initial(ranks2, current) ==
              doctest::Approx(naive_tau(ranks2, current)).epsilon(1e-12));
    }
}

TEST_CASE("ascendance recorder: zero epochs, zero learning rate") {
    const Mlp m = init_mlp({4, 5, 2}, 24);
    AscendanceRecorder rec(m, 0);
    CHECK(rec.trace().ranks.size() == 1);
    CHECK(rec.trace().order_preserved[0] == 1);
    CHECK(rec.trace().kendall_tau[0] == 1.0);

    std::vector<GrayImage> data(6);
    Rng rng(25);
    for (std::size_t k = 0; k < data.size(); ++k) {
        data[k].label = static_cast<int>(k % 2);
        data[k].pixels.resize(4);
        for (double& p : data[k].pixels) p = rng.uniform();
    }
    Mlp m2 = init_mlp({4, 5, 2}, 24);
    AscendanceRecorder rec2(m2, 0);
    TrainConfig cfg;
    cfg.learning_rate = 0.0;  // weights never move
    cfg.epochs = 4;
    cfg.seed = 1;
    train(m2, data, cfg, rec2.hook());
    REQUIRE(rec2.trace().kendall_tau.size() == 5);
    for (double tau : rec2.trace().kendall_tau) CHECK(tau == 1.0);
    for (auto p : rec2.trace().order_preserved) CHECK(p == 1);
}

TEST_CASE("ascendance CSV layout") {
    const auto dir = wsctest::scratch_dir("asc_csv");
    AscendanceTrace trace;
    trace.kendall_tau = {1.0, 0.5};
    trace.order_preserved = {1, 0};
    trace.ranks = {{0, 1}, {1, 0}};
    write_ascendance_csv(trace, (dir / "a.csv").string());
    CHECK(read_file_bytes((dir / "a.csv").string()) ==
          "epoch,order_preserved,kendall_tau\n0,1,1\n1,0,0.5\n");
}

TEST_CASE("partition: exact partition and per-pattern labels") {
    const ToySpace toy = make_toy_space(4, 2, 1, 0.5, 31);
    CHECK(toy.oracle.size() == 16);
    CHECK(toy.train.labeled());

    const Mlp m = init_mlp({4, 6, 2}, 32);  // untrained is fine for the identity
    const PartitionReport r = partition_space(m, toy.train, toy.oracle, 1, true);
    CHECK(r.total == 16);
    CHECK(r.trained + r.generalized + r.adversarial + r.irrelevant == 16);
    REQUIRE(r.per_pattern.size() == 16);
    std::size_t counts[4] = {0, 0, 0, 0};
    for (auto c : r.per_pattern) {
        REQUIRE(c <= 3);
        ++counts[c];
    }
    CHECK(counts[0] == r.trained);
    CHECK(counts[1] == r.generalized);
    CHECK(counts[2] == r.adversarial);
    CHECK(counts[3] == r.irrelevant);

    // threads must not change the outcome
    const PartitionReport r2 = partition_space(m, toy.train, toy.oracle, 1, true, 3);
    CHECK(r2.per_pattern == r.per_pattern);

    OracleLabeling incomplete(8, std::nullopt);
    CHECK_THROWS_AS(partition_space(m, toy.train, incomplete, 1), InvalidArgument);
}

TEST_CASE("partition report JSON carries the identity") {
    const auto dir = wsctest::scratch_dir("part_json");
    PartitionReport r;
    r.trained = 3;
    r.generalized = 5;
    r.adversarial = 2;
    r.irrelevant = 6;
    r.total = 16;
    write_partition_report_json(r, (dir / "p.json").string());
    const auto j = nlohmann::json::parse(read_file_bytes((dir / "p.json").string()));
    CHECK(j["P_u"] == 16);
    CHECK(j["identity_holds"] == true);
    CHECK(j["P_t"].get<int>() + j["P_g"].get<int>() + j["P_a"].get<int>() +
              j["P_r"].get<int>() ==
          j["P_u"].get<int>());
}

TEST_CASE("hopfield probe: identity and relabeling agree, asymmetric flips are rejected") {
    Rng rng(33);
    const PatternSet stored = wsctest::random_pattern_set(3, 32, rng);
    const HopfieldNet net = hebbian_weights(stored);

    std::vector<BipolarPattern> probes;
    for (std::size_t k = 0; k < 30; ++k) {
        std::set<std::size_t> flips;
        while (flips.size() < 3) flips.insert(rng.below(32));
        probes.push_back(flip_bits(stored.patterns[k % 3], flips));
    }

    std::vector<HopfieldTransform> transforms;
    transforms.push_back(HopfieldTransform::identity(32));

    Rng perm_rng(34);
    HopfieldTransform relabel = HopfieldTransform::relabeling(
        "relabeling", perm_rng.permutation(32), std::vector<std::int8_t>(32, 1), true);
    transforms.push_back(relabel);

    HopfieldTransform row_flip = HopfieldTransform::identity(32);
    row_flip.name = "single row sign flip";
    row_flip.row_signs[4] = -1;  // column untouched: breaks symmetry
    transforms.push_back(row_flip);

    const HopfieldProbeReport report = hopfield_equioutput_probe(net, transforms, probes, 320, 35);
    REQUIRE(report.entries.size() == 3);
    CHECK(report.entries[0].accepted);
    CHECK(report.entries[0].agreement == 1.0);
    CHECK(report.entries[1].accepted);
    CHECK(report.entries[1].agreement == 1.0);
    CHECK_FALSE(report.entries[2].accepted);

    const auto dir = wsctest::scratch_dir("probe_json");
    write_probe_report_json(report, (dir / "probe.json").string());
    const auto j = nlohmann::json::parse(read_file_bytes((dir / "probe.json").string()));
    CHECK(j["transforms"].size() == 3);
    CHECK(j["transforms"][2]["accepted"] == false);
}

TEST_CASE("hopfield probe: gauge relabeling with sign flips still agrees in-frame") {
    Rng rng(36);
    const PatternSet stored = wsctest::random_pattern_set(3, 32, rng);
    const HopfieldNet net = hebbian_weights(stored);
    std::vector<BipolarPattern> probes;
    for (std::size_t k = 0; k < 20; ++k) {
        probes.push_back(flip_bits(stored.patterns[k % 3], {k % 32, (k + 7) % 32}));
    }
    std::vector<std::int8_t> signs(32, 1);
    for (std::size_t i = 0; i < 32; i += 3) signs[i] = -1;
    Rng perm_rng(37);
    const auto t = HopfieldTransform::relabeling("gauge", perm_rng.permutation(32), signs, true);
    const auto report = hopfield_equioutput_probe(net, {t}, probes, 320, 38);
    CHECK(report.entries[0].accepted);
    CHECK(report.entries[0].agreement == 1.0);
}
