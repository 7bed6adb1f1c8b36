#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <cmath>
#include <sstream>

#include "alphadrop/checkpoint.hpp"
#include "alphadrop/loss.hpp"
#include "alphadrop/sweep.hpp"
#include "alphadrop/train.hpp"

using namespace alphadrop;

namespace {

RunConfig small_config() {
    RunConfig cfg;
    cfg.variant = Variant::Plain;
    cfg.alpha = 2.0;
    cfg.hidden = {16};
    cfg.epochs = 50;
    cfg.batch_size = 32;
    cfg.lr = 1e-2;
    cfg.seed = 5;
    cfg.patience = 50;  // no early exit while learning the blobs
    cfg.mc_samples = 4000;
    cfg.synth_n = 512;
    cfg.synth_dim = 12;
    cfg.synth_classes = 4;
    return cfg;
}

std::string rows_to_string(const TrainResult& res) {
    std::ostringstream out;
    for (const auto& r : res.rows) out << csv_row(r, false) << "\n";
    return out.str();
}

}  // namespace

TEST_CASE("separable blobs train to perfect accuracy with the plain variant") {
    const RunConfig cfg = small_config();
    const TrainData data = load_train_data(cfg);
    const PolyApprox table = table_for_run(cfg);
    const TrainResult res = train_run(cfg, data, table);
    CHECK(res.final_train_error == 0.0);
    CHECK(res.final_test_error < 0.05);
}

TEST_CASE("zero-noise variational forward differs from plain only by the penalty") {
    RunConfig cfg = small_config();
    const TrainData data = load_train_data(cfg);
    const PolyApprox table = table_for_run(cfg);

    Network plain_net = make_mlp(cfg.synth_dim, cfg.hidden, 10, Variant::Plain, 42);
    Network vara_net = make_mlp(cfg.synth_dim, cfg.hidden, 10, Variant::VarA, 42);
    for (auto& l : vara_net.layers) l.log_a = std::log(kAMin);

    std::vector<LayerNoise> zero_noise;
    for (const auto& l : vara_net.layers) {
        LayerNoise n;
        n.values = Matrix(data.train.size(), l.in_dim(), 0.0);
        zero_noise.push_back(std::move(n));
    }

    const Matrix logits_plain = plain_net.forward(data.train.images, nullptr, false);
    const Matrix logits_vara =
        vara_net.forward_with_noise(data.train.images, zero_noise, nullptr);
    CHECK(logits_plain == logits_vara);

    std::vector<const PolyApprox*> no_tables(plain_net.layers.size(), nullptr);
    std::vector<const PolyApprox*> tables(vara_net.layers.size(), &table);
    const std::size_t n = data.train.size();
    const LossBreakdown lb_plain = alpha_elbo_loss(logits_plain, data.train.labels, n, n,
                                                   plain_net.layers, no_tables);
    const LossBreakdown lb_vara = alpha_elbo_loss(logits_vara, data.train.labels, n, n,
                                                  vara_net.layers, tables);
    CHECK(lb_vara.neg_elbo - lb_plain.neg_elbo ==
          doctest::Approx(lb_vara.div_penalty).epsilon(1e-12));
    CHECK(lb_vara.nll == lb_plain.nll);
}

TEST_CASE("identical config and seed give identical rows, different seeds differ") {
    RunConfig cfg = small_config();
    cfg.variant = Variant::VarA;
    cfg.epochs = 3;
    const TrainData data = load_train_data(cfg);
    const PolyApprox table = table_for_run(cfg);
    const TrainResult r1 = train_run(cfg, data, table);
    const TrainResult r2 = train_run(cfg, data, table);
    CHECK(rows_to_string(r1) == rows_to_string(r2));

    RunConfig other = cfg;
    other.seed = 6;
    const TrainData data2 = load_train_data(other);
    const TrainResult r3 = train_run(other, data2, table);
    CHECK(rows_to_string(r1) != rows_to_string(r3));
}

TEST_CASE("checkpoints round-trip the trained network exactly") {
    RunConfig cfg = small_config();
    cfg.variant = Variant::VarB;
    cfg.epochs = 2;
    const TrainData data = load_train_data(cfg);
    const PolyApprox table = table_for_run(cfg);
    const TrainResult res = train_run(cfg, data, table);

    const std::string path = "ckpt_roundtrip.txt";
    save_checkpoint(path, res.net, cfg.alpha);
    const Checkpoint back = load_checkpoint(path);
    std::remove(path.c_str());

    CHECK(back.alpha == cfg.alpha);
    REQUIRE(back.net.layers.size() == res.net.layers.size());
    for (std::size_t i = 0; i < back.net.layers.size(); ++i) {
        CHECK(back.net.layers[i].theta == res.net.layers[i].theta);
        CHECK(back.net.layers[i].bias == res.net.layers[i].bias);
        CHECK(back.net.layers[i].log_a == res.net.layers[i].log_a);
        CHECK(back.net.layers[i].variant == res.net.layers[i].variant);
    }
    // evaluating the checkpoint reproduces the logged final train accuracy
    const double err =
        classification_error(back.net, data.train.images, data.train.labels);
    CHECK(err == res.final_train_error);
}

TEST_CASE("table alpha must match the run alpha") {
    RunConfig cfg = small_config();
    cfg.alpha = 0.5;
    const PolyApprox t = table_for_run(cfg);
    const std::string path = "mismatch.poly";
    save_poly_table(path, t);
    RunConfig other = cfg;
    other.alpha = 2.0;
    other.table_path = path;
    CHECK_THROWS_AS(table_for_run(other), std::invalid_argument);
    std::remove(path.c_str());
}

TEST_CASE("early stopping fires on a stalled run") {
    RunConfig cfg = small_config();
    cfg.variant = Variant::Plain;
    cfg.epochs = 60;
    cfg.patience = 3;
    cfg.lr = 5e-2;
    const TrainData data = load_train_data(cfg);
    const PolyApprox table = table_for_run(cfg);
    const TrainResult res = train_run(cfg, data, table);
    CHECK(res.epochs_run < 60);  // blobs saturate quickly; patience cuts it
}

TEST_CASE("config parsing") {
    const std::string path = "cfg_test.conf";
    {
        std::ofstream out(path);
        out << "# comment\n";
        out << "variant = varB\n";
        out << "alpha=0.5\n";
        out << "hidden = 32,16\n";
        out << "epochs=7\n";
        out << "train_a = false\n";
    }
    RunConfig cfg;
    apply_config(cfg, parse_config_file(path));
    std::remove(path.c_str());
    CHECK(cfg.variant == Variant::VarB);
    CHECK(cfg.alpha == 0.5);
    CHECK(cfg.hidden == std::vector<std::size_t>{32, 16});
    CHECK(cfg.epochs == 7);
    CHECK_FALSE(cfg.train_a);

    {
        std::ofstream out(path);
        out << "no_such_key=1\n";
    }
    RunConfig cfg2;
    CHECK_THROWS_AS(apply_config(cfg2, parse_config_file(path)), std::invalid_argument);
    std::remove(path.c_str());

    RunConfig bad;
    bad.epochs = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("csv rows are schema-stable") {
    CHECK(csv_header(false) ==
          "kind,variant,alpha,hidden,seed,epoch,train_nll,neg_elbo,div_penalty,"
          "a_per_layer,val_error,test_error,test_accuracy");
    SweepRecord r{};
    r.kind = "final";
    r.variant = "varA";
    r.alpha = 0.99;
    r.hidden = 128;
    r.has_seed = true;
    r.seed = 3;
    r.epoch = 11;
    r.train_nll = 0.25;
    r.neg_elbo = 1234.5;
    r.div_penalty = -10.0;
    r.a_per_layer = "0.5;0.25";
    r.val_error = 0.04;
    r.test_error = 0.05;
    r.test_accuracy = 0.95;
    const std::string row = csv_row(r, false);
    CHECK(row == "final,varA,0.99,128,3,11,0.25,1234.5,-10,0.5;0.25,0.04,0.05,0.95");
}

TEST_CASE("sweep aggregates are recomputable from the per-run final rows") {
    SweepConfig sc;
    sc.base = small_config();
    sc.base.variant = Variant::VarA;
    sc.base.epochs = 2;
    sc.alphas = {0.5, 2.0};
    sc.hidden_sizes = {8};
    sc.n_seeds = 3;
    sc.jobs = 2;
    const SweepResult res = run_sweep(sc);
    CHECK(res.failed_runs == 0);

    for (double alpha : sc.alphas) {
        std::vector<double> finals;
        const SweepRecord* mean_row = nullptr;
        const SweepRecord* std_row = nullptr;
        for (const auto& r : res.rows) {
            if (r.alpha != alpha || r.hidden != 8) continue;
            if (r.kind == "final") finals.push_back(r.test_error);
            if (r.kind == "agg_mean") mean_row = &r;
            if (r.kind == "agg_std") std_row = &r;
        }
        REQUIRE(finals.size() == 3);
        REQUIRE(mean_row != nullptr);
        REQUIRE(std_row != nullptr);
        double m = (finals[0] + finals[1] + finals[2]) / 3.0;
        double v = 0.0;
        for (double f : finals) v += (f - m) * (f - m);
        CHECK(mean_row->test_error == doctest::Approx(m).epsilon(1e-12));
        CHECK(std_row->test_error == doctest::Approx(std::sqrt(v / 2.0)).epsilon(1e-9));
    }
}

TEST_CASE("a single-cell sweep reproduces the equivalent train run") {
    SweepConfig sc;
    sc.base = small_config();
    sc.base.variant = Variant::VarB;
    sc.base.epochs = 2;
    sc.alphas = {2.0};
    sc.hidden_sizes = {16};
    sc.n_seeds = 1;
    const SweepResult sweep = run_sweep(sc);
    CHECK(sweep.failed_runs == 0);

    RunConfig rc = sc.base;
    rc.alpha = 2.0;
    rc.hidden = {16};
    rc.seed = derive_seed(sc.base.seed, 0);
    const TrainData data = load_train_data(sc.base);
    const TrainResult single = train_run(rc, data, table_for_run(rc));

    REQUIRE(sweep.rows.size() == single.rows.size() + 2);  // plus mean/std rows
    for (std::size_t i = 0; i < single.rows.size(); ++i)
        CHECK(csv_row(sweep.rows[i], false) == csv_row(single.rows[i], false));
    CHECK(sweep.rows[sweep.rows.size() - 2].kind == "agg_mean");
}
