// alphadrop: train Bayesian MLPs with variational dropout regularized by the
// alpha-divergence family. Subcommands: fit-poly, train, sweep, eval.
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

#include "alphadrop/checkpoint.hpp"
#include "alphadrop/loss.hpp"
#include "alphadrop/sweep.hpp"
#include "alphadrop/train.hpp"

namespace ad = alphadrop;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitPartial = 3;

std::string alpha_tag(double alpha) {
    std::ostringstream s;
    s << alpha;
    std::string t = s.str();
    for (char& c : t)
        if (c == '.') c = 'p';
    return t;
}

void write_provenance(std::ostream& out, const ad::RunConfig& cfg,
                      const std::string& command) {
    out << "# alphadrop " << command << "\n";
    out << "# variant=" << ad::variant_name(cfg.variant) << "\n";
    out << "# alpha=" << cfg.alpha << "\n";
    out << "# hidden=";
    for (std::size_t i = 0; i < cfg.hidden.size(); ++i)
        out << (i ? "," : "") << cfg.hidden[i];
    out << "\n";
    out << "# epochs=" << cfg.epochs << "\n";
    out << "# batch=" << cfg.batch_size << "\n";
    out << "# lr=" << cfg.lr << "\n";
    out << "# seed=" << cfg.seed << "\n";
    out << "# train_a=" << (cfg.train_a ? 1 : 0) << "\n";
    out << "# patience=" << cfg.patience << "\n";
    out << "# data_dir=" << cfg.data_dir << "\n";
    out << "# table=" << cfg.table_path << "\n";
    out << "# eval_every=" << cfg.eval_every << "\n";
    out << "# train_limit=" << cfg.train_limit << "\n";
    out << "# bernoulli_p=" << cfg.bernoulli_p << "\n";
    out << "# mc_samples=" << cfg.mc_samples << "\n";
    out << "# table_seed=" << cfg.table_seed << "\n";
    out << "# timing=" << (cfg.timing ? 1 : 0) << "\n";
}

struct CommonOpts {
    std::string config_file;
    std::string variant = "varA";
    double alpha = 0.99;
    std::vector<std::size_t> hidden = {128, 128};
    std::size_t epochs = 20;
    std::size_t batch = 128;
    double lr = 1e-3;
    std::uint64_t seed = 1;
    bool train_a = true;
    std::size_t patience = 5;
    std::string data_dir;
    std::string table;
    std::string out = ".";
    std::size_t eval_every = 0;
    std::size_t train_limit = 0;
    std::size_t mc_samples = 100000;
    std::uint64_t table_seed = ad::kDefaultTableSeed;
    bool timing = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_file, "key=value config file");
    cmd->add_option("--variant", o.variant, "plain|bernoulli|varA|varB");
    cmd->add_option("--alpha", o.alpha, "divergence order");
    cmd->add_option("--hidden", o.hidden, "hidden layer sizes")->delimiter(',');
    cmd->add_option("--epochs", o.epochs, "max epochs");
    cmd->add_option("--batch", o.batch, "mini-batch size");
    cmd->add_option("--lr", o.lr, "learning rate");
    cmd->add_option("--seed", o.seed, "run seed");
    cmd->add_flag("--train-a,!--freeze-a", o.train_a,
                  "train the dropout rate (default on; --freeze-a to pin it)");
    cmd->add_option("--patience", o.patience, "early stopping patience");
    cmd->add_option("--data-dir", o.data_dir,
                    "directory with the IDX files (empty: synthetic blobs)");
    cmd->add_option("--table", o.table, "prebuilt polynomial table file");
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--eval-every", o.eval_every, "test metrics every N epochs");
    cmd->add_option("--train-limit", o.train_limit, "use only the first N train images");
    cmd->add_option("--mc-samples", o.mc_samples, "MC samples per table grid point");
    cmd->add_option("--table-seed", o.table_seed, "seed for table construction");
    cmd->add_flag("--timing", o.timing,
                  "append wall time column (breaks bit-reproducibility)");
}

// Config file first, then only the flags the user actually passed.
ad::RunConfig to_config(const CLI::App* cmd, const CommonOpts& o) {
    ad::RunConfig cfg;
    if (!o.config_file.empty()) ad::apply_config(cfg, ad::parse_config_file(o.config_file));
    const auto passed = [&](const char* flag) { return cmd->count(flag) > 0; };
    if (passed("--variant")) cfg.variant = ad::variant_from_name(o.variant);
    if (passed("--alpha")) cfg.alpha = o.alpha;
    if (passed("--hidden")) cfg.hidden = o.hidden;
    if (passed("--epochs")) cfg.epochs = o.epochs;
    if (passed("--batch")) cfg.batch_size = o.batch;
    if (passed("--lr")) cfg.lr = o.lr;
    if (passed("--seed")) cfg.seed = o.seed;
    if (passed("--train-a") || passed("--freeze-a")) cfg.train_a = o.train_a;
    if (passed("--patience")) cfg.patience = o.patience;
    if (passed("--data-dir")) cfg.data_dir = o.data_dir;
    if (passed("--table")) cfg.table_path = o.table;
    if (passed("--out")) cfg.out_dir = o.out;
    if (passed("--eval-every")) cfg.eval_every = o.eval_every;
    if (passed("--train-limit")) cfg.train_limit = o.train_limit;
    if (passed("--mc-samples")) cfg.mc_samples = o.mc_samples;
    if (passed("--table-seed")) cfg.table_seed = o.table_seed;
    if (passed("--timing")) cfg.timing = o.timing;
    cfg.validate();
    return cfg;
}

int cmd_fit_poly(const std::vector<double>& alphas, std::size_t samples,
                 std::uint64_t seed, double a_min, double a_max, std::size_t grid_points,
                 const std::string& out_dir, std::size_t jobs) {
    if (alphas.empty()) {
        std::cerr << "fit-poly: at least one --alpha required\n";
        return kExitUsage;
    }
    fs::create_directories(out_dir);
    const std::vector<double> grid = ad::default_a_grid(a_min, a_max, grid_points);
    std::vector<ad::PolyApprox> tables(alphas.size());
    std::vector<std::string> errors(alphas.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= alphas.size()) return;
            try {
                const ad::AlphaSpec spec = ad::AlphaSpec::make(alphas[i]);
                tables[i] = ad::build_poly_table(spec, grid, samples, seed);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::max<std::size_t>(1, jobs); ++t)
        pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    bool failed = false;
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        if (!errors[i].empty()) {
            std::cerr << "fit-poly alpha=" << alphas[i] << " failed: " << errors[i] << "\n";
            failed = true;
            continue;
        }
        const std::string path = out_dir + "/alpha_" + alpha_tag(alphas[i]) + ".poly";
        ad::save_poly_table(path, tables[i]);
        std::printf("alpha=%-8g rmse=%.6f domain=[%g,%g] -> %s\n", alphas[i],
                    tables[i].fit_rmse, a_min, a_max, path.c_str());
    }
    if (failed) return kExitNumerical;

    // Pairwise shape report: Pearson correlation of the fitted curves.
    if (alphas.size() > 1) {
        std::printf("shape correlation (Pearson, fitted curves on the grid):\n");
        for (std::size_t i = 0; i < alphas.size(); ++i) {
            for (std::size_t j = i + 1; j < alphas.size(); ++j) {
                double mx = 0, my = 0;
                for (double a : grid) {
                    mx += tables[i].value_at(a);
                    my += tables[j].value_at(a);
                }
                mx /= grid.size();
                my /= grid.size();
                double sxy = 0, sxx = 0, syy = 0;
                for (double a : grid) {
                    const double dx = tables[i].value_at(a) - mx;
                    const double dy = tables[j].value_at(a) - my;
                    sxy += dx * dy;
                    sxx += dx * dx;
                    syy += dy * dy;
                }
                std::printf("  alpha %g vs %g: %.4f\n", alphas[i], alphas[j],
                            sxy / std::sqrt(sxx * syy));
            }
        }
    }
    return kExitOk;
}

int cmd_train(const ad::RunConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    const ad::PolyApprox table = ad::table_for_run(cfg);
    const ad::TrainData data = ad::load_train_data(cfg);
    const ad::TrainResult res = ad::train_run(cfg, data, table);

    const std::string stem = ad::variant_name(cfg.variant) + "_a" + alpha_tag(cfg.alpha) +
                             "_h" + std::to_string(cfg.hidden.front()) + "_s" +
                             std::to_string(cfg.seed);
    const std::string csv_path = cfg.out_dir + "/train_" + stem + ".csv";
    std::ofstream csv(csv_path, std::ios::binary);
    write_provenance(csv, cfg, "train");
    csv << ad::csv_header(cfg.timing) << "\n";
    for (const auto& row : res.rows) csv << ad::csv_row(row, cfg.timing) << "\n";
    const std::string ckpt_path = cfg.out_dir + "/train_" + stem + ".ckpt";
    ad::save_checkpoint(ckpt_path, res.net, cfg.alpha);
    std::printf("epochs=%zu train_err=%.4f val_err=%.4f test_err=%.4f\n", res.epochs_run,
                res.final_train_error, res.final_val_error, res.final_test_error);
    std::printf("csv=%s checkpoint=%s\n", csv_path.c_str(), ckpt_path.c_str());
    return kExitOk;
}

int cmd_sweep(const ad::RunConfig& base, const std::vector<double>& alphas,
              const std::vector<std::size_t>& hidden_sizes, std::size_t n_seeds,
              std::size_t jobs) {
    ad::SweepConfig sc;
    sc.base = base;
    // default grids: the named alpha values plus shape fillers, and the
    // hidden-size ladder documented in the README
    sc.alphas = alphas.empty() ? std::vector<double>{0.1, 0.5, 0.95, 0.99, 2.0, 10.0}
                               : alphas;
    sc.hidden_sizes = hidden_sizes.empty()
                          ? std::vector<std::size_t>{64, 128, 256, 512}
                          : hidden_sizes;
    sc.n_seeds = n_seeds;
    sc.jobs = jobs;
    fs::create_directories(base.out_dir);
    const ad::SweepResult res = ad::run_sweep(sc, &std::cerr);

    const std::string csv_path = base.out_dir + "/sweep_" + ad::variant_name(base.variant) +
                                 "_s" + std::to_string(base.seed) + ".csv";
    std::ofstream csv(csv_path, std::ios::binary);
    write_provenance(csv, base, "sweep");
    csv << "# alphas=";
    for (std::size_t i = 0; i < sc.alphas.size(); ++i)
        csv << (i ? "," : "") << sc.alphas[i];
    csv << "\n# hidden_sizes=";
    for (std::size_t i = 0; i < sc.hidden_sizes.size(); ++i)
        csv << (i ? "," : "") << sc.hidden_sizes[i];
    csv << "\n# seeds=" << sc.n_seeds << "\n";
    csv << ad::csv_header(base.timing) << "\n";
    for (const auto& row : res.rows) csv << ad::csv_row(row, base.timing) << "\n";
    std::printf("sweep csv=%s (%zu rows, %zu failed runs)\n", csv_path.c_str(),
                res.rows.size(), res.failed_runs);
    for (const auto& f : res.failures) std::cerr << "failed: " << f << "\n";
    return res.failed_runs ? kExitPartial : kExitOk;
}

int cmd_eval(const std::string& ckpt_path, const std::string& data_dir,
             const std::string& split, bool synthetic, std::uint64_t seed) {
    const ad::Checkpoint ck = ad::load_checkpoint(ckpt_path);
    ad::RunConfig cfg;
    if (synthetic) {
        cfg.seed = seed;
    } else if (!data_dir.empty()) {
        cfg.data_dir = data_dir;
    } else {
        std::cerr << "eval: --data-dir or --synthetic required\n";
        return kExitUsage;
    }
    const ad::TrainData d = ad::load_train_data(cfg);
    const ad::Dataset& set = (split == "train") ? d.train : d.test;
    if (set.size() == 0) {
        std::cerr << "eval: empty evaluation set\n";
        return kExitUsage;
    }
    const double err = ad::classification_error(ck.net, set.images, set.labels);
    std::printf("n=%zu error=%.6f accuracy=%.6f\n", set.size(), err, 1.0 - err);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"alpha-divergence variational dropout trainer"};
    app.require_subcommand(1);

    auto* fit = app.add_subcommand("fit-poly", "build -D_alpha polynomial tables");
    std::vector<double> fit_alphas;
    std::size_t fit_samples = 100000, fit_grid = 100, fit_jobs = 1;
    std::uint64_t fit_seed = ad::kDefaultTableSeed;
    double fit_amin = 0.01, fit_amax = 1.0;
    std::string fit_out = ".";
    fit->add_option("--alpha,--alphas", fit_alphas, "alpha values")->delimiter(',');
    fit->add_option("--samples", fit_samples, "MC samples per grid point");
    fit->add_option("--seed", fit_seed, "table seed");
    fit->add_option("--a-min", fit_amin, "grid lower bound");
    fit->add_option("--a-max", fit_amax, "grid upper bound");
    fit->add_option("--grid-points", fit_grid, "grid size");
    fit->add_option("--out", fit_out, "output directory");
    fit->add_option("--jobs", fit_jobs, "parallel table builds");

    auto* train = app.add_subcommand("train", "single training run");
    CommonOpts topt;
    add_common(train, topt);

    auto* sweep = app.add_subcommand("sweep", "alpha x hidden x seed sweep");
    CommonOpts sopt;
    add_common(sweep, sopt);
    std::vector<double> sweep_alphas;
    std::vector<std::size_t> sweep_hidden;
    std::size_t sweep_seeds = 5, sweep_jobs = 1;
    sweep->add_option("--alphas", sweep_alphas, "alpha grid")->delimiter(',');
    sweep->add_option("--hidden-sizes", sweep_hidden, "hidden size grid")->delimiter(',');
    sweep->add_option("--seeds", sweep_seeds, "runs per cell");
    sweep->add_option("--jobs", sweep_jobs, "parallel runs");

    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
    std::string eval_ckpt, eval_data, eval_split = "test";
    bool eval_synth = false;
    std::uint64_t eval_seed = 1;
    eval->add_option("--checkpoint", eval_ckpt, "checkpoint file")->required();
    eval->add_option("--data-dir", eval_data, "IDX data directory");
    eval->add_option("--split", eval_split, "train|test");
    eval->add_flag("--synthetic", eval_synth, "evaluate on the synthetic dataset");
    eval->add_option("--seed", eval_seed, "synthetic dataset seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (fit->parsed())
            return cmd_fit_poly(fit_alphas, fit_samples, fit_seed, fit_amin, fit_amax,
                                fit_grid, fit_out, fit_jobs);
        if (train->parsed()) return cmd_train(to_config(train, topt));
        if (sweep->parsed())
            return cmd_sweep(to_config(sweep, sopt), sweep_alphas, sweep_hidden,
                             sweep_seeds, sweep_jobs);
        if (eval->parsed())
            return cmd_eval(eval_ckpt, eval_data, eval_split, eval_synth, eval_seed);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitUsage;
}
