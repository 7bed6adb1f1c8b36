#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "alphadrop/data.hpp"
#include "alphadrop/network.hpp"
#include "alphadrop/poly_table.hpp"

namespace alphadrop {

// Seed used for polynomial tables when the caller does not pin one; a fixed
// default makes tables a pure function of alpha, so sweep cells share them.
inline constexpr std::uint64_t kDefaultTableSeed = 1000003;

struct RunConfig {
    Variant variant = Variant::VarA;
    double alpha = 0.99;
    std::vector<std::size_t> hidden = {128, 128};
    std::size_t epochs = 20;
    std::size_t batch_size = 128;
    double lr = 1e-3;
    std::uint64_t seed = 1;
    bool train_a = true;
    std::size_t patience = 5;
    std::string data_dir;    // empty: synthetic blobs
    std::string table_path;  // empty: build in-process
    std::string out_dir = ".";
    std::size_t eval_every = 0;   // 0: test metrics at the final epoch only
    std::size_t train_limit = 0;  // 0: full train split; 10000 is the reduced mode
    double bernoulli_p = 0.5;
    std::size_t mc_samples = 100000;
    std::uint64_t table_seed = kDefaultTableSeed;
    bool timing = false;  // include wall time in CSV (off: output is bit-reproducible)
    // synthetic-mode shape
    std::size_t synth_n = 4096;
    std::size_t synth_dim = 16;
    std::size_t synth_classes = 4;

    void validate() const;  // throws std::invalid_argument
};

// Flat key=value config file (# comments, blank lines ignored); unknown keys
// are errors. Values use the exact CLI spellings.
std::map<std::string, std::string> parse_config_file(const std::string& path);
void apply_config(RunConfig& cfg, const std::map<std::string, std::string>& kv);

// One CSV row; metric fields are NaN where not applicable (serialized empty).
struct SweepRecord {
    std::string kind;  // "epoch", "final", "agg_mean", "agg_std"
    std::string variant;
    double alpha = 0.0;
    std::size_t hidden = 0;
    bool has_seed = false;  // aggregate rows carry no seed
    std::uint64_t seed = 0;
    std::int64_t epoch = -1;
    double train_nll, neg_elbo, div_penalty;
    std::string a_per_layer;  // ';'-joined a values
    double val_error, test_error, test_accuracy;
    double wall_time_s;
};

std::string csv_header(bool timing);
std::string csv_row(const SweepRecord& r, bool timing);

struct TrainResult {
    std::vector<SweepRecord> rows;  // per-epoch plus one "final"
    double final_train_error = 0.0;
    double final_val_error = 0.0;
    double final_test_error = 0.0;
    std::size_t epochs_run = 0;
    Network net;
};

struct TrainData {
    Dataset train;  // training core (train_limit applied)
    Dataset val;    // fixed tail split, early stopping only
    Dataset test;
};

// data_dir empty: deterministic synthetic blobs (train/val/test). Otherwise
// the four standard IDX files (optionally .gz) under data_dir.
TrainData load_train_data(const RunConfig& cfg);

// Full training loop: shuffled mini-batches, sampled forward, alpha-ELBO,
// Adam, the a-domain clamp, early stopping on validation error.
TrainResult train_run(const RunConfig& cfg, const TrainData& data,
                      const PolyApprox& table);

// Table for cfg.alpha: loaded from cfg.table_path when set (alpha checked),
// else built from (cfg.table_seed, cfg.mc_samples).
PolyApprox table_for_run(const RunConfig& cfg);

}  // namespace alphadrop
