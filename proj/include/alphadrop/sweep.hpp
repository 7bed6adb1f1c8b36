#pragma once

#include <iosfwd>
#include <vector>

#include "alphadrop/train.hpp"

namespace alphadrop {

// Cartesian sweep: every (alpha, hidden) cell runs n_seeds times with run
// seeds derived only from (base.seed, seed index), so the same seeds pair up
// across cells and results do not depend on execution order or --jobs.
struct SweepConfig {
    RunConfig base;
    std::vector<double> alphas;
    std::vector<std::size_t> hidden_sizes;
    std::size_t n_seeds = 5;
    std::size_t jobs = 1;
};

struct SweepResult {
    std::vector<SweepRecord> rows;  // per-run rows, then aggregate rows
    std::size_t failed_runs = 0;
    std::vector<std::string> failures;
};

// Tables are built once per distinct alpha and shared across that alpha's
// runs; the dataset is loaded once and shared read-only.
SweepResult run_sweep(const SweepConfig& cfg, std::ostream* log = nullptr);

// Mean of the final test error over seeds for one (alpha, hidden) cell.
double sweep_cell_mean_test_error(const SweepResult& result, double alpha,
                                  std::size_t hidden);

}  // namespace alphadrop
