#include "alphadrop/sweep.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace alphadrop {

namespace {

struct RunSpec {
    double alpha;
    std::size_t hidden;
    std::size_t seed_index;
};

struct RunOutcome {
    bool ok = false;
    std::string error;
    TrainResult result;
};

}  // namespace

SweepResult run_sweep(const SweepConfig& cfg, std::ostream* log) {
    if (cfg.alphas.empty() || cfg.hidden_sizes.empty() || cfg.n_seeds == 0)
        throw std::invalid_argument("run_sweep: empty sweep axis");

    // One table per distinct alpha, shared across the alpha's runs.
    std::map<double, PolyApprox> tables;
    for (double alpha : cfg.alphas) {
        if (tables.count(alpha)) continue;
        RunConfig tc = cfg.base;
        tc.alpha = alpha;
        tables.emplace(alpha, table_for_run(tc));
        if (log) *log << "table alpha=" << alpha << " rmse=" << tables.at(alpha).fit_rmse
                      << "\n";
    }

    const TrainData data = load_train_data(cfg.base);

    std::vector<RunSpec> specs;
    for (double alpha : cfg.alphas)
        for (std::size_t h : cfg.hidden_sizes)
            for (std::size_t s = 0; s < cfg.n_seeds; ++s) specs.push_back({alpha, h, s});

    std::vector<RunOutcome> outcomes(specs.size());
    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= specs.size()) return;
            const RunSpec& spec = specs[i];
            RunConfig rc = cfg.base;
            rc.alpha = spec.alpha;
            rc.hidden.assign(cfg.base.hidden.size(), spec.hidden);
            rc.seed = derive_seed(cfg.base.seed, spec.seed_index);
            try {
                outcomes[i].result = train_run(rc, data, tables.at(spec.alpha));
                outcomes[i].ok = true;
            } catch (const std::exception& e) {
                outcomes[i].error = e.what();
            }
            if (log) {
                std::lock_guard<std::mutex> g(log_mutex);
                *log << "run alpha=" << spec.alpha << " hidden=" << spec.hidden
                     << " seed_index=" << spec.seed_index << " -> "
                     << (outcomes[i].ok ? "ok" : outcomes[i].error) << "\n";
            }
        }
    };

    const std::size_t nthreads = std::max<std::size_t>(1, cfg.jobs);
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    SweepResult out;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        if (!outcomes[i].ok) {
            ++out.failed_runs;
            out.failures.push_back("alpha=" + std::to_string(specs[i].alpha) +
                                   " hidden=" + std::to_string(specs[i].hidden) +
                                   " seed_index=" + std::to_string(specs[i].seed_index) +
                                   ": " + outcomes[i].error);
            continue;
        }
        for (const SweepRecord& r : outcomes[i].result.rows) out.rows.push_back(r);
    }

    // Aggregates over each cell's final rows, in sweep order.
    for (double alpha : cfg.alphas) {
        for (std::size_t h : cfg.hidden_sizes) {
            std::vector<const SweepRecord*> finals;
            for (std::size_t i = 0; i < specs.size(); ++i) {
                if (!outcomes[i].ok || specs[i].alpha != alpha || specs[i].hidden != h)
                    continue;
                finals.push_back(&outcomes[i].result.rows.back());
            }
            if (finals.empty()) continue;
            auto agg = [&](auto field) {
                double mean = 0.0;
                std::size_t n = 0;
                for (auto* r : finals) {
                    const double v = field(*r);
                    if (!std::isnan(v)) {
                        mean += v;
                        ++n;
                    }
                }
                mean = n ? mean / n : std::numeric_limits<double>::quiet_NaN();
                double var = 0.0;
                for (auto* r : finals) {
                    const double v = field(*r);
                    if (!std::isnan(v)) var += (v - mean) * (v - mean);
                }
                const double sd = (n > 1) ? std::sqrt(var / (n - 1)) : 0.0;
                return std::pair<double, double>(mean, sd);
            };
            SweepRecord mean_row{}, std_row{};
            mean_row.kind = "agg_mean";
            std_row.kind = "agg_std";
            for (SweepRecord* row : {&mean_row, &std_row}) {
                row->variant = variant_name(cfg.base.variant);
                row->alpha = alpha;
                row->hidden = h;
                row->epoch = -1;
            }
            const auto set = [&](auto field, double SweepRecord::*member) {
                const auto [m, s] = agg(field);
                mean_row.*member = m;
                std_row.*member = s;
            };
            set([](const SweepRecord& r) { return r.train_nll; }, &SweepRecord::train_nll);
            set([](const SweepRecord& r) { return r.neg_elbo; }, &SweepRecord::neg_elbo);
            set([](const SweepRecord& r) { return r.div_penalty; },
                &SweepRecord::div_penalty);
            set([](const SweepRecord& r) { return r.val_error; }, &SweepRecord::val_error);
            set([](const SweepRecord& r) { return r.test_error; }, &SweepRecord::test_error);
            set([](const SweepRecord& r) { return r.test_accuracy; },
                &SweepRecord::test_accuracy);
            set([](const SweepRecord& r) { return r.wall_time_s; },
                &SweepRecord::wall_time_s);
            out.rows.push_back(mean_row);
            out.rows.push_back(std_row);
        }
    }
    return out;
}

double sweep_cell_mean_test_error(const SweepResult& result, double alpha,
                                  std::size_t hidden) {
    for (const SweepRecord& r : result.rows) {
        if (r.kind == "agg_mean" && r.alpha == alpha && r.hidden == hidden)
            return r.test_error;
    }
    throw std::invalid_argument("sweep_cell_mean_test_error: cell not found");
}

}  // namespace alphadrop
