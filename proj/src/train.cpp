#include "alphadrop/train.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "alphadrop/loss.hpp"
#include "alphadrop/optim.hpp"

namespace alphadrop {

void RunConfig::validate() const {
    if (!(alpha >= 0.0) || !std::isfinite(alpha))
        throw std::invalid_argument("config: alpha must be finite and >= 0");
    if (hidden.empty()) throw std::invalid_argument("config: at least one hidden layer");
    for (std::size_t h : hidden)
        if (h == 0) throw std::invalid_argument("config: hidden size must be positive");
    if (epochs == 0) throw std::invalid_argument("config: epochs must be positive");
    if (batch_size == 0) throw std::invalid_argument("config: batch size must be positive");
    if (!(lr > 0.0)) throw std::invalid_argument("config: lr must be positive");
    if (!(bernoulli_p >= 0.0 && bernoulli_p < 1.0))
        throw std::invalid_argument("config: bernoulli p must be in [0,1)");
    if (mc_samples == 0) throw std::invalid_argument("config: mc_samples must be positive");
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                        " is not key=value");
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return (b == std::string::npos) ? std::string() : s.substr(b, e - b + 1);
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

namespace {

std::vector<std::size_t> parse_size_list(const std::string& s) {
    std::vector<std::size_t> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        out.push_back(static_cast<std::size_t>(std::stoull(tok)));
    }
    return out;
}

bool parse_bool(const std::string& s) {
    if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
    if (s == "0" || s == "false" || s == "no" || s == "off") return false;
    throw std::invalid_argument("config: bad boolean '" + s + "'");
}

}  // namespace

void apply_config(RunConfig& cfg, const std::map<std::string, std::string>& kv) {
    for (const auto& [key, val] : kv) {
        if (key == "variant") cfg.variant = variant_from_name(val);
        else if (key == "alpha") cfg.alpha = std::stod(val);
        else if (key == "hidden") cfg.hidden = parse_size_list(val);
        else if (key == "epochs") cfg.epochs = std::stoull(val);
        else if (key == "batch") cfg.batch_size = std::stoull(val);
        else if (key == "lr") cfg.lr = std::stod(val);
        else if (key == "seed") cfg.seed = std::stoull(val);
        else if (key == "train_a") cfg.train_a = parse_bool(val);
        else if (key == "patience") cfg.patience = std::stoull(val);
        else if (key == "data_dir") cfg.data_dir = val;
        else if (key == "table") cfg.table_path = val;
        else if (key == "out") cfg.out_dir = val;
        else if (key == "eval_every") cfg.eval_every = std::stoull(val);
        else if (key == "train_limit") cfg.train_limit = std::stoull(val);
        else if (key == "bernoulli_p") cfg.bernoulli_p = std::stod(val);
        else if (key == "mc_samples") cfg.mc_samples = std::stoull(val);
        else if (key == "table_seed") cfg.table_seed = std::stoull(val);
        else if (key == "timing") cfg.timing = parse_bool(val);
        else if (key == "synth_n") cfg.synth_n = std::stoull(val);
        else if (key == "synth_dim") cfg.synth_dim = std::stoull(val);
        else if (key == "synth_classes") cfg.synth_classes = std::stoull(val);
        else throw std::invalid_argument("config: unknown key '" + key + "'");
    }
}

namespace {

std::string fmt(double v) {
    if (std::isnan(v)) return "";
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, p);
}

constexpr double kNa = std::numeric_limits<double>::quiet_NaN();

}  // namespace

std::string csv_header(bool timing) {
    std::string h =
        "kind,variant,alpha,hidden,seed,epoch,train_nll,neg_elbo,div_penalty,"
        "a_per_layer,val_error,test_error,test_accuracy";
    if (timing) h += ",wall_time_s";
    return h;
}

std::string csv_row(const SweepRecord& r, bool timing) {
    std::ostringstream out;
    out << r.kind << ',' << r.variant << ',' << fmt(r.alpha) << ',' << r.hidden << ','
        << (r.has_seed ? std::to_string(r.seed) : std::string()) << ','
        << (r.epoch < 0 ? std::string() : std::to_string(r.epoch)) << ','
        << fmt(r.train_nll) << ',' << fmt(r.neg_elbo) << ',' << fmt(r.div_penalty) << ','
        << r.a_per_layer << ',' << fmt(r.val_error) << ',' << fmt(r.test_error) << ','
        << fmt(r.test_accuracy);
    if (timing) out << ',' << fmt(r.wall_time_s);
    return out.str();
}

namespace {

std::string find_idx(const std::string& dir, const std::string& base) {
    namespace fs = std::filesystem;
    const std::string plain = dir + "/" + base;
    if (fs::exists(plain)) return plain;
    if (fs::exists(plain + ".gz")) return plain + ".gz";
    throw std::runtime_error("data: neither " + plain + " nor " + plain + ".gz exists");
}

}  // namespace

TrainData load_train_data(const RunConfig& cfg) {
    TrainData out;
    if (cfg.data_dir.empty()) {
        // One draw, one set of class centers; contiguous splits stay balanced
        // because synthetic labels cycle through the classes.
        const std::size_t test_n = std::max<std::size_t>(1, cfg.synth_n / 5);
        const Dataset all = make_synthetic(cfg.synth_classes, cfg.synth_n + test_n,
                                           cfg.synth_dim, derive_seed(cfg.seed, 101));
        out.test = dataset_tail(all, cfg.synth_n);
        const Dataset rest = dataset_head(all, cfg.synth_n);
        const std::size_t val_n = std::max<std::size_t>(1, rest.size() / 6);
        out.val = dataset_tail(rest, rest.size() - val_n);
        out.train = dataset_head(rest, rest.size() - val_n);
    } else {
        Dataset train_full;
        train_full.images = load_idx_images(find_idx(cfg.data_dir, "train-images-idx3-ubyte"));
        train_full.labels = load_idx_labels(find_idx(cfg.data_dir, "train-labels-idx1-ubyte"));
        if (train_full.images.rows() != train_full.labels.size())
            throw std::runtime_error("data: train image/label count mismatch");
        out.test.images = load_idx_images(find_idx(cfg.data_dir, "t10k-images-idx3-ubyte"));
        out.test.labels = load_idx_labels(find_idx(cfg.data_dir, "t10k-labels-idx1-ubyte"));
        if (out.test.images.rows() != out.test.labels.size())
            throw std::runtime_error("data: test image/label count mismatch");
        // Validation: fixed tail of the train split, used only for stopping.
        const std::size_t val_n = std::min<std::size_t>(10000, train_full.size() / 6);
        out.val = dataset_tail(train_full, train_full.size() - val_n);
        out.train = dataset_head(train_full, train_full.size() - val_n);
    }
    if (cfg.train_limit > 0 && cfg.train_limit < out.train.size())
        out.train = dataset_head(out.train, cfg.train_limit);
    return out;
}

PolyApprox table_for_run(const RunConfig& cfg) {
    const AlphaSpec spec = AlphaSpec::make(cfg.alpha);
    if (!cfg.table_path.empty()) {
        PolyApprox t = load_poly_table(cfg.table_path);
        if (std::fabs(t.alpha - spec.alpha) > 1e-9)
            throw std::invalid_argument("table alpha " + std::to_string(t.alpha) +
                                        " does not match run alpha " +
                                        std::to_string(spec.alpha));
        return t;
    }
    return build_poly_table(spec, default_a_grid(), cfg.mc_samples, cfg.table_seed);
}

TrainResult train_run(const RunConfig& cfg, const TrainData& data,
                      const PolyApprox& table) {
    cfg.validate();
    if (data.train.size() == 0) throw std::invalid_argument("train_run: empty training set");
    const auto t0 = std::chrono::steady_clock::now();

    Network net = make_mlp(data.train.images.cols(), cfg.hidden, 10, cfg.variant,
                           derive_seed(cfg.seed, 1), cfg.bernoulli_p);
    std::vector<const PolyApprox*> tables(net.layers.size(), nullptr);
    for (std::size_t i = 0; i < net.layers.size(); ++i)
        if (net.layers[i].is_variational()) tables[i] = &table;

    RngStream noise_rng(derive_seed(cfg.seed, 2));
    AdamState adam;
    EarlyStopper stopper(cfg.patience, EarlyStopper::Mode::Min);

    TrainResult res;
    const std::size_t hidden0 = cfg.hidden.front();
    const auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };
    const auto a_string = [](const Network& n) {
        std::string s;
        for (const VarDropLayer& l : n.layers) {
            if (!l.is_variational()) continue;
            if (!s.empty()) s += ';';
            s += fmt(l.a());
        }
        return s;
    };

    std::size_t epoch = 0;
    for (; epoch < cfg.epochs; ++epoch) {
        const BatchPlan plan =
            make_batch_plan(data.train.size(), cfg.batch_size, derive_seed(cfg.seed, 100 + epoch));
        double nll_sum = 0.0;
        for (std::size_t b = 0; b < plan.num_batches(); ++b) {
            const Batch batch = get_batch(data.train, plan, b);
            std::vector<LayerCache> caches;
            const Matrix logits = net.forward(batch.x, &noise_rng, true, &caches);
            auto [nll, grad_logits] = softmax_cross_entropy(logits, batch.y);
            if (!std::isfinite(nll))
                throw std::runtime_error("train_run: non-finite loss at epoch " +
                                         std::to_string(epoch));
            nll_sum += nll * batch.batch_size;
            // d(neg_elbo)/d(logits) = n_total * d(nll)/d(logits)
            for (std::size_t k = 0; k < grad_logits.size(); ++k)
                grad_logits.data()[k] *= static_cast<double>(batch.n_total);
            NetworkGrads grads = net.backward(grad_logits, caches);
            if (cfg.train_a) {
                std::vector<double> pen_grad;
                div_penalty(net.layers, tables, &pen_grad);
                for (std::size_t i = 0; i < grads.layers.size(); ++i)
                    grads.layers[i].log_a += pen_grad[i];
            }
            adam.step(collect_params(net, grads, cfg.train_a), cfg.lr);
        }
        const double train_nll = nll_sum / data.train.size();
        const double pen = div_penalty(net.layers, tables);
        const double val_err =
            data.val.size() ? classification_error(net, data.val.images, data.val.labels)
                            : kNa;

        SweepRecord row{};
        row.kind = "epoch";
        row.variant = variant_name(cfg.variant);
        row.alpha = cfg.alpha;
        row.hidden = hidden0;
        row.has_seed = true;
        row.seed = cfg.seed;
        row.epoch = static_cast<std::int64_t>(epoch);
        row.train_nll = train_nll;
        row.div_penalty = pen;
        row.neg_elbo = static_cast<double>(data.train.size()) * train_nll + pen;
        row.a_per_layer = a_string(net);
        row.val_error = val_err;
        row.test_error = kNa;
        row.test_accuracy = kNa;
        row.wall_time_s = elapsed();
        if (cfg.eval_every > 0 && (epoch + 1) % cfg.eval_every == 0 && data.test.size()) {
            row.test_error = classification_error(net, data.test.images, data.test.labels);
            row.test_accuracy = 1.0 - row.test_error;
        }
        res.rows.push_back(row);

        if (data.val.size() && stopper.update(val_err)) {
            ++epoch;
            break;
        }
    }

    res.epochs_run = epoch;
    res.net = std::move(net);
    res.final_train_error =
        classification_error(res.net, data.train.images, data.train.labels);
    res.final_val_error =
        data.val.size() ? classification_error(res.net, data.val.images, data.val.labels)
                        : kNa;
    res.final_test_error =
        data.test.size() ? classification_error(res.net, data.test.images, data.test.labels)
                         : kNa;

    SweepRecord fin{};
    fin.kind = "final";
    fin.variant = variant_name(cfg.variant);
    fin.alpha = cfg.alpha;
    fin.hidden = hidden0;
    fin.has_seed = true;
    fin.seed = cfg.seed;
    fin.epoch = static_cast<std::int64_t>(epoch) - 1;
    fin.train_nll = res.rows.empty() ? kNa : res.rows.back().train_nll;
    fin.neg_elbo = res.rows.empty() ? kNa : res.rows.back().neg_elbo;
    fin.div_penalty = res.rows.empty() ? kNa : res.rows.back().div_penalty;
    fin.a_per_layer = a_string(res.net);
    fin.val_error = res.final_val_error;
    fin.test_error = res.final_test_error;
    fin.test_accuracy = std::isnan(res.final_test_error) ? kNa : 1.0 - res.final_test_error;
    fin.wall_time_s = elapsed();
    res.rows.push_back(fin);
    return res;
}

}  // namespace alphadrop
