#include "alphadrop/checkpoint.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace alphadrop {

namespace {

constexpr const char* kTag = "alphadrop-net-v1";

std::string fmt(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, p);
}

double parse_double(std::istream& in, const char* what) {
    std::string tok;
    if (!(in >> tok)) throw std::runtime_error(std::string("checkpoint: missing ") + what);
    double v{};
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || p != tok.data() + tok.size())
        throw std::runtime_error(std::string("checkpoint: bad ") + what + " '" + tok + "'");
    return v;
}

std::string act_name(Activation a) {
    switch (a) {
        case Activation::Relu: return "relu";
        case Activation::Identity: return "identity";
        case Activation::Softmax: return "softmax";
    }
    return "?";
}

Activation act_from_name(const std::string& s) {
    if (s == "relu") return Activation::Relu;
    if (s == "identity") return Activation::Identity;
    if (s == "softmax") return Activation::Softmax;
    throw std::runtime_error("checkpoint: unknown activation '" + s + "'");
}

}  // namespace

void save_checkpoint(const std::string& path, const Network& net, double alpha) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("checkpoint: cannot open for write: " + path);
    out << kTag << ' ' << net.layers.size() << ' ' << fmt(alpha) << '\n';
    for (const VarDropLayer& l : net.layers) {
        out << "layer " << l.in_dim() << ' ' << l.out_dim() << ' ' << variant_name(l.variant)
            << ' ' << act_name(l.activation) << ' ' << fmt(l.p_fixed) << ' '
            << fmt(l.log_a) << '\n';
        for (std::size_t r = 0; r < l.theta.rows(); ++r) {
            auto row = l.theta.row(r);
            for (std::size_t c = 0; c < row.size(); ++c)
                out << (c ? " " : "") << fmt(row[c]);
            out << '\n';
        }
        for (std::size_t c = 0; c < l.bias.size(); ++c) out << (c ? " " : "") << fmt(l.bias[c]);
        out << '\n';
    }
    if (!out) throw std::runtime_error("checkpoint: write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("checkpoint: cannot open: " + path);
    std::string tag;
    in >> tag;
    if (tag != kTag) throw std::runtime_error("checkpoint: unrecognized tag '" + tag + "'");
    std::size_t n_layers{};
    if (!(in >> n_layers)) throw std::runtime_error("checkpoint: missing layer count");
    Checkpoint ck;
    ck.alpha = parse_double(in, "alpha");
    for (std::size_t i = 0; i < n_layers; ++i) {
        std::string kw, var, act;
        std::size_t in_dim{}, out_dim{};
        if (!(in >> kw >> in_dim >> out_dim >> var >> act) || kw != "layer")
            throw std::runtime_error("checkpoint: bad layer header");
        VarDropLayer l;
        l.variant = variant_from_name(var);
        l.activation = act_from_name(act);
        l.p_fixed = parse_double(in, "p_fixed");
        l.log_a = parse_double(in, "log_a");
        l.theta = Matrix(in_dim, out_dim);
        for (std::size_t k = 0; k < l.theta.size(); ++k)
            l.theta.data()[k] = parse_double(in, "theta");
        l.bias.resize(out_dim);
        for (auto& b : l.bias) b = parse_double(in, "bias");
        ck.net.layers.push_back(std::move(l));
    }
    return ck;
}

}  // namespace alphadrop
