#include "alphadrop/data.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "alphadrop/rng.hpp"

namespace alphadrop {

namespace {

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

std::vector<std::uint8_t> gunzip(const std::vector<std::uint8_t>& in) {
    z_stream zs{};
    if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK)
        throw std::runtime_error("gzip: inflateInit failed");
    std::vector<std::uint8_t> out;
    out.reserve(in.size() * 4);
    std::uint8_t buf[1 << 16];
    zs.next_in = const_cast<Bytef*>(in.data());
    zs.avail_in = static_cast<uInt>(in.size());
    int rc = Z_OK;
    while (rc != Z_STREAM_END) {
        zs.next_out = buf;
        zs.avail_out = sizeof(buf);
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            throw std::runtime_error("gzip: corrupt stream");
        }
        out.insert(out.end(), buf, buf + (sizeof(buf) - zs.avail_out));
    }
    inflateEnd(&zs);
    return out;
}

std::vector<std::uint8_t> read_maybe_gzip(const std::string& path) {
    std::vector<std::uint8_t> bytes = read_file(path);
    if (bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b) return gunzip(bytes);
    return bytes;
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& b, std::size_t off,
                        const std::string& path) {
    if (off + 4 > b.size()) throw IdxTruncatedError("truncated IDX header: " + path);
    return (std::uint32_t(b[off]) << 24) | (std::uint32_t(b[off + 1]) << 16) |
           (std::uint32_t(b[off + 2]) << 8) | std::uint32_t(b[off + 3]);
}

}  // namespace

Matrix load_idx_images(const std::string& path) {
    const auto bytes = read_maybe_gzip(path);
    const std::uint32_t magic = read_be32(bytes, 0, path);
    if (magic != 0x00000803) {
        char hex[16];
        std::snprintf(hex, sizeof(hex), "0x%08x", magic);
        throw IdxMagicError("bad image magic " + std::string(hex) + " in " + path);
    }
    const std::uint64_t count = read_be32(bytes, 4, path);
    const std::uint64_t rows = read_be32(bytes, 8, path);
    const std::uint64_t cols = read_be32(bytes, 12, path);
    const std::uint64_t dim = rows * cols;
    if (rows == 0 || cols == 0 || dim > (1u << 24) ||
        count > std::numeric_limits<std::uint32_t>::max() ||
        count * dim / std::max<std::uint64_t>(dim, 1) != count)
        throw IdxRangeError("IDX image dimensions overflow in " + path);
    const std::uint64_t need = 16 + count * dim;
    if (bytes.size() < need)
        throw IdxTruncatedError("truncated IDX pixel section in " + path + ": have " +
                                std::to_string(bytes.size()) + " bytes, need " +
                                std::to_string(need));
    Matrix out(count, dim);
    for (std::uint64_t i = 0; i < count * dim; ++i)
        out.data()[i] = bytes[16 + i] / 255.0;
    return out;
}

std::vector<int> load_idx_labels(const std::string& path) {
    const auto bytes = read_maybe_gzip(path);
    const std::uint32_t magic = read_be32(bytes, 0, path);
    if (magic != 0x00000801) {
        char hex[16];
        std::snprintf(hex, sizeof(hex), "0x%08x", magic);
        throw IdxMagicError("bad label magic " + std::string(hex) + " in " + path);
    }
    const std::uint64_t count = read_be32(bytes, 4, path);
    if (bytes.size() < 8 + count)
        throw IdxTruncatedError("truncated IDX label section in " + path);
    std::vector<int> out(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        const int v = bytes[8 + i];
        if (v > 9)
            throw IdxRangeError("label byte " + std::to_string(v) + " outside [0,9] in " + path);
        out[i] = v;
    }
    return out;
}

void write_idx_images(const std::string& path, const Matrix& images,
                      std::size_t img_rows, std::size_t img_cols) {
    if (img_rows * img_cols != images.cols())
        throw std::invalid_argument("write_idx_images: rows*cols != feature dim");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    auto be32 = [&](std::uint32_t v) {
        const unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                                    static_cast<unsigned char>(v >> 16),
                                    static_cast<unsigned char>(v >> 8),
                                    static_cast<unsigned char>(v)};
        out.write(reinterpret_cast<const char*>(b), 4);
    };
    be32(0x00000803);
    be32(static_cast<std::uint32_t>(images.rows()));
    be32(static_cast<std::uint32_t>(img_rows));
    be32(static_cast<std::uint32_t>(img_cols));
    for (std::size_t i = 0; i < images.size(); ++i) {
        const double v = std::clamp(images.data()[i], 0.0, 1.0);
        const unsigned char byte = static_cast<unsigned char>(std::lround(v * 255.0));
        out.write(reinterpret_cast<const char*>(&byte), 1);
    }
}

void write_idx_labels(const std::string& path, const std::vector<int>& labels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    auto be32 = [&](std::uint32_t v) {
        const unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                                    static_cast<unsigned char>(v >> 16),
                                    static_cast<unsigned char>(v >> 8),
                                    static_cast<unsigned char>(v)};
        out.write(reinterpret_cast<const char*>(b), 4);
    };
    be32(0x00000801);
    be32(static_cast<std::uint32_t>(labels.size()));
    for (int v : labels) {
        const unsigned char byte = static_cast<unsigned char>(v);
        out.write(reinterpret_cast<const char*>(&byte), 1);
    }
}

Dataset make_synthetic(std::size_t classes, std::size_t n, std::size_t dim,
                       std::uint64_t seed, double margin) {
    if (classes == 0 || dim == 0)
        throw std::invalid_argument("make_synthetic: classes and dim must be positive");
    Dataset out;
    out.images = Matrix(n, dim);
    out.labels.resize(n);
    if (n == 0) return out;

    RngStream rng(seed);
    Matrix centers(classes, dim);
    for (std::size_t i = 0; i < centers.size(); ++i)
        centers.data()[i] = 0.2 + 0.6 * rng.next_double();
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < classes; ++a)
        for (std::size_t b = a + 1; b < classes; ++b) {
            double d2 = 0.0;
            for (std::size_t k = 0; k < dim; ++k) {
                const double d = centers(a, k) - centers(b, k);
                d2 += d * d;
            }
            dmin = std::min(dmin, std::sqrt(d2));
        }
    const double sigma = (classes > 1) ? dmin / (2.0 * margin) : 0.05;

    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = i % classes;
        out.labels[i] = static_cast<int>(c);
        for (std::size_t k = 0; k < dim; ++k)
            out.images(i, k) = std::clamp(centers(c, k) + sigma * rng.next_normal(), 0.0, 1.0);
    }
    return out;
}

std::size_t BatchPlan::num_batches() const {
    if (batch_size == 0) return 0;
    return (permutation.size() + batch_size - 1) / batch_size;
}

BatchPlan make_batch_plan(std::size_t n, std::size_t batch_size, std::uint64_t seed) {
    if (batch_size == 0) throw std::invalid_argument("make_batch_plan: batch_size == 0");
    BatchPlan plan;
    plan.seed = seed;
    plan.batch_size = batch_size;
    plan.permutation.resize(n);
    for (std::size_t i = 0; i < n; ++i) plan.permutation[i] = i;
    RngStream rng(seed);
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.next_u64() % i);
        std::swap(plan.permutation[i - 1], plan.permutation[j]);
    }
    return plan;
}

Batch get_batch(const Dataset& data, const BatchPlan& plan, std::size_t index) {
    if (index >= plan.num_batches())
        throw std::out_of_range("get_batch: batch index out of range");
    const std::size_t begin = index * plan.batch_size;
    const std::size_t end = std::min(begin + plan.batch_size, plan.permutation.size());
    Batch b;
    b.n_total = data.size();
    b.batch_size = end - begin;
    b.x = Matrix(b.batch_size, data.images.cols());
    b.y.resize(b.batch_size);
    for (std::size_t r = begin; r < end; ++r) {
        const std::size_t src = plan.permutation[r];
        auto row = data.images.row(src);
        std::copy(row.begin(), row.end(), b.x.row(r - begin).begin());
        b.y[r - begin] = data.labels[src];
    }
    return b;
}

Dataset dataset_head(const Dataset& data, std::size_t n) {
    n = std::min(n, data.size());
    Dataset out;
    out.images = Matrix(n, data.images.cols());
    std::copy(data.images.data(), data.images.data() + n * data.images.cols(),
              out.images.data());
    out.labels.assign(data.labels.begin(), data.labels.begin() + n);
    return out;
}

Dataset dataset_tail(const Dataset& data, std::size_t from) {
    from = std::min(from, data.size());
    const std::size_t n = data.size() - from;
    Dataset out;
    out.images = Matrix(n, data.images.cols());
    std::copy(data.images.data() + from * data.images.cols(),
              data.images.data() + data.size() * data.images.cols(), out.images.data());
    out.labels.assign(data.labels.begin() + from, data.labels.end());
    return out;
}

}  // namespace alphadrop
