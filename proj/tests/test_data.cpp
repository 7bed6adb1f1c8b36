#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <zlib.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "alphadrop/data.hpp"
#include "alphadrop/rng.hpp"

using namespace alphadrop;
namespace fs = std::filesystem;

namespace {

void write_bytes(const std::string& path, const std::vector<unsigned char>& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

std::vector<unsigned char> be32(std::uint32_t v) {
    return {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
            static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
}

void append(std::vector<unsigned char>& out, const std::vector<unsigned char>& more) {
    out.insert(out.end(), more.begin(), more.end());
}

struct TempFile {
    std::string path;
    explicit TempFile(std::string p) : path(std::move(p)) {}
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("hand-crafted one-image IDX file") {
    std::vector<unsigned char> bytes;
    append(bytes, be32(0x00000803));
    append(bytes, be32(1));
    append(bytes, be32(2));
    append(bytes, be32(2));
    append(bytes, {0, 128, 255, 0});
    TempFile f("fixture_img.idx");
    write_bytes(f.path, bytes);

    const Matrix m = load_idx_images(f.path);
    CHECK(m.rows() == 1);
    CHECK(m.cols() == 4);
    CHECK(m(0, 0) == 0.0);
    CHECK(m(0, 1) == doctest::Approx(128.0 / 255.0));
    CHECK(m(0, 2) == 1.0);
    CHECK(m(0, 3) == 0.0);
}

TEST_CASE("image loader rejects the label magic") {
    std::vector<unsigned char> bytes;
    append(bytes, be32(0x00000801));
    append(bytes, be32(1));
    append(bytes, be32(2));
    append(bytes, be32(2));
    append(bytes, {0, 0, 0, 0});
    TempFile f("fixture_wrong_magic.idx");
    write_bytes(f.path, bytes);
    CHECK_THROWS_AS(load_idx_images(f.path), IdxMagicError);
}

TEST_CASE("truncated pixel section is an error, not a short read") {
    std::vector<unsigned char> bytes;
    append(bytes, be32(0x00000803));
    append(bytes, be32(2));
    append(bytes, be32(2));
    append(bytes, be32(2));
    append(bytes, {1, 2, 3});  // needs 8 pixel bytes
    TempFile f("fixture_trunc.idx");
    write_bytes(f.path, bytes);
    CHECK_THROWS_AS(load_idx_images(f.path), IdxTruncatedError);
}

TEST_CASE("label fixtures") {
    std::vector<unsigned char> bytes;
    append(bytes, be32(0x00000801));
    append(bytes, be32(2));
    append(bytes, {3, 7});
    TempFile f("fixture_labels.idx");
    write_bytes(f.path, bytes);
    const auto labels = load_idx_labels(f.path);
    CHECK(labels == std::vector<int>{3, 7});

    std::vector<unsigned char> empty;
    append(empty, be32(0x00000801));
    append(empty, be32(0));
    TempFile fe("fixture_labels_empty.idx");
    write_bytes(fe.path, empty);
    CHECK(load_idx_labels(fe.path).empty());

    std::vector<unsigned char> bad;
    append(bad, be32(0x00000801));
    append(bad, be32(1));
    append(bad, {12});
    TempFile fb("fixture_labels_bad.idx");
    write_bytes(fb.path, bad);
    CHECK_THROWS_AS(load_idx_labels(fb.path), IdxRangeError);
}

TEST_CASE("gzip-wrapped IDX is detected by the magic prefix") {
    std::vector<unsigned char> bytes;
    append(bytes, be32(0x00000801));
    append(bytes, be32(3));
    append(bytes, {1, 2, 3});

    TempFile f("fixture_labels.idx.gz");
    gzFile gz = gzopen(f.path.c_str(), "wb");
    REQUIRE(gz != nullptr);
    gzwrite(gz, bytes.data(), static_cast<unsigned>(bytes.size()));
    gzclose(gz);

    const auto labels = load_idx_labels(f.path);
    CHECK(labels == std::vector<int>{1, 2, 3});
}

TEST_CASE("dataset round-trips through IDX on the quantized grid") {
    Dataset d = make_synthetic(3, 30, 9, 404);
    // quantize to the byte grid first so the round trip is exact
    for (std::size_t i = 0; i < d.images.size(); ++i)
        d.images.data()[i] = std::lround(d.images.data()[i] * 255.0) / 255.0;

    TempFile fi("roundtrip-images-idx3-ubyte");
    TempFile fl("roundtrip-labels-idx1-ubyte");
    write_idx_images(fi.path, d.images, 3, 3);
    write_idx_labels(fl.path, d.labels);
    const Matrix back = load_idx_images(fi.path);
    const auto labels = load_idx_labels(fl.path);
    CHECK(back == d.images);
    CHECK(labels == d.labels);
}

TEST_CASE("synthetic data is deterministic, balanced, and size-exact") {
    const Dataset a = make_synthetic(4, 100, 8, 1234);
    const Dataset b = make_synthetic(4, 100, 8, 1234);
    CHECK(a.images == b.images);
    CHECK(a.labels == b.labels);

    const Dataset empty = make_synthetic(4, 0, 8, 1);
    CHECK(empty.size() == 0);

    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.labels[i] == static_cast<int>(i % 4));
        for (double v : a.images.row(i)) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("batch plan covers every index exactly once") {
    const Dataset d = make_synthetic(2, 10, 4, 55);
    const BatchPlan plan = make_batch_plan(d.size(), 3, 77);
    CHECK(plan.num_batches() == 4);
    std::vector<std::size_t> sizes;
    std::set<std::pair<double, int>> seen;
    std::multiset<std::size_t> indices(plan.permutation.begin(), plan.permutation.end());
    CHECK(indices.size() == 10);
    for (std::size_t i = 0; i < 10; ++i) CHECK(indices.count(i) == 1);

    for (std::size_t b = 0; b < plan.num_batches(); ++b) {
        const Batch batch = get_batch(d, plan, b);
        sizes.push_back(batch.batch_size);
        CHECK(batch.n_total == 10);
        CHECK(batch.x.rows() == batch.batch_size);
    }
    CHECK(sizes == std::vector<std::size_t>{3, 3, 3, 1});

    // the short batch carries its true size for the likelihood scaling
    const Batch last = get_batch(d, plan, 3);
    CHECK(last.batch_size == 1);
    CHECK(static_cast<double>(last.n_total) / last.batch_size == 10.0);
}

TEST_CASE("different epochs shuffle differently but remain permutations") {
    const std::size_t n = 64;
    const BatchPlan p1 = make_batch_plan(n, 8, derive_seed(9, 100));
    const BatchPlan p2 = make_batch_plan(n, 8, derive_seed(9, 101));
    CHECK(p1.permutation != p2.permutation);
    auto sorted = p2.permutation;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < n; ++i) CHECK(sorted[i] == i);
}

TEST_CASE("head and tail splits partition the dataset") {
    const Dataset d = make_synthetic(3, 30, 5, 321);
    const Dataset head = dataset_head(d, 20);
    const Dataset tail = dataset_tail(d, 20);
    CHECK(head.size() == 20);
    CHECK(tail.size() == 10);
    CHECK(head.labels[0] == d.labels[0]);
    CHECK(tail.labels[0] == d.labels[20]);
}

TEST_CASE("IDX dimension overflow is rejected") {
    std::vector<unsigned char> bytes;
    append(bytes, be32(0x00000803));
    append(bytes, be32(0xFFFFFFFF));
    append(bytes, be32(0xFFFF));
    append(bytes, be32(0xFFFF));
    TempFile f("fixture_overflow.idx");
    write_bytes(f.path, bytes);
    CHECK_THROWS_AS(load_idx_images(f.path), IdxRangeError);
}
