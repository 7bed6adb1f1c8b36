#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "alphadrop/matrix.hpp"

namespace alphadrop {

// Images as rows of floats in [0,1] (pixels scaled by 1/255), labels as
// class ids in [0,10). Immutable after load; shareable read-only.
struct Dataset {
    Matrix images;            // n x dim
    std::vector<int> labels;  // n

    std::size_t size() const { return labels.size(); }
};

// IDX loaders. Big-endian headers; image magic 0x00000803 (count, rows,
// cols, unsigned-byte pixels), label magic 0x00000801. Files starting with
// the gzip prefix 0x1f 0x8b are inflated transparently. Each defect class
// raises its own error: IdxMagicError, IdxTruncatedError, IdxRangeError.
Matrix load_idx_images(const std::string& path);
std::vector<int> load_idx_labels(const std::string& path);

// Fixture writers, exact inverses of the loaders on the quantized pixel
// grid (pixel = round(v * 255) / 255).
void write_idx_images(const std::string& path, const Matrix& images,
                      std::size_t img_rows, std::size_t img_cols);
void write_idx_labels(const std::string& path, const std::vector<int>& labels);

struct IdxMagicError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IdxTruncatedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IdxRangeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Gaussian blobs, one center per class, pairwise center distance at least
// 2 * margin blob standard deviations; labels cycle 0..classes-1.
// Deterministic in seed; features clamped to [0,1].
Dataset make_synthetic(std::size_t classes, std::size_t n, std::size_t dim,
                       std::uint64_t seed, double margin = 4.0);

// One epoch's shuffled batch schedule: a seeded permutation cut into
// batches; the final short batch keeps its true size.
struct BatchPlan {
    std::uint64_t seed = 0;
    std::size_t batch_size = 0;
    std::vector<std::size_t> permutation;

    std::size_t num_batches() const;
};

BatchPlan make_batch_plan(std::size_t n, std::size_t batch_size, std::uint64_t seed);

struct Batch {
    Matrix x;
    std::vector<int> y;
    std::size_t n_total = 0;    // dataset size, for the likelihood scaling
    std::size_t batch_size = 0; // actual rows in the batch
};

Batch get_batch(const Dataset& data, const BatchPlan& plan, std::size_t index);

// First n rows / rows from n on, as independent datasets.
Dataset dataset_head(const Dataset& data, std::size_t n);
Dataset dataset_tail(const Dataset& data, std::size_t from);

}  // namespace alphadrop
