#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "odd/matrix.hpp"

namespace odd::data {

struct DatasetMeta {
    std::string generator;
    std::uint64_t seed = 0;
    std::string params;
    std::string rng;
};

/// Labeled dataset with ground-truth noise bookkeeping. Examples are rows of
/// `features`. Labels are class ids in {0..K-1}; binary datasets (K == 2) also
/// expose the +/-1 view y = 2*class - 1.
struct LabeledDataset {
    Matrix features;  // N x d
    std::vector<int> labels;
    std::vector<int> clean_labels;
    std::vector<std::uint8_t> noise_mask;  // 1 iff labels[i] != clean_labels[i]
    int num_classes = 0;
    DatasetMeta meta;

    std::size_t size() const { return labels.size(); }
    std::size_t dim() const { return features.cols; }

    /// +/-1 label view; requires K == 2.
    int label_pm1(std::size_t i) const;
    int clean_label_pm1(std::size_t i) const;

    std::size_t noise_count() const;

    /// Throws if the mask/label/feature invariants do not hold.
    void check_invariants() const;
};

/// Synthetic construction for the loss-separation theorem: first coordinate
/// carries the clean +/-1 label, remaining d-1 coordinates are independent
/// N(0, lambda^2/(d-1)) noise, and exactly n_flip labels are flipped.
struct Theorem1Params {
    std::size_t N = 0;
    std::size_t d = 0;
    double lambda = 1.0;
    std::size_t n_flip = 0;
    std::uint64_t seed = 0;
};

LabeledDataset generate_theorem1(const Theorem1Params& params);

/// Gaussian blobs: class k is centered at separation * e_k with isotropic unit
/// noise. Labels start clean (empty noise mask).
LabeledDataset generate_blobs(int num_classes, std::size_t per_class, std::size_t dim,
                              double separation, std::uint64_t seed);

/// Redraws floor(fraction * N) labels uniformly. By default the redraw ranges
/// over all K classes (it may coincide with the true label); pass
/// exclude_true_class to force a different class. The noise mask is recomputed
/// against clean_labels, so the operation composes.
LabeledDataset inject_uniform_noise(const LabeledDataset& ds, double fraction,
                                    std::uint64_t seed, bool exclude_true_class = false);

/// CSV round trip. Header: f0..f{d-1},label[,clean_label,is_noise]; floats are
/// written with 17 significant digits so load(save(ds)) is exact.
void save_csv(const LabeledDataset& ds, const std::string& path);
LabeledDataset load_csv(const std::string& path);

/// Design matrix X (d x N) whose i-th column is label_pm1(i) * x_i.
Matrix signed_design_matrix(const LabeledDataset& ds);

}  // namespace odd::data
