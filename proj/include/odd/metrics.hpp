#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "odd/dataset.hpp"
#include "odd/matrix.hpp"
#include "odd/models.hpp"

namespace odd::metrics {

struct DetectionMetrics {
    double precision = 1.0;  // 1 when nothing is flagged
    double recall = 1.0;     // 1 when nothing is noisy
    double f1 = 1.0;
    double flagged_fraction = 0.0;
    double true_noise_fraction = 0.0;
};

DetectionMetrics detection_metrics(const std::vector<int>& flagged,
                                   const std::vector<std::uint8_t>& noise_mask);

/// Fraction of examples whose argmax logit matches the label (first maximum
/// wins ties). Throws EmptyDataset on an empty dataset.
double accuracy(const models::MlpModel& m, const data::LabeledDataset& ds);

/// Linear binary accuracy: sign(w.x) interpreted as the +/-1 label view.
double accuracy(const models::LinearModel& m, const data::LabeledDataset& ds);

struct Histogram {
    std::vector<double> bin_lo;
    std::vector<double> bin_hi;
    std::vector<std::size_t> count;
};

/// Uniform bins over [0, max(values)], right-open except the last bin.
/// Values are expected to be nonnegative (losses).
Histogram histogram(const Vector& values, std::size_t bins);

/// Writes `bin_lo,bin_hi,count` rows.
void save_histogram_csv(const Histogram& h, const std::string& path);

}  // namespace odd::metrics
