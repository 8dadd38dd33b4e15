#include "odd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "odd/error.hpp"

namespace odd::metrics {

DetectionMetrics detection_metrics(const std::vector<int>& flagged,
                                   const std::vector<std::uint8_t>& noise_mask) {
    const std::size_t n = noise_mask.size();
    std::size_t noisy = 0;
    for (auto b : noise_mask) noisy += b;

    std::size_t hits = 0;
    for (int i : flagged) {
        if (i < 0 || static_cast<std::size_t>(i) >= n)
            throw InvalidParams("detection_metrics: flagged index out of range");
        hits += noise_mask[static_cast<std::size_t>(i)];
    }

    DetectionMetrics dm;
    dm.precision = flagged.empty() ? 1.0 : static_cast<double>(hits) / static_cast<double>(flagged.size());
    dm.recall = noisy == 0 ? 1.0 : static_cast<double>(hits) / static_cast<double>(noisy);
    dm.f1 = dm.precision + dm.recall > 0.0
                ? 2.0 * dm.precision * dm.recall / (dm.precision + dm.recall)
                : 0.0;
    dm.flagged_fraction = n == 0 ? 0.0 : static_cast<double>(flagged.size()) / static_cast<double>(n);
    dm.true_noise_fraction = n == 0 ? 0.0 : static_cast<double>(noisy) / static_cast<double>(n);
    return dm;
}

double accuracy(const models::MlpModel& m, const data::LabeledDataset& ds) {
    if (ds.size() == 0) throw EmptyDataset("accuracy: empty dataset");
    std::size_t correct = 0;
    Vector x(ds.dim());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (std::size_t j = 0; j < ds.dim(); ++j) x[j] = ds.features.at(i, j);
        const Vector logits = m.forward(x);
        std::size_t best = 0;
        for (std::size_t k = 1; k < logits.dim(); ++k)
            if (logits[k] > logits[best]) best = k;
        correct += best == static_cast<std::size_t>(ds.labels[i]);
    }
    return static_cast<double>(correct) / static_cast<double>(ds.size());
}

double accuracy(const models::LinearModel& m, const data::LabeledDataset& ds) {
    if (ds.size() == 0) throw EmptyDataset("accuracy: empty dataset");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        double dot = 0.0;
        for (std::size_t j = 0; j < ds.dim(); ++j) dot += m.w[j] * ds.features.at(i, j);
        const int pred = dot > 0.0 ? 1 : -1;
        correct += pred == ds.label_pm1(i);
    }
    return static_cast<double>(correct) / static_cast<double>(ds.size());
}

Histogram histogram(const Vector& values, std::size_t bins) {
    if (bins < 1) throw InvalidParams("histogram: need at least one bin");
    double max_v = 0.0;
    for (double v : values.v) max_v = std::max(max_v, v);
    const double width = max_v > 0.0 ? max_v / static_cast<double>(bins) : 1.0;

    Histogram h;
    h.bin_lo.resize(bins);
    h.bin_hi.resize(bins);
    h.count.assign(bins, 0);
    for (std::size_t b = 0; b < bins; ++b) {
        h.bin_lo[b] = width * static_cast<double>(b);
        h.bin_hi[b] = width * static_cast<double>(b + 1);
    }
    for (double v : values.v) {
        auto b = static_cast<std::size_t>(v / width);
        if (b >= bins) b = bins - 1;  // the last bin is closed on the right
        ++h.count[b];
    }
    return h;
}

void save_histogram_csv(const Histogram& h, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("save_histogram_csv: cannot open " + path);
    f << "bin_lo,bin_hi,count\n";
    char buf[40];
    for (std::size_t b = 0; b < h.count.size(); ++b) {
        std::snprintf(buf, sizeof buf, "%.17g", h.bin_lo[b]);
        f << buf << ',';
        std::snprintf(buf, sizeof buf, "%.17g", h.bin_hi[b]);
        f << buf << ',' << h.count[b] << '\n';
    }
}

}  // namespace odd::metrics
