#include "odd/artifacts.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "odd/error.hpp"
#include "odd/rng.hpp"

namespace odd::artifacts {

namespace fs = std::filesystem;

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary);
        if (!f) throw IoError("write_file_atomic: cannot open " + tmp);
        f << content;
        if (!f) throw IoError("write_file_atomic: write failed for " + tmp);
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("write_file_atomic: rename to " + path + " failed: " + ec.message());
}

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void write_loss_histogram(const std::string& path, const Vector& losses,
                          const std::vector<std::uint8_t>* mask, std::size_t bins) {
    const auto h = metrics::histogram(losses, bins);
    std::ostringstream out;
    if (mask == nullptr) {
        out << "bin_lo,bin_hi,count\n";
        for (std::size_t b = 0; b < h.count.size(); ++b)
            out << format_double(h.bin_lo[b]) << ',' << format_double(h.bin_hi[b]) << ','
                << h.count[b] << '\n';
    } else {
        std::vector<std::size_t> clean(h.count.size(), 0), noisy(h.count.size(), 0);
        const double width = h.bin_hi[0] - h.bin_lo[0];
        for (std::size_t i = 0; i < losses.dim(); ++i) {
            auto b = static_cast<std::size_t>(losses[i] / width);
            if (b >= h.count.size()) b = h.count.size() - 1;
            if ((*mask)[i])
                ++noisy[b];
            else
                ++clean[b];
        }
        out << "bin_lo,bin_hi,count,count_clean,count_noisy\n";
        for (std::size_t b = 0; b < h.count.size(); ++b)
            out << format_double(h.bin_lo[b]) << ',' << format_double(h.bin_hi[b]) << ','
                << h.count[b] << ',' << clean[b] << ',' << noisy[b] << '\n';
    }
    write_file_atomic(path, out.str());
}

void write_odd_result(const std::string& dir, const denoise::OddRunResult& result,
                      const data::LabeledDataset& ds, const nlohmann::json& config_echo) {
    fs::create_directories(dir);

    bool mask_known = false;
    for (auto b : ds.noise_mask) mask_known |= b != 0;

    nlohmann::json summary;
    summary["config"] = config_echo;
    summary["rng"] = rng_algorithm_name();
    summary["threshold"] = result.split.threshold;
    summary["percentile"] = result.split.percentile;
    summary["kept_count"] = result.split.kept.size();
    summary["flagged_count"] = result.split.flagged.size();
    summary["flagged_fraction"] =
        static_cast<double>(result.split.flagged.size()) / static_cast<double>(ds.size());
    summary["train_accuracy"] = result.train_accuracy;
    summary["snapshot_epoch"] = result.snapshot.snapshot_epoch;
    if (result.detection.has_value()) {
        summary["detection"] = {{"precision", result.detection->precision},
                                {"recall", result.detection->recall},
                                {"f1", result.detection->f1},
                                {"flagged_fraction", result.detection->flagged_fraction},
                                {"true_noise_fraction", result.detection->true_noise_fraction}};
    }
    write_file_atomic((fs::path(dir) / "summary.json").string(), summary.dump(2) + "\n");

    {
        std::ostringstream out;
        out << (mask_known ? "index,loss,is_noise\n" : "index,loss\n");
        for (int i : result.split.flagged) {
            const auto idx = static_cast<std::size_t>(i);
            out << i << ',' << format_double(result.split.losses[idx]);
            if (mask_known) out << ',' << static_cast<int>(ds.noise_mask[idx]);
            out << '\n';
        }
        write_file_atomic((fs::path(dir) / "flagged.csv").string(), out.str());
    }

    {
        const auto h = metrics::histogram(result.qn_samples, 100);
        std::ostringstream out;
        out << "bin_lo,bin_hi,count\n";
        for (std::size_t b = 0; b < h.count.size(); ++b)
            out << format_double(h.bin_lo[b]) << ',' << format_double(h.bin_hi[b]) << ','
                << h.count[b] << '\n';
        write_file_atomic((fs::path(dir) / "qn_histogram.csv").string(), out.str());
    }

    const std::string loss_hist =
        "loss_histogram_epoch" + std::to_string(result.snapshot.snapshot_epoch) + ".csv";
    write_loss_histogram((fs::path(dir) / loss_hist).string(), result.split.losses,
                         mask_known ? &ds.noise_mask : nullptr, 100);
}

}  // namespace odd::artifacts
