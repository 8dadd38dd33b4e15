#include "odd/dataset.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "odd/error.hpp"
#include "odd/rng.hpp"

namespace odd::data {

int LabeledDataset::label_pm1(std::size_t i) const {
    if (num_classes != 2) throw UnsupportedModel("label_pm1: dataset is not binary");
    return 2 * labels[i] - 1;
}

int LabeledDataset::clean_label_pm1(std::size_t i) const {
    if (num_classes != 2) throw UnsupportedModel("clean_label_pm1: dataset is not binary");
    return 2 * clean_labels[i] - 1;
}

std::size_t LabeledDataset::noise_count() const {
    std::size_t c = 0;
    for (auto b : noise_mask) c += b;
    return c;
}

void LabeledDataset::check_invariants() const {
    const std::size_t n = labels.size();
    if (clean_labels.size() != n || noise_mask.size() != n || features.rows != n)
        throw InvalidParams("LabeledDataset: inconsistent lengths");
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] < 0 || labels[i] >= num_classes)
            throw InvalidParams("LabeledDataset: label out of range");
        if (clean_labels[i] < 0 || clean_labels[i] >= num_classes)
            throw InvalidParams("LabeledDataset: clean label out of range");
        if ((labels[i] != clean_labels[i]) != static_cast<bool>(noise_mask[i]))
            throw InvalidParams("LabeledDataset: noise mask inconsistent");
    }
    if (!features.all_finite()) throw InvalidParams("LabeledDataset: non-finite feature");
}

LabeledDataset generate_theorem1(const Theorem1Params& p) {
    if (p.d <= p.N) throw InvalidParams("generate_theorem1: requires d > N");
    if (p.n_flip < 1 || 2 * p.n_flip >= p.N)
        throw InvalidParams("generate_theorem1: requires 1 <= n_flip < N/2");
    if (!(p.lambda > 0.0)) throw InvalidParams("generate_theorem1: lambda must be positive");

    Rng rng(p.seed);
    LabeledDataset ds;
    ds.num_classes = 2;
    ds.features = Matrix(p.N, p.d);
    ds.labels.resize(p.N);
    ds.clean_labels.resize(p.N);
    ds.noise_mask.assign(p.N, 0);

    const double noise_sd = p.lambda / std::sqrt(static_cast<double>(p.d - 1));
    for (std::size_t i = 0; i < p.N; ++i) {
        const int y = rng.uniform_int(2) == 0 ? -1 : 1;
        ds.clean_labels[i] = (y + 1) / 2;
        ds.labels[i] = ds.clean_labels[i];
        ds.features.at(i, 0) = static_cast<double>(y);
        for (std::size_t j = 1; j < p.d; ++j) ds.features.at(i, j) = noise_sd * rng.normal();
    }
    for (std::size_t i : rng.sample_without_replacement(p.N, p.n_flip)) {
        ds.labels[i] = 1 - ds.labels[i];
        ds.noise_mask[i] = 1;
    }

    std::ostringstream params;
    params << "N=" << p.N << ",d=" << p.d << ",lambda=" << p.lambda << ",n_flip=" << p.n_flip;
    ds.meta = {"theorem1", p.seed, params.str(), rng_algorithm_name()};
    return ds;
}

LabeledDataset generate_blobs(int num_classes, std::size_t per_class, std::size_t dim,
                              double separation, std::uint64_t seed) {
    if (num_classes < 2) throw InvalidParams("generate_blobs: need at least 2 classes");
    if (dim < static_cast<std::size_t>(num_classes))
        throw InvalidParams("generate_blobs: need dim >= num_classes");
    if (per_class == 0) throw InvalidParams("generate_blobs: per_class must be positive");

    Rng rng(seed);
    const std::size_t n = per_class * static_cast<std::size_t>(num_classes);
    LabeledDataset ds;
    ds.num_classes = num_classes;
    ds.features = Matrix(n, dim);
    ds.labels.resize(n);
    ds.clean_labels.resize(n);
    ds.noise_mask.assign(n, 0);

    std::size_t row = 0;
    for (int k = 0; k < num_classes; ++k) {
        for (std::size_t j = 0; j < per_class; ++j, ++row) {
            ds.labels[row] = k;
            ds.clean_labels[row] = k;
            for (std::size_t c = 0; c < dim; ++c) ds.features.at(row, c) = rng.normal();
            ds.features.at(row, static_cast<std::size_t>(k)) += separation;
        }
    }

    std::ostringstream params;
    params << "K=" << num_classes << ",per_class=" << per_class << ",d=" << dim
           << ",separation=" << separation;
    ds.meta = {"blobs", seed, params.str(), rng_algorithm_name()};
    return ds;
}

LabeledDataset inject_uniform_noise(const LabeledDataset& ds, double fraction,
                                    std::uint64_t seed, bool exclude_true_class) {
    if (!(fraction >= 0.0 && fraction <= 1.0))
        throw InvalidFraction("inject_uniform_noise: fraction must lie in [0,1]");

    LabeledDataset out = ds;
    const std::size_t n = ds.size();
    const auto count = static_cast<std::size_t>(fraction * static_cast<double>(n));
    Rng rng(seed);
    for (std::size_t i : rng.sample_without_replacement(n, count)) {
        if (exclude_true_class) {
            const auto r = static_cast<int>(rng.uniform_int(ds.num_classes - 1));
            out.labels[i] = r >= out.clean_labels[i] ? r + 1 : r;
        } else {
            out.labels[i] = static_cast<int>(rng.uniform_int(ds.num_classes));
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        out.noise_mask[i] = out.labels[i] != out.clean_labels[i] ? 1 : 0;

    std::ostringstream params;
    params << ds.meta.params << ",noise_fraction=" << fraction
           << ",noise_seed=" << seed << ",exclude_true_class=" << (exclude_true_class ? 1 : 0);
    out.meta.params = params.str();
    return out;
}

void save_csv(const LabeledDataset& ds, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("save_csv: cannot open " + path);

    const std::size_t d = ds.dim();
    for (std::size_t j = 0; j < d; ++j) f << 'f' << j << ',';
    f << "label,clean_label,is_noise\n";

    char buf[40];
    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", ds.features.at(i, j));
            f << buf << ',';
        }
        f << ds.labels[i] << ',' << ds.clean_labels[i] << ','
          << static_cast<int>(ds.noise_mask[i]) << '\n';
    }
    if (!f) throw IoError("save_csv: write failed for " + path);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

double parse_double(const std::string& s, std::size_t row, std::size_t col) {
    double value = 0.0;
    const auto* begin = s.data();
    const auto* end = s.data() + s.size();
    const auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc{} || res.ptr != end)
        throw ParseError("load_csv: bad number at row " + std::to_string(row) + ", column " +
                         std::to_string(col));
    return value;
}

int parse_int(const std::string& s, std::size_t row, std::size_t col) {
    int value = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ParseError("load_csv: bad integer at row " + std::to_string(row) + ", column " +
                         std::to_string(col));
    return value;
}

}  // namespace

LabeledDataset load_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("load_csv: cannot open " + path);

    std::string line;
    if (!std::getline(f, line)) throw ParseError("load_csv: empty file " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const auto header = split_csv_line(line);
    std::size_t n_features = 0;
    while (n_features < header.size() && header[n_features] == "f" + std::to_string(n_features))
        ++n_features;
    if (n_features >= header.size() || header[n_features] != "label")
        throw SchemaError("load_csv: label column missing in " + path);

    bool has_clean = false, has_noise = false;
    if (header.size() == n_features + 1) {
        // label only
    } else if (header.size() == n_features + 3 && header[n_features + 1] == "clean_label" &&
               header[n_features + 2] == "is_noise") {
        has_clean = has_noise = true;
    } else {
        throw SchemaError("load_csv: unrecognized header in " + path);
    }

    std::vector<double> feats;
    std::vector<int> labels, clean;
    std::vector<std::uint8_t> mask;
    std::size_t row = 1;
    while (std::getline(f, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw ParseError("load_csv: row " + std::to_string(row) + " has " +
                             std::to_string(fields.size()) + " fields, expected " +
                             std::to_string(header.size()));
        for (std::size_t j = 0; j < n_features; ++j)
            feats.push_back(parse_double(fields[j], row, j));
        const int label = parse_int(fields[n_features], row, n_features);
        labels.push_back(label);
        if (has_clean) {
            const int clean_label = parse_int(fields[n_features + 1], row, n_features + 1);
            const int is_noise = parse_int(fields[n_features + 2], row, n_features + 2);
            if ((label != clean_label) != (is_noise != 0))
                throw ParseError("load_csv: is_noise inconsistent with labels at row " +
                                 std::to_string(row));
            clean.push_back(clean_label);
            mask.push_back(static_cast<std::uint8_t>(is_noise != 0));
        } else {
            clean.push_back(label);
            mask.push_back(0);
        }
    }

    LabeledDataset ds;
    ds.features = Matrix::from_data(labels.size(), n_features, std::move(feats));
    ds.labels = std::move(labels);
    ds.clean_labels = std::move(clean);
    ds.noise_mask = std::move(mask);
    int max_label = 1;
    for (std::size_t i = 0; i < ds.labels.size(); ++i)
        max_label = std::max({max_label, ds.labels[i], ds.clean_labels[i]});
    ds.num_classes = max_label + 1;
    ds.meta = {"csv", 0, "path=" + path, ""};
    (void)has_noise;
    ds.check_invariants();
    return ds;
}

Matrix signed_design_matrix(const LabeledDataset& ds) {
    const std::size_t n = ds.size();
    const std::size_t d = ds.dim();
    Matrix X(d, n);
    for (std::size_t i = 0; i < n; ++i) {
        const double y = ds.label_pm1(i);
        for (std::size_t j = 0; j < d; ++j) X.at(j, i) = y * ds.features.at(i, j);
    }
    return X;
}

}  // namespace odd::data
