#pragma once

#include <string>

#include <json.hpp>

#include "odd/dataset.hpp"
#include "odd/denoise.hpp"
#include "odd/metrics.hpp"

namespace odd::artifacts {

/// Writes `content` to a temp file next to `path` and renames it into place.
void write_file_atomic(const std::string& path, const std::string& content);

/// Result directory layout: summary.json, flagged.csv, qn_histogram.csv,
/// loss_histogram_epochE.csv. `config_echo` lands verbatim in summary.json.
void write_odd_result(const std::string& dir, const denoise::OddRunResult& result,
                      const data::LabeledDataset& ds, const nlohmann::json& config_echo);

/// Histogram CSV with optional clean/noisy breakdown columns.
void write_loss_histogram(const std::string& path, const Vector& losses,
                          const std::vector<std::uint8_t>* mask, std::size_t bins);

}  // namespace odd::artifacts
