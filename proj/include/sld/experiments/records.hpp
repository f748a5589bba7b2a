// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0
//
// One row per (configuration, seed). Every driver writes the same column
// set; wall-clock time goes to a separate timings file so record files are
// reproducible byte for byte.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sld/util/csv.hpp"

namespace sld::experiments {

struct Record {
    std::string experiment;
    std::string dataset;
    std::size_t ipc = 0;
    std::string labels;             // provenance
    std::optional<std::size_t> expert_epoch;
    double temperature = 1.0;
    std::size_t topk = 0;           // 0 = untruncated
    std::size_t swap_i = 0;         // 0 = unswapped
    std::optional<std::size_t> class_i;
    std::string arm;
    std::uint64_t seed = 0;
    double accuracy = 0.0;
    std::optional<double> class_accuracy;
    double mean_entropy = 0.0;      // nats
    std::size_t epochs_run = 0;
    double wall_seconds = 0.0;      // timings file only
};

/// experiment,dataset,ipc,labels,expert_epoch,temperature,topk,swap_i,class_i,arm,seed,
/// accuracy,class_accuracy,mean_entropy_nats,epochs_run
csv::Table records_table(const std::vector<Record>& records);
/// experiment,row,arm,seed,wall_seconds
csv::Table timings_table(const std::vector<Record>& records);

struct Summary {
    Record key;  // seed / accuracy fields unused
    std::size_t n = 0;
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation
    std::optional<double> class_mean;
};

/// Groups records that differ only in seed, keeping first-seen order.
std::vector<Summary> summarize(const std::vector<Record>& records);
csv::Table summary_table(const std::vector<Summary>& summaries);

double mean(const std::vector<double>& v);
double sample_stddev(const std::vector<double>& v);

/// CSV fields cannot hold commas; provenance strings use them.
std::string csv_safe(std::string s);

/// Writes <dir>/<stem>.csv, <stem>_summary.csv and <stem>_timings.csv.
void write_records(const std::filesystem::path& dir, const std::string& stem, const std::vector<Record>& records);

}  // namespace sld::experiments
