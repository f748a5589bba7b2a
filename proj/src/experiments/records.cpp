// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0

#include "sld/experiments/records.hpp"

#include <cmath>

namespace sld::experiments {

std::string csv_safe(std::string s) {
    for (char& c : s) {
        if (c == ',') {
            c = ';';
        } else if (c == '\n') {
            c = ' ';
        }
    }
    return s;
}

namespace {

std::string opt(const std::optional<std::size_t>& v) {
    return v ? std::to_string(*v) : "";
}

std::vector<std::string> key_fields(const Record& r) {
    return {r.experiment,
            r.dataset,
            std::to_string(r.ipc),
            csv_safe(r.labels),
            opt(r.expert_epoch),
            csv::num(r.temperature),
            std::to_string(r.topk),
            std::to_string(r.swap_i),
            opt(r.class_i),
            r.arm};
}

const std::vector<std::string> kKeyHeader = {"experiment", "dataset", "ipc",     "labels",  "expert_epoch",
                                             "temperature", "topk",   "swap_i", "class_i", "arm"};

}  // namespace

csv::Table records_table(const std::vector<Record>& records) {
    csv::Table t;
    t.header = kKeyHeader;
    for (const char* h : {"seed", "accuracy", "class_accuracy", "mean_entropy_nats", "epochs_run"}) {
        t.header.emplace_back(h);
    }
    for (const auto& r : records) {
        auto row = key_fields(r);
        row.push_back(std::to_string(r.seed));
        row.push_back(csv::fixed(r.accuracy, 6));
        row.push_back(r.class_accuracy ? csv::fixed(*r.class_accuracy, 6) : "");
        row.push_back(csv::fixed(r.mean_entropy, 6));
        row.push_back(std::to_string(r.epochs_run));
        t.rows.push_back(std::move(row));
    }
    return t;
}

csv::Table timings_table(const std::vector<Record>& records) {
    csv::Table t;
    t.header = {"experiment", "row", "arm", "seed", "wall_seconds"};
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        t.rows.push_back({r.experiment, std::to_string(i), r.arm, std::to_string(r.seed), csv::fixed(r.wall_seconds, 3)});
    }
    return t;
}

double mean(const std::vector<double>& v) {
    if (v.empty()) {
        return 0.0;
    }
    double s = 0.0;
    for (double x : v) {
        s += x;
    }
    return s / static_cast<double>(v.size());
}

double sample_stddev(const std::vector<double>& v) {
    if (v.size() < 2) {
        return 0.0;
    }
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) {
        s += (x - m) * (x - m);
    }
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::vector<Summary> summarize(const std::vector<Record>& records) {
    std::vector<Summary> out;
    std::vector<std::vector<std::string>> keys;
    std::vector<std::vector<double>> acc;
    std::vector<std::vector<double>> cls;
    for (const auto& r : records) {
        const auto k = key_fields(r);
        std::size_t slot = keys.size();
        for (std::size_t i = 0; i < keys.size(); ++i) {
            if (keys[i] == k) {
                slot = i;
                break;
            }
        }
        if (slot == keys.size()) {
            keys.push_back(k);
            acc.emplace_back();
            cls.emplace_back();
            Summary s;
            s.key = r;
            out.push_back(s);
        }
        acc[slot].push_back(r.accuracy);
        if (r.class_accuracy) {
            cls[slot].push_back(*r.class_accuracy);
        }
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].n = acc[i].size();
        out[i].mean = mean(acc[i]);
        out[i].stddev = sample_stddev(acc[i]);
        if (!cls[i].empty()) {
            out[i].class_mean = mean(cls[i]);
        }
    }
    return out;
}

csv::Table summary_table(const std::vector<Summary>& summaries) {
    csv::Table t;
    t.header = kKeyHeader;
    for (const char* h : {"n", "mean_accuracy", "std_accuracy", "mean_class_accuracy", "mean_entropy_nats"}) {
        t.header.emplace_back(h);
    }
    for (const auto& s : summaries) {
        auto row = key_fields(s.key);
        row.push_back(std::to_string(s.n));
        row.push_back(csv::fixed(s.mean, 6));
        row.push_back(csv::fixed(s.stddev, 6));
        row.push_back(s.class_mean ? csv::fixed(*s.class_mean, 6) : "");
        row.push_back(csv::fixed(s.key.mean_entropy, 6));
        t.rows.push_back(std::move(row));
    }
    return t;
}

void write_records(const std::filesystem::path& dir, const std::string& stem, const std::vector<Record>& records) {
    csv::write(dir / (stem + ".csv"), records_table(records));
    csv::write(dir / (stem + "_summary.csv"), summary_table(summarize(records)));
    csv::write(dir / (stem + "_timings.csv"), timings_table(records));
}

}  // namespace sld::experiments
