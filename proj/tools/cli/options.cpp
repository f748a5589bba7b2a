// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli/options.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace sld::cli {

const std::vector<OptionSpec>& option_table() {
    static const std::vector<OptionSpec> table = {
        {"run.jobs", "--jobs", "0", "worker threads for independent cells (0 = hardware concurrency)"},

        {"data.root", "--data-root", "", "dataset root (default: SLD_DATA_ROOT or the build-time path)"},
        {"data.dataset", "--dataset", "mnist", "mnist | cifar10"},
        {"data.train_size", "--train-size", "0", "use the first N train images (0 = all)"},
        {"data.test_size", "--test-size", "0", "use the first N test images (0 = all)"},

        {"model.arch", "--arch", "mlp", "mlp | convnet"},
        {"model.hidden", "--hidden", "128", "mlp hidden widths, comma separated"},
        {"model.depth", "--depth", "3", "convnet blocks"},
        {"model.width", "--width", "128", "convnet channels"},

        {"expert.lr", "--expert-lr", "0.01", "expert learning rate"},
        {"expert.momentum", "--expert-momentum", "0.9", ""},
        {"expert.weight_decay", "--expert-weight-decay", "5e-4", ""},
        {"expert.epochs", "--expert-epochs", "10", "expert epochs (a checkpoint per epoch)"},
        {"expert.batch", "--expert-batch", "128", ""},
        {"expert.milestones", "--expert-milestones", "", "step decay epochs, comma separated"},
        {"expert.gamma", "--expert-gamma", "0.1", "step decay factor"},
        {"expert.dir", "--expert", "", "expert run directory or checkpoint file (comma list for ensembles)"},
        {"expert.epoch", "--epoch", "", "checkpoint epoch inside --expert"},

        {"student.lr", "--student-lr", "0.01", "student learning rate"},
        {"student.momentum", "--student-momentum", "0.9", ""},
        {"student.weight_decay", "--student-weight-decay", "5e-4", ""},
        {"student.max_epochs", "--student-max-epochs", "500", ""},
        {"student.patience", "--patience", "20", "epochs without improvement before stopping"},
        {"student.min_delta", "--min-delta", "0.001", "improvement threshold (accuracy fraction)"},
        {"student.seeds", "--num-seeds", "5", "student seeds per configuration"},

        {"grid.ipc", "--ipc", "1,10,50", "images per class, comma separated"},
        {"grid.epochs", "--epochs", "", "expert epochs, comma separated (default: all checkpoints)"},
        {"grid.temps", "--temps", "1,2,4", "temperatures, comma separated"},
        {"grid.i", "--i", "", "swap ranks (default: 1,2,5,C/2,C)"},
        {"grid.k", "--k", "", "top-k values (default: powers of two below C, then C)"},
        {"grid.quantiles", "--quantiles", "1,5,10", "cross-entropy deciles"},
        {"grid.class", "--class", "0", "class removed by zero-shot"},

        {"labels.mode", "--mode", "single", "single | ensemble"},
        {"labels.temp", "--temp", "1", "softmax temperature"},
        {"labels.topk", "--topk", "0", "keep the k largest entries (0 = all)"},
        {"labels.swap_i", "--swap-i", "0", "swap rank i with rank C (0 = none)"},
        {"labels.file", "--labels", "", "label file written by gen-labels or bptt-distill"},
        {"labels.indices", "--indices", "", "distilled image indices (default: indices.csv next to --labels)"},
        {"labels.hard", "--hard", "", "train on hard labels", true},

        {"bptt.unroll", "--unroll", "20", "inner steps T"},
        {"bptt.window", "--window", "20", "truncation window M"},
        {"bptt.inner_lr", "--inner-lr", "0.01", ""},
        {"bptt.label_lr", "--label-lr", "1", ""},
        {"bptt.outer_iters", "--outer-iters", "100", ""},
        {"bptt.target_batch", "--target-batch", "256", ""},
        {"bptt.distilled_batch", "--distilled-batch", "256", ""},
        {"bptt.clip", "--clip", "1", "global norm clip of the meta-gradient"},
        {"bptt.init_scale", "--init-scale", "5", "initial logits = scale * one_hot"},
        {"bptt.cosine", "--cosine", "", "cosine decay of the label learning rate", true},
        {"bptt.evaluate", "--evaluate", "", "also train students on hard and learned labels", true},

        {"fit.planted", "--planted", "", "a,b,c,s for the synthetic self-test"},
        {"fit.noiseless", "--noiseless", "", "self-test without noise", true},
        {"fit.noise", "--noise", "0.002", "stddev of accuracy noise in the self-test"},
        {"fit.ipcs", "--fit-ipcs", "1,2,5,10,20,50,100,200", "self-test ipc grid"},

        {"plot.csv", "--csv", "", "input CSV"},
        {"plot.kind", "--kind", "line", "line | heatmap"},
        {"plot.x", "--x", "", "x column"},
        {"plot.y", "--y", "", "y column (heatmap: row column)"},
        {"plot.value", "--value", "", "heatmap cell column"},
        {"plot.series", "--series", "", "column that splits lines"},
        {"plot.log_x", "--log-x", "", "logarithmic x axis", true},
        {"plot.title", "--title", "", ""},
        {"plot.name", "--name", "plot", "output file stem"},
    };
    return table;
}

const OptionSpec& option(const std::string& key) {
    for (const auto& o : option_table()) {
        if (o.key == key) {
            return o;
        }
    }
    throw std::logic_error("unknown option key " + key);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == ',') {
            if (!cur.empty()) {
                out.push_back(cur);
            }
            cur.clear();
        } else if (ch != ' ') {
            cur += ch;
        }
    }
    if (!cur.empty()) {
        out.push_back(cur);
    }
    return out;
}

void Settings::set_flag(const std::string& key, const std::string& value) {
    given_[key] = Entry{value, "flag"};
}

void Settings::load_ini(const std::filesystem::path& path) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::read_ini(path.string(), tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw UsageError("config file: " + std::string(e.what()));
    }
    for (const auto& [section, body] : tree) {
        for (const auto& [name, node] : body) {
            const std::string key = section + "." + name;
            bool known = false;
            for (const auto& o : option_table()) {
                known = known || o.key == key;
            }
            if (!known) {
                throw UsageError(path.string() + ": unknown key '" + key + "'");
            }
            if (given_.count(key) == 0) {
                given_[key] = Entry{node.get_value<std::string>(), "config:" + path.filename().string()};
            }
        }
    }
}

void Settings::set_default(const std::string& key, const std::string& value) {
    option(key);
    defaults_[key] = value;
}

bool Settings::has(const std::string& key) const {
    return given_.count(key) > 0;
}

std::string Settings::text(const std::string& key) const {
    const auto& spec = option(key);
    auto it = given_.find(key);
    Entry e{spec.fallback, "default"};
    if (it != given_.end()) {
        e = it->second;
    } else if (auto d = defaults_.find(key); d != defaults_.end()) {
        e.value = d->second;
    }
    used_[key] = e;
    return e.value;
}

double Settings::number(const std::string& key) const {
    const std::string v = text(key);
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (v.empty() || *end != '\0' || !std::isfinite(d)) {
        throw UsageError(option(key).flag + ": expected a number, got '" + v + "'");
    }
    return d;
}

std::size_t Settings::count(const std::string& key) const {
    const double d = number(key);
    if (d < 0 || d != std::floor(d)) {
        throw UsageError(option(key).flag + ": expected a non-negative integer, got '" + text(key) + "'");
    }
    return static_cast<std::size_t>(d);
}

std::uint64_t Settings::u64(const std::string& key) const {
    const std::string v = text(key);
    char* end = nullptr;
    const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
    if (v.empty() || *end != '\0' || v[0] == '-') {
        throw UsageError(option(key).flag + ": expected an unsigned integer, got '" + v + "'");
    }
    return x;
}

bool Settings::flag(const std::string& key) const {
    const std::string v = text(key);
    return v == "1" || v == "true" || v == "yes" || v == "on";
}

std::vector<std::string> Settings::list(const std::string& key) const {
    return split_list(text(key));
}

std::vector<double> Settings::numbers(const std::string& key) const {
    std::vector<double> out;
    for (const auto& s : list(key)) {
        char* end = nullptr;
        const double d = std::strtod(s.c_str(), &end);
        if (*end != '\0' || !std::isfinite(d)) {
            throw UsageError(option(key).flag + ": bad list entry '" + s + "'");
        }
        out.push_back(d);
    }
    return out;
}

std::vector<std::size_t> Settings::counts(const std::string& key) const {
    std::vector<std::size_t> out;
    for (double d : numbers(key)) {
        if (d < 0 || d != std::floor(d)) {
            throw UsageError(option(key).flag + ": expected non-negative integers");
        }
        out.push_back(static_cast<std::size_t>(d));
    }
    return out;
}

nlohmann::json Settings::resolved() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, e] : used_) {
        j[k] = {{"value", e.value}, {"source", e.source}};
    }
    return j;
}

}  // namespace sld::cli
