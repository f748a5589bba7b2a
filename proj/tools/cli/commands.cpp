// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

#include "sld/bptt/learn_labels.hpp"
#include "sld/data/manifest.hpp"
#include "sld/data/sampling.hpp"
#include "sld/experiments/context.hpp"
#include "sld/experiments/drivers.hpp"
#include "sld/experiments/powerlaw.hpp"
#include "sld/experiments/records.hpp"
#include "sld/labels/generate.hpp"
#include "sld/labels/io.hpp"
#include "sld/labels/metrics.hpp"
#include "sld/labels/transforms.hpp"
#include "sld/nn/checkpoint.hpp"
#include "sld/nn/train.hpp"
#include "sld/util/csv.hpp"
#include "sld/util/error.hpp"
#include "sld/util/rng.hpp"
#include "sld/util/svg.hpp"

namespace sld::cli {
namespace fs = std::filesystem;
namespace ex = sld::experiments;

namespace {

// Seed derivation tags.
constexpr std::uint64_t kImageTag = 0x696d616765;
constexpr std::uint64_t kStudentTag = 0x73747564;
constexpr std::uint64_t kBpttTag = 0x62707474;
constexpr std::uint64_t kNoiseTag = 0x6e6f6973;

const std::vector<std::string> kData = {"data.root", "data.dataset", "data.train_size", "data.test_size"};
const std::vector<std::string> kModel = {"model.arch", "model.hidden", "model.depth", "model.width"};
const std::vector<std::string> kStudent = {"student.lr",         "student.momentum", "student.weight_decay",
                                           "student.max_epochs", "student.patience", "student.min_delta",
                                           "student.seeds"};
const std::vector<std::string> kExpert = {"expert.dir", "expert.epoch"};

std::vector<std::string> keys(std::initializer_list<std::vector<std::string>> groups) {
    std::vector<std::string> out;
    for (const auto& g : groups) {
        out.insert(out.end(), g.begin(), g.end());
    }
    return out;
}

struct Data {
    data::DatasetPair pair;
    nn::EvalSet test;
};

Data load_data(Session& s) {
    const auto& st = s.settings();
    const fs::path root = st.has("data.root") ? fs::path(st.text("data.root")) : data::data_root();
    if (!fs::is_directory(root)) {
        throw UsageError("data root not found: " + root.string());
    }
    Data d;
    d.pair = data::load_dataset(st.text("data.dataset"), root);
    if (const std::size_t n = st.count("data.train_size"); n > 0) {
        d.pair.train = d.pair.train.head(n);
    }
    if (const std::size_t n = st.count("data.test_size"); n > 0) {
        d.pair.test = d.pair.test.head(n);
    }
    d.pair.train.check_class_coverage();
    d.test = nn::EvalSet::from(d.pair.test);
    s.input_hash("dataset.train", data::hex64(d.pair.train.hash()));
    s.input_hash("dataset.test", data::hex64(d.pair.test.hash()));
    return d;
}

bool model_given(const Settings& st) {
    return std::any_of(kModel.begin(), kModel.end(), [&](const std::string& k) { return st.has(k); });
}

nn::ModelSpec model_spec(const Session& s, const data::Dataset& train, const nn::Checkpoint* expert = nullptr) {
    const auto& st = s.settings();
    if (expert != nullptr && !model_given(st)) {
        return expert->spec;
    }
    const std::string arch = st.text("model.arch");
    nn::ModelSpec spec;
    if (arch == "mlp") {
        spec = nn::ModelSpec::mlp(train.shape(), st.counts("model.hidden"), train.num_classes());
    } else if (arch == "convnet") {
        spec = nn::ModelSpec::convnet(train.shape(), st.count("model.depth"), st.count("model.width"),
                                      train.num_classes());
    } else {
        throw UsageError("--arch: expected mlp or convnet, got '" + arch + "'");
    }
    spec.validate();
    return spec;
}

nn::StudentConfig student_config(const Settings& st) {
    nn::StudentConfig c;
    c.lr = st.number("student.lr");
    c.momentum = st.number("student.momentum");
    c.weight_decay = st.number("student.weight_decay");
    c.max_epochs = st.count("student.max_epochs");
    c.patience = st.count("student.patience");
    c.min_delta = st.number("student.min_delta");
    c.validate();
    return c;
}

ex::StudyContext study(const Session& s, const Data& d, nn::ModelSpec spec) {
    ex::StudyContext ctx;
    ctx.train = &d.pair.train;
    ctx.test = &d.test;
    ctx.student_spec = std::move(spec);
    ctx.student = student_config(s.settings());
    const std::size_t n = s.settings().count("student.seeds");
    if (n == 0) {
        throw UsageError("--num-seeds must be at least 1");
    }
    for (std::size_t i = 0; i < n; ++i) {
        ctx.seeds.push_back(derive_seed(s.seed(), {kStudentTag, i}));
    }
    ctx.image_seed = derive_seed(s.seed(), {kImageTag});
    ctx.jobs = s.jobs();
    ctx.validate();
    return ctx;
}

fs::path existing(const std::string& p, const std::string& flag) {
    if (p.empty()) {
        throw UsageError(flag + " is required");
    }
    if (!fs::exists(p)) {
        throw UsageError(flag + ": not found: " + p);
    }
    return p;
}

ex::Run load_expert(Session& s, const fs::path& where) {
    if (fs::is_regular_file(where)) {
        s.input_file(where);
        return {nn::load_checkpoint(where)};
    }
    const fs::path dir = fs::is_directory(where / "checkpoints") ? where / "checkpoints" : where;
    ex::Run run = nn::load_run(dir);
    for (const auto& c : run) {
        s.input_file(nn::checkpoint_path(dir, c.epoch));
    }
    return run;
}

std::vector<ex::Run> load_experts(Session& s) {
    std::vector<ex::Run> runs;
    for (const auto& p : s.settings().list("expert.dir")) {
        runs.push_back(load_expert(s, existing(p, "--expert")));
    }
    if (runs.empty()) {
        throw UsageError("--expert is required");
    }
    return runs;
}

const nn::Checkpoint& pick(const Session& s, const ex::Run& run) {
    const auto& st = s.settings();
    if (st.has("expert.epoch")) {
        return nn::find_epoch(run, st.count("expert.epoch"));
    }
    if (run.size() == 1) {
        return run.front();
    }
    throw UsageError("--epoch is required: the expert run has " + std::to_string(run.size()) + " checkpoints");
}

std::vector<std::size_t> epochs_or_all(const Session& s, const ex::Run& run) {
    if (s.settings().has("grid.epochs")) {
        return s.settings().counts("grid.epochs");
    }
    std::vector<std::size_t> out;
    for (const auto& c : run) {
        out.push_back(c.epoch);
    }
    return out;
}

std::size_t single_ipc(const Session& s) {
    const auto v = s.settings().counts("grid.ipc");
    if (v.size() != 1) {
        throw UsageError("--ipc takes a single value for " + s.command());
    }
    return v.front();
}

std::vector<std::size_t> ipcs(const Session& s) {
    const auto v = s.settings().counts("grid.ipc");
    if (v.empty()) {
        throw UsageError("--ipc is empty");
    }
    return v;
}

void write_indices(const Session& s, const data::Dataset& train, const data::DistilledSet& set) {
    csv::Table t{{"index", "label"}, {}};
    for (std::size_t i : set.indices) {
        t.rows.push_back({std::to_string(i), std::to_string(train.label(i))});
    }
    csv::write(s.path("indices.csv"), t);
}

data::DistilledSet read_indices(const fs::path& file, const data::Dataset& train) {
    const csv::Table t = csv::read(file);
    data::DistilledSet set;
    set.num_classes = train.num_classes();
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const double v = t.number(r, "index");
        if (v < 0 || static_cast<std::size_t>(v) >= train.size()) {
            throw DataError(file.string() + ": row " + std::to_string(r) + " index out of range");
        }
        set.indices.push_back(static_cast<std::size_t>(v));
    }
    set.ipc = set.num_classes == 0 ? 0 : set.indices.size() / set.num_classes;
    return set;
}

void save_labels(const Session& s, const labels::SoftLabelSet& l) {
    labels::save(s.path("labels.sldl"), l);
    labels::export_csv(s.path("labels.csv"), l);
}

void print_summary(const std::vector<ex::Record>& recs) {
    for (const auto& sm : ex::summarize(recs)) {
        std::printf("%-12s ipc=%-4zu %-40s mean=%.4f sd=%.4f n=%zu\n", sm.key.arm.c_str(), sm.key.ipc,
                    sm.key.labels.c_str(), sm.mean, sm.stddev, sm.n);
    }
}

// ---- commands -------------------------------------------------------------

void train_expert(Session& s) {
    const auto& st = s.settings();
    Data d = load_data(s);
    const nn::ModelSpec spec = model_spec(s, d.pair.train);
    nn::TrainConfig cfg;
    cfg.lr = st.number("expert.lr");
    cfg.momentum = st.number("expert.momentum");
    cfg.weight_decay = st.number("expert.weight_decay");
    cfg.epochs = st.count("expert.epochs");
    cfg.batch_size = st.count("expert.batch");
    cfg.schedule.milestones = st.counts("expert.milestones");
    cfg.schedule.gamma = st.number("expert.gamma");
    cfg.seed = s.seed();
    cfg.validate();
    const fs::path dir = s.path("checkpoints");
    fs::create_directories(dir);
    s.write_text("dataset.json", data::to_json(data::describe(d.pair, st.text("data.root"))) + "\n");
    s.write_text("model.json", spec.to_json() + "\n");
    const auto run = nn::train_expert(d.pair.train, d.test, spec, cfg, [&](const nn::Checkpoint& c) {
        nn::save_checkpoint(nn::checkpoint_path(dir, c.epoch), c);
        std::printf("epoch %zu test_accuracy %.4f\n", c.epoch, c.test_accuracy);
        std::fflush(stdout);
    });
    csv::write(s.path("training_log.csv"), nn::training_log_table(run.log));
    s.note("final_test_accuracy", run.checkpoints.back().test_accuracy);
}

void gen_labels(Session& s) {
    const auto& st = s.settings();
    Data d = load_data(s);
    const auto runs = load_experts(s);
    const std::string mode = st.text("labels.mode");
    const std::size_t ipc = single_ipc(s);
    const auto set = data::sample_ipc(d.pair.train, ipc, derive_seed(s.seed(), {kImageTag}));
    const ad::Tensor images = d.pair.train.images(set.indices);
    const double tau = st.number("labels.temp");
    labels::SoftLabelSet l;
    if (mode == "single") {
        if (runs.size() != 1) {
            throw UsageError("--mode single takes one --expert, got " + std::to_string(runs.size()));
        }
        l = labels::gen_soft(pick(s, runs.front()), images, tau);
    } else if (mode == "ensemble") {
        std::vector<const nn::Checkpoint*> members;
        for (const auto& r : runs) {
            members.push_back(&pick(s, r));
        }
        l = labels::gen_ensemble(members, images, tau);
    } else {
        throw UsageError("--mode: expected single or ensemble, got '" + mode + "'");
    }
    if (const std::size_t k = st.count("labels.topk"); k > 0) {
        l = labels::topk_truncate(l, k);
    }
    if (const std::size_t i = st.count("labels.swap_i"); i > 0) {
        l = labels::swap_label(l, i);
    }
    save_labels(s, l);
    write_indices(s, d.pair.train, set);
    s.note("provenance", l.provenance);
    s.note("mean_entropy", labels::entropy(l).mean);
    std::printf("%zu rows, provenance %s\n", l.rows(), l.provenance.c_str());
}

void train_student(Session& s) {
    const auto& st = s.settings();
    const bool hard = st.flag("labels.hard");
    const bool have_labels = st.has("labels.file");
    if (hard == have_labels) {
        throw UsageError("give exactly one of --labels or --hard");
    }
    Data d = load_data(s);
    const auto ctx = study(s, d, model_spec(s, d.pair.train));
    ex::Distilled dist;
    labels::SoftLabelSet l;
    if (hard) {
        dist = ex::distill(ctx, single_ipc(s));
        l = labels::hard_labels(dist.labels, d.pair.train.num_classes());
    } else {
        const fs::path lf = existing(st.text("labels.file"), "--labels");
        const fs::path idx = existing(
            st.has("labels.indices") ? st.text("labels.indices") : (lf.parent_path() / "indices.csv").string(),
            "--indices");
        s.input_file(lf);
        s.input_file(idx);
        l = labels::load(lf);
        dist = ex::distill_rows(ctx, read_indices(idx, d.pair.train));
    }
    ex::Record key;
    key.experiment = "train-student";
    key.dataset = d.pair.train.name();
    key.arm = hard ? "hard" : "labels";
    const auto recs = ex::run_arms(ctx, {ex::make_arm(key, dist, l)});
    ex::write_records(s.out(), "students", recs);
    print_summary(recs);
}

void baseline(Session& s) {
    Data d = load_data(s);
    const auto runs = load_experts(s);
    const auto& run = runs.front();
    const auto ctx = study(s, d, model_spec(s, d.pair.train, &run.front()));
    const auto recs = ex::run_baseline(ctx, run, ipcs(s), epochs_or_all(s, run), s.settings().number("labels.temp"));
    ex::write_records(s.out(), "baseline", recs);
    print_summary(recs);
}

void epoch_sweep(Session& s) {
    Data d = load_data(s);
    const auto runs = load_experts(s);
    const auto& run = runs.front();
    const auto ctx = study(s, d, model_spec(s, d.pair.train, &run.front()));
    std::vector<ex::Record> all;
    csv::Table curve{{"ipc", "epoch", "mean", "stddev", "expert_accuracy", "mean_entropy"}, {}};
    csv::Table best{{"ipc", "best_epoch", "best_accuracy"}, {}};
    for (std::size_t ipc : ipcs(s)) {
        const auto sw = ex::epoch_sweep(ctx, run, ipc, epochs_or_all(s, run));
        all.insert(all.end(), sw.records.begin(), sw.records.end());
        for (const auto& p : sw.curve) {
            curve.rows.push_back({std::to_string(ipc), std::to_string(p.epoch), csv::num(p.mean), csv::num(p.stddev),
                                  csv::num(p.expert_accuracy), csv::num(p.mean_entropy)});
        }
        best.rows.push_back({std::to_string(ipc), std::to_string(sw.best_epoch), csv::num(sw.best_accuracy)});
        std::printf("ipc %zu best epoch %zu accuracy %.4f\n", ipc, sw.best_epoch, sw.best_accuracy);
    }
    ex::write_records(s.out(), "epoch_sweep", all);
    csv::write(s.path("epoch_sweep_curve.csv"), curve);
    csv::write(s.path("epoch_sweep_best.csv"), best);
}

void grid_temp_epoch(Session& s) {
    Data d = load_data(s);
    const auto runs = load_experts(s);
    const auto& run = runs.front();
    const auto ctx = study(s, d, model_spec(s, d.pair.train, &run.front()));
    std::vector<ex::Record> all;
    csv::Table grid{{"ipc", "epoch", "temperature", "mean"}, {}};
    csv::Table best{{"ipc", "best_epoch", "best_temperature", "best_accuracy"}, {}};
    for (std::size_t ipc : ipcs(s)) {
        const auto g = ex::temp_epoch_grid(ctx, run, ipc, epochs_or_all(s, run), s.settings().numbers("grid.temps"));
        all.insert(all.end(), g.records.begin(), g.records.end());
        for (std::size_t e = 0; e < g.epochs.size(); ++e) {
            for (std::size_t t = 0; t < g.temperatures.size(); ++t) {
                grid.rows.push_back({std::to_string(ipc), std::to_string(g.epochs[e]), csv::num(g.temperatures[t]),
                                     csv::num(g.mean[e][t])});
            }
        }
        best.rows.push_back({std::to_string(ipc), std::to_string(g.best_epoch), csv::num(g.best_temperature),
                             csv::num(g.best_accuracy)});
        std::printf("ipc %zu best epoch %zu temperature %g accuracy %.4f\n", ipc, g.best_epoch, g.best_temperature,
                    g.best_accuracy);
    }
    ex::write_records(s.out(), "grid_temp_epoch", all);
    csv::write(s.path("grid_temp_epoch_mean.csv"), grid);
    csv::write(s.path("grid_temp_epoch_best.csv"), best);
}

void swap_test(Session& s) {
    Data d = load_data(s);
    const auto runs = load_experts(s);
    const auto& expert = pick(s, runs.front());
    const auto ctx = study(s, d, model_spec(s, d.pair.train, &expert));
    const std::size_t c = d.pair.train.num_classes();
    std::vector<std::size_t> is = s.settings().counts("grid.i");
    if (is.empty()) {
        std::set<std::size_t> def{1, 2, 5, c / 2, c};
        for (std::size_t i : def) {
            if (i >= 1 && i <= c) {
                is.push_back(i);
            }
        }
    }
    std::vector<ex::Record> all;
    csv::Table curve{{"ipc", "i", "relative", "stddev"}, {}};
    for (std::size_t ipc : ipcs(s)) {
        const auto t = ex::swap_test(ctx, expert, ipc, is);
        all.insert(all.end(), t.records.begin(), t.records.end());
        for (const auto& p : t.curve) {
            curve.rows.push_back({std::to_string(ipc), std::to_string(p.i), csv::num(p.relative), csv::num(p.stddev)});
            std::printf("ipc %zu i %zu relative %.4f\n", ipc, p.i, p.relative);
        }
    }
    ex::write_records(s.out(), "swap_test", all);
    csv::write(s.path("swap_test_curve.csv"), curve);
}

nlohmann::json fit_json(const std::optional<ex::PowerLawFit>& f) {
    if (!f) {
        return nullptr;
    }
    return {{"a", f->a}, {"b", f->b}, {"c", f->c}, {"s", f->s}, {"rmse", f->rmse},
            {"ipc_min", f->ipc_min}, {"ipc_max", f->ipc_max}};
}

void scaling_planted(Session& s) {
    const auto& st = s.settings();
    const auto p = st.numbers("fit.planted");
    if (p.size() != 4) {
        throw UsageError("--planted expects a,b,c,s");
    }
    ex::PowerLawFit law;
    law.a = p[0];
    law.b = p[1];
    law.c = p[2];
    law.s = p[3];
    const auto grid = st.numbers("fit.ipcs");
    auto hard = ex::sample_curve(law, grid, false);
    auto soft = ex::sample_curve(law, grid, true);
    if (!st.flag("fit.noiseless")) {
        Rng rng(derive_seed(s.seed(), {kNoiseTag}));
        const double sd = st.number("fit.noise");
        for (auto* curve : {&hard, &soft}) {
            for (auto& pt : *curve) {
                pt.accuracy += sd * rng.normal();
            }
        }
    }
    const auto fit = ex::fit_power_law(hard, soft);
    csv::Table t{{"ipc", "hard", "soft"}, {}};
    for (std::size_t i = 0; i < hard.size(); ++i) {
        t.rows.push_back({csv::num(hard[i].ipc), csv::num(hard[i].accuracy), csv::num(soft[i].accuracy)});
    }
    csv::write(s.path("planted_curve.csv"), t);
    nlohmann::json j{{"planted", {{"a", law.a}, {"b", law.b}, {"c", law.c}, {"s", law.s}}}, {"fit", fit_json(fit)}};
    if (!fit) {
        s.write_text("fit.json", j.dump(2) + "\n");
        throw NumericError("power-law fit did not converge on the planted curve");
    }
    const double rel[4] = {std::abs(fit->a - law.a) / std::abs(law.a), std::abs(fit->b - law.b) / std::abs(law.b),
                           std::abs(fit->c - law.c) / std::abs(law.c), std::abs(fit->s - law.s) / std::abs(law.s)};
    j["relative_error"] = {{"a", rel[0]}, {"b", rel[1]}, {"c", rel[2]}, {"s", rel[3]}};
    s.write_text("fit.json", j.dump(2) + "\n");
    s.note("fit", j);
    std::printf("a %.6g (rel %.2e)  b %.6g (rel %.2e)  c %.6g (rel %.2e)  s %.6g (rel %.2e)  rmse %.3e\n", fit->a,
                rel[0], fit->b, rel[1], fit->c, rel[2], fit->s, rel[3], fit->rmse);
}

void scaling_law(Session& s) {
    if (s.settings().has("fit.planted")) {
        scaling_planted(s);
        return;
    }
    Data d = load_data(s);
    const auto runs = load_experts(s);
    const auto& expert = pick(s, runs.front());
    const auto ctx = study(s, d, model_spec(s, d.pair.train, &expert));
    auto ks = s.settings().counts("grid.k");
    if (ks.empty()) {
        ks = ex::default_k_grid(d.pair.train.num_classes());
    }
    const auto law = ex::scaling_law(ctx, expert, ipcs(s), ks);
    ex::write_records(s.out(), "scaling_law", law.records);
    csv::Table curve{{"ipc", "labels", "k", "mean"}, {}};
    for (const auto& p : law.hard) {
        curve.rows.push_back({csv::num(p.ipc), "hard", "", csv::num(p.accuracy)});
    }
    for (const auto& [k, pts] : law.soft_by_k) {
        for (const auto& p : pts) {
            curve.rows.push_back({csv::num(p.ipc), "soft", std::to_string(k), csv::num(p.accuracy)});
        }
    }
    csv::write(s.path("scaling_law_curve.csv"), curve);
    nlohmann::json j{{"fit", fit_json(law.fit)}};
    nlohmann::json sk = nlohmann::json::object();
    for (const auto& [k, v] : law.s_by_k) {
        sk[std::to_string(k)] = v;
    }
    j["s_by_k"] = sk;
    if (!law.fit) {
        j["note"] = "fit refused: the hard-label curve does not rise or the solver did not converge";
    }
    s.write_text("fit.json", j.dump(2) + "\n");
    s.note("fit", j);
    std::printf("%s\n", j.dump().c_str());
}

void pareto(Session& s) {
    Data d = load_data(s);
    const auto runs = load_experts(s);
    const auto& run = runs.front();
    const auto ctx = study(s, d, model_spec(s, d.pair.train, &run.front()));
    const auto f = ex::pareto_front(ctx, run, epochs_or_all(s, run), ipcs(s));
    ex::write_records(s.out(), "pareto", f.records);
    csv::Table curves{{"epoch", "ipc", "mean"}, {}};
    for (const auto& [e, c] : f.curve_by_epoch) {
        for (std::size_t i = 0; i < f.ipcs.size(); ++i) {
            curves.rows.push_back({std::to_string(e), std::to_string(f.ipcs[i]), csv::num(c[i])});
        }
    }
    csv::Table env{{"ipc", "envelope", "argmax_epoch"}, {}};
    for (std::size_t i = 0; i < f.ipcs.size(); ++i) {
        env.rows.push_back({std::to_string(f.ipcs[i]), csv::num(f.envelope[i]), std::to_string(f.argmax_epoch[i])});
        std::printf("ipc %zu envelope %.4f argmax epoch %zu\n", f.ipcs[i], f.envelope[i], f.argmax_epoch[i]);
    }
    csv::write(s.path("pareto_curves.csv"), curves);
    csv::write(s.path("pareto_envelope.csv"), env);
}

void zero_shot(Session& s) {
    Data d = load_data(s);
    const auto runs = load_experts(s);
    const auto& expert = pick(s, runs.front());
    const auto ctx = study(s, d, model_spec(s, d.pair.train, &expert));
    const std::size_t cls = s.settings().count("grid.class");
    std::vector<ex::Record> all;
    csv::Table t{{"ipc", "class", "arm", "class_accuracy", "accuracy"}, {}};
    for (std::size_t ipc : ipcs(s)) {
        const auto z = ex::zero_shot(ctx, expert, ipc, cls);
        all.insert(all.end(), z.records.begin(), z.records.end());
        const std::pair<const char*, ex::ZeroShotArm> arms[] = {
            {"control", z.control}, {"remove_image", z.remove_image}, {"remove_label", z.remove_label}};
        for (const auto& [name, a] : arms) {
            t.rows.push_back({std::to_string(ipc), std::to_string(cls), name, csv::num(a.class_accuracy),
                              csv::num(a.accuracy)});
            std::printf("ipc %zu class %zu %-13s class_accuracy %.4f accuracy %.4f\n", ipc, cls, name,
                        a.class_accuracy, a.accuracy);
        }
        if (z.class_never_predicted) {
            std::printf("warning: class %zu is never the expert's argmax on the distilled images\n", cls);
        }
    }
    ex::write_records(s.out(), "zero_shot", all);
    csv::write(s.path("zero_shot_arms.csv"), t);
}

void ensemble_compare(Session& s) {
    Data d = load_data(s);
    const auto runs = load_experts(s);
    if (runs.size() < 2) {
        throw UsageError("--expert needs at least two runs (the first is the single expert)");
    }
    std::vector<const nn::Checkpoint*> members;
    for (const auto& r : runs) {
        members.push_back(&pick(s, r));
    }
    const auto ctx = study(s, d, model_spec(s, d.pair.train, members.front()));
    std::vector<ex::Record> all;
    csv::Table t{{"ipc", "single", "ensemble", "delta"}, {}};
    for (std::size_t ipc : ipcs(s)) {
        const auto c = ex::ensemble_compare(ctx, *members.front(), members, ipc, s.settings().number("labels.temp"));
        all.insert(all.end(), c.records.begin(), c.records.end());
        t.rows.push_back({std::to_string(ipc), csv::num(c.single), csv::num(c.ensemble), csv::num(c.delta)});
        std::printf("ipc %zu single %.4f ensemble %.4f delta %+.4f\n", ipc, c.single, c.ensemble, c.delta);
    }
    ex::write_records(s.out(), "ensemble", all);
    csv::write(s.path("ensemble_delta.csv"), t);
}

void bptt_distill(Session& s) {
    const auto& st = s.settings();
    Data d = load_data(s);
    const nn::ModelSpec spec = model_spec(s, d.pair.train);
    const std::size_t ipc = single_ipc(s);
    bptt::BpttConfig cfg;
    cfg.unroll_steps = st.count("bptt.unroll");
    cfg.window = st.count("bptt.window");
    cfg.inner_lr = st.number("bptt.inner_lr");
    cfg.label_lr = st.number("bptt.label_lr");
    cfg.outer_iters = st.count("bptt.outer_iters");
    cfg.target_batch = st.count("bptt.target_batch");
    cfg.distilled_batch = st.count("bptt.distilled_batch");
    cfg.clip_norm = st.number("bptt.clip");
    cfg.init_scale = st.number("bptt.init_scale");
    cfg.cosine = st.flag("bptt.cosine");
    cfg.seed = derive_seed(s.seed(), {kBpttTag});
    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        throw UsageError(e.what());
    }
    const auto set = data::sample_ipc(d.pair.train, ipc, derive_seed(s.seed(), {kImageTag}));
    const ad::Tensor images = d.pair.train.images(set.indices);
    const auto y = d.pair.train.labels(set.indices);
    const auto res = bptt::learn_labels(d.pair.train, images, y, spec, cfg);
    save_labels(s, res.labels);
    write_indices(s, d.pair.train, set);
    csv::write(s.path("trace.csv"), bptt::trace_table(res.trace));
    s.note("mean_entropy", labels::entropy(res.labels).mean);
    if (!res.trace.empty()) {
        s.note("final_target_loss", res.trace.back().target_loss);
    }
    std::printf("learned %zu label rows, mean entropy %.4f\n", res.labels.rows(), labels::entropy(res.labels).mean);
    if (st.flag("bptt.evaluate")) {
        const auto ctx = study(s, d, spec);
        const auto dist = ex::distill_rows(ctx, set);
        ex::Record key;
        key.experiment = "bptt-distill";
        key.dataset = d.pair.train.name();
        key.arm = "hard";
        std::vector<ex::Arm> arms{ex::make_arm(key, dist, labels::hard_labels(y, d.pair.train.num_classes()))};
        key.arm = "bptt";
        arms.push_back(ex::make_arm(key, dist, res.labels));
        const auto recs = ex::run_arms(ctx, arms);
        ex::write_records(s.out(), "students", recs);
        print_summary(recs);
    }
}

void compare_jsd(Session& s) {
    const auto& st = s.settings();
    Data d = load_data(s);
    const fs::path lf = existing(st.text("labels.file"), "--labels");
    const fs::path idx = existing(
        st.has("labels.indices") ? st.text("labels.indices") : (lf.parent_path() / "indices.csv").string(),
        "--indices");
    s.input_file(lf);
    s.input_file(idx);
    const auto learned = labels::load(lf);
    const auto set = read_indices(idx, d.pair.train);
    const auto runs = load_experts(s);
    std::vector<const ex::Run*> ptrs;
    for (const auto& r : runs) {
        ptrs.push_back(&r);
    }
    const auto cmp = ex::compare_jsd(learned, ptrs, d.pair.train.images(set.indices), epochs_or_all(s, runs.front()),
                                     st.number("labels.temp"));
    const auto& nj = cmp.normalized;
    csv::Table t{{"row", "epoch", "jsd", "normalized"}, {}};
    for (std::size_t r = 0; r < nj.raw.dim(0); ++r) {
        for (std::size_t e = 0; e < nj.epochs.size(); ++e) {
            t.rows.push_back({std::to_string(r), std::to_string(nj.epochs[e]), csv::num(nj.raw.row(r)[e]),
                              csv::num(nj.normalized.row(r)[e])});
        }
    }
    csv::write(s.path("jsd.csv"), t);
    csv::Table h{{"epoch", "images"}, {}};
    for (const auto& [e, n] : cmp.argmin_histogram) {
        h.rows.push_back({std::to_string(e), std::to_string(n)});
    }
    csv::write(s.path("jsd_argmin.csv"), h);
    s.note("mode_epoch", cmp.mode_epoch);
    s.note("flagged_rows", nj.flagged.size());
    std::printf("closest expert epoch (mode) %zu, %zu constant rows flagged\n", cmp.mode_epoch, nj.flagged.size());
}

void select_ce(Session& s) {
    Data d = load_data(s);
    const auto runs = load_experts(s);
    const auto& expert = pick(s, runs.front());
    const auto ctx = study(s, d, model_spec(s, d.pair.train, &expert));
    std::vector<ex::Record> all;
    csv::Table t{{"ipc", "selection", "mean"}, {}};
    for (std::size_t ipc : ipcs(s)) {
        const auto r = ex::select_ce_study(ctx, expert, ipc, s.settings().counts("grid.quantiles"));
        all.insert(all.end(), r.records.begin(), r.records.end());
        t.rows.push_back({std::to_string(ipc), "random", csv::num(r.random)});
        std::printf("ipc %zu random %.4f\n", ipc, r.random);
        for (const auto& [q, m] : r.by_quantile) {
            t.rows.push_back({std::to_string(ipc), "q" + std::to_string(q), csv::num(m)});
            std::printf("ipc %zu q%zu %.4f\n", ipc, q, m);
        }
    }
    ex::write_records(s.out(), "select_ce", all);
    csv::write(s.path("select_ce_mean.csv"), t);
}

void plot(Session& s) {
    const auto& st = s.settings();
    const fs::path file = existing(st.text("plot.csv"), "--csv");
    s.input_file(file);
    const csv::Table t = csv::read(file);
    const std::string kind = st.text("plot.kind");
    const std::string x = st.text("plot.x");
    const std::string y = st.text("plot.y");
    if (x.empty() || y.empty()) {
        throw UsageError("--x and --y are required");
    }
    std::string svg;
    if (kind == "line") {
        svg::LineChart chart;
        chart.title = st.text("plot.title");
        chart.x_label = x;
        chart.y_label = y;
        chart.log_x = st.flag("plot.log_x");
        const std::string by = st.text("plot.series");
        std::map<std::string, std::size_t> slot;
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            const std::string name = by.empty() ? y : t.text(r, by);
            auto [it, fresh] = slot.emplace(name, chart.series.size());
            if (fresh) {
                chart.series.push_back({by.empty() ? y : by + "=" + name, {}, {}});
            }
            chart.series[it->second].x.push_back(t.number(r, x));
            chart.series[it->second].y.push_back(t.number(r, y));
        }
        for (auto& ser : chart.series) {
            std::vector<std::size_t> order(ser.x.size());
            for (std::size_t i = 0; i < order.size(); ++i) {
                order[i] = i;
            }
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ser.x[a] < ser.x[b]; });
            svg::Series sorted{ser.name, {}, {}};
            for (std::size_t i : order) {
                sorted.x.push_back(ser.x[i]);
                sorted.y.push_back(ser.y[i]);
            }
            ser = std::move(sorted);
        }
        svg = svg::render(chart);
    } else if (kind == "heatmap") {
        const std::string v = st.text("plot.value");
        if (v.empty()) {
            throw UsageError("--value is required for heatmaps");
        }
        svg::Heatmap map;
        map.title = st.text("plot.title");
        map.x_label = x;
        map.y_label = y;
        std::map<std::string, std::size_t> cols;
        std::map<std::string, std::size_t> rows;
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            if (cols.emplace(t.text(r, x), map.x_ticks.size()).second) {
                map.x_ticks.push_back(t.text(r, x));
            }
            if (rows.emplace(t.text(r, y), map.y_ticks.size()).second) {
                map.y_ticks.push_back(t.text(r, y));
            }
        }
        map.values.assign(map.y_ticks.size(), std::vector<double>(map.x_ticks.size(), 0.0));
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            map.values[rows[t.text(r, y)]][cols[t.text(r, x)]] = t.number(r, v);
        }
        svg = svg::render(map);
    } else {
        throw UsageError("--kind: expected line or heatmap, got '" + kind + "'");
    }
    const std::string name = st.text("plot.name") + ".svg";
    s.write_text(name, svg);
    std::printf("wrote %s\n", s.path(name).string().c_str());
}

}  // namespace

const std::vector<Command>& commands() {
    const std::vector<std::string> expert_train = {"expert.lr",     "expert.momentum", "expert.weight_decay",
                                                   "expert.epochs", "expert.batch",    "expert.milestones",
                                                   "expert.gamma"};
    const std::vector<std::string> bptt = {"bptt.unroll",          "bptt.window",     "bptt.inner_lr",
                                           "bptt.label_lr",        "bptt.outer_iters", "bptt.target_batch",
                                           "bptt.distilled_batch", "bptt.clip",       "bptt.init_scale",
                                           "bptt.cosine",          "bptt.evaluate"};
    static const std::vector<Command> table = {
        {"train-expert", "train an expert and save a checkpoint per epoch", keys({kData, kModel, expert_train}), {},
         true, train_expert},
        {"gen-labels", "generate soft labels for a sampled distilled set",
         keys({kData, kExpert, {"labels.mode", "labels.temp", "labels.topk", "labels.swap_i", "grid.ipc"}}),
         {{"grid.ipc", "10"}}, true, gen_labels},
        {"train-student", "train students on a label file or on hard labels",
         keys({kData, kModel, kStudent, {"labels.file", "labels.indices", "labels.hard", "grid.ipc"}}),
         {{"grid.ipc", "10"}}, true, train_student},
        {"baseline", "hard labels and soft labels per expert epoch",
         keys({kData, kModel, kStudent, {"expert.dir", "grid.ipc", "grid.epochs", "labels.temp"}}), {}, true,
         baseline},
        {"epoch-sweep", "student accuracy per expert epoch",
         keys({kData, kModel, kStudent, {"expert.dir", "grid.ipc", "grid.epochs"}}), {}, true, epoch_sweep},
        {"grid-temp-epoch", "joint temperature and epoch grid",
         keys({kData, kModel, kStudent, {"expert.dir", "grid.ipc", "grid.epochs", "grid.temps"}}), {{"grid.ipc", "10"}},
         true, grid_temp_epoch},
        {"swap-test", "swap rank i with the last rank", keys({kData, kModel, kStudent, kExpert, {"grid.ipc", "grid.i"}}),
         {{"grid.ipc", "10"}}, true, swap_test},
        {"scaling-law", "top-k scaling curves and power-law fit (or --planted self-test)",
         keys({kData, kModel, kStudent, kExpert,
               {"grid.ipc", "grid.k", "fit.planted", "fit.noiseless", "fit.noise", "fit.ipcs"}}),
         {}, true, scaling_law},
        {"pareto", "accuracy envelope over experts and budgets",
         keys({kData, kModel, kStudent, {"expert.dir", "grid.ipc", "grid.epochs"}}), {}, true, pareto},
        {"zero-shot", "remove one class's images or its label mass",
         keys({kData, kModel, kStudent, kExpert, {"grid.ipc", "grid.class"}}), {{"grid.ipc", "1"}}, true, zero_shot},
        {"ensemble-compare", "ensemble labels against the first expert alone",
         keys({kData, kModel, kStudent, kExpert, {"grid.ipc", "labels.temp"}}), {{"grid.ipc", "10"}}, true,
         ensemble_compare},
        {"bptt-distill", "learn labels by truncated unrolled differentiation",
         keys({kData, kModel, kStudent, bptt, {"grid.ipc"}}), {{"grid.ipc", "1"}}, true, bptt_distill},
        {"compare-jsd", "locate the expert epoch closest to a label file",
         keys({kData, {"expert.dir", "grid.epochs", "labels.file", "labels.indices", "labels.temp"}}), {}, true,
         compare_jsd},
        {"select-ce", "distilled images chosen by expert cross-entropy decile",
         keys({kData, kModel, kStudent, kExpert, {"grid.ipc", "grid.quantiles"}}), {{"grid.ipc", "10"}}, true,
         select_ce},
        {"plot", "render a CSV as an SVG line chart or heatmap",
         {"plot.csv", "plot.kind", "plot.x", "plot.y", "plot.value", "plot.series", "plot.log_x", "plot.title",
          "plot.name"},
         {}, false, plot},
    };
    return table;
}

}  // namespace sld::cli
