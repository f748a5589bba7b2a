// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli/session.hpp"

#include <chrono>
#include <ctime>

#include "sld/data/manifest.hpp"
#include "sld/util/csv.hpp"
#include "sld/util/rng.hpp"
#include "sld/util/worker_pool.hpp"

namespace sld::cli {
namespace {

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

std::string hash_file(const std::filesystem::path& file) {
    const std::string bytes = csv::read_file(file);
    return data::hex64(fnv1a64(bytes.data(), bytes.size()));
}

Session::Session(std::string command, std::vector<std::string> argv, std::filesystem::path out, std::uint64_t seed,
                 Settings settings)
    : command_(std::move(command)), argv_(std::move(argv)), out_(std::move(out)), seed_(seed),
      settings_(std::move(settings)) {}

std::size_t Session::jobs() const {
    const std::size_t j = settings_.count("run.jobs");
    return j == 0 ? default_jobs() : j;
}

std::filesystem::path Session::path(const std::string& name) const {
    return out_ / name;
}

void Session::write_text(const std::string& name, const std::string& text) const {
    csv::write_file_atomic(path(name), text);
}

void Session::input_file(const std::filesystem::path& file) {
    inputs_[file.string()] = hash_file(file);
}

void Session::input_hash(const std::string& name, const std::string& hex) {
    inputs_[name] = hex;
}

void Session::note(const std::string& key, nlohmann::json value) {
    notes_[key] = std::move(value);
}

void Session::begin() {
    std::filesystem::create_directories(out_);
    started_ = utc_now();
    write_manifest();
}

void Session::finish(const std::string& status) {
    finished_ = utc_now();
    status_ = status;
    write_manifest();
}

void Session::write_manifest() const {
    nlohmann::json m;
    m["command"] = command_;
    m["argv"] = argv_;
    m["seed"] = std::to_string(seed_);
    m["config"] = settings_.resolved();
    m["inputs"] = inputs_;
    m["results"] = notes_;
    m["version"] = kVersion;
    m["started_at"] = started_;
    m["finished_at"] = finished_.empty() ? nlohmann::json() : nlohmann::json(finished_);
    m["status"] = status_;
    csv::write_file_atomic(out_ / "manifest.json", m.dump(2) + "\n");
}

}  // namespace sld::cli
