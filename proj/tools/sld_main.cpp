// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0
//
// sld: command-line front end. Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <cstdio>
#include <map>
#include <memory>

#include <CLI11.hpp>

#include "cli/commands.hpp"
#include "sld/util/error.hpp"

namespace {

constexpr int kUsage = 2;
constexpr int kFailure = 1;

}  // namespace

int main(int argc, char** argv) {
    using namespace sld::cli;
    CLI::App app{"soft-label dataset distillation toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    struct Bound {
        const Command* command = nullptr;
        CLI::App* app = nullptr;
        std::string seed;
        std::string out;
        std::string config;
        std::map<std::string, std::string> values;
        std::map<std::string, CLI::Option*> options;
    };
    std::vector<std::unique_ptr<Bound>> bound;
    for (const Command& c : commands()) {
        auto b = std::make_unique<Bound>();
        b->command = &c;
        b->app = app.add_subcommand(c.name, c.help);
        auto* seed = b->app->add_option("--seed", b->seed, "master seed (determines all randomness)");
        if (c.needs_seed) {
            seed->required();
        }
        b->app->add_option("--out", b->out, "run directory (all outputs go here)")->required();
        b->app->add_option("--config", b->config, "INI config file; flags take precedence");
        std::vector<std::string> ks = c.keys;
        ks.insert(ks.begin(), "run.jobs");
        for (const auto& k : ks) {
            const OptionSpec& o = option(k);
            if (o.is_switch) {
                b->options[k] = b->app->add_flag(o.flag, o.help);
            } else {
                std::string help = o.help;
                if (!o.fallback.empty()) {
                    help += help.empty() ? "" : " ";
                    help += "[" + o.fallback + "]";
                }
                b->options[k] = b->app->add_option(o.flag, b->values[k], help);
            }
        }
        bound.push_back(std::move(b));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kUsage;
    }

    Bound* b = nullptr;
    for (auto& x : bound) {
        if (x->app->parsed()) {
            b = x.get();
        }
    }

    std::unique_ptr<Session> session;
    try {
        Settings settings;
        for (const auto& [k, opt] : b->options) {
            if (opt->count() > 0) {
                settings.set_flag(k, option(k).is_switch ? "1" : b->values[k]);
            }
        }
        if (!b->config.empty()) {
            if (!std::filesystem::is_regular_file(b->config)) {
                throw UsageError("--config: not found: " + b->config);
            }
            settings.load_ini(b->config);
        }
        for (const auto& [k, v] : b->command->defaults) {
            settings.set_default(k, v);
        }
        std::uint64_t seed = 0;
        if (!b->seed.empty()) {
            char* end = nullptr;
            seed = std::strtoull(b->seed.c_str(), &end, 10);
            if (*end != '\0' || b->seed[0] == '-') {
                throw UsageError("--seed: expected an unsigned integer, got '" + b->seed + "'");
            }
        }
        std::vector<std::string> args(argv, argv + argc);
        session = std::make_unique<Session>(b->command->name, args, b->out, seed, std::move(settings));
        session->settings().count("run.jobs");
        for (const auto& k : b->command->keys) {
            session->settings().text(k);  // log the full resolved config
        }
        if (!b->config.empty()) {
            session->input_file(b->config);
        }
        session->begin();
        b->command->run(*session);
        session->finish("ok");
        return 0;
    } catch (const UsageError& e) {
        std::fprintf(stderr, "sld %s: %s\n", b->command->name.c_str(), e.what());
        if (session) {
            session->finish(std::string("usage error: ") + e.what());
        }
        return kUsage;
    } catch (const sld::ConfigError& e) {
        std::fprintf(stderr, "sld %s: %s\n", b->command->name.c_str(), e.what());
        if (session) {
            session->finish(std::string("config error: ") + e.what());
        }
        return kUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "sld %s: error: %s\n", b->command->name.c_str(), e.what());
        if (session) {
            session->finish(std::string("failed: ") + e.what());
        }
        return kFailure;
    }
}
