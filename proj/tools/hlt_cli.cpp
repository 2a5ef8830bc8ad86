// =====================================================================
// hlt-cli: experiment driver for the Hamiltonian learning tomography
// library. Each verb runs one experiment kind from a key = value config
// file and writes a CSV plus JSON manifest into --out.
// =====================================================================

#include <cstdio>
#include <exception>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hlt/experiment.hpp"

namespace {

// kinds each verb will accept from the config file
const std::map<std::string, std::vector<hlt::ExperimentKind>> kVerbKinds = {
    {"hlt", {hlt::ExperimentKind::hlt_sweep, hlt::ExperimentKind::eigen_recovery}},
    {"qst", {hlt::ExperimentKind::qst_sweep}},
    {"oracle", {hlt::ExperimentKind::error_oracle}},
    {"converge", {hlt::ExperimentKind::convergence}},
    {"ghz", {hlt::ExperimentKind::ghz_study}},
    {"verify-subsystems", {hlt::ExperimentKind::subsystem_verify}},
};

int run_verb(const std::string& verb, const std::string& config_path,
             const std::string& out_dir, std::uint64_t seed_base, bool resume,
             int threads) {
    hlt::ExperimentConfig config;
    try {
        config = hlt::load_config_file(config_path);
        const auto& allowed = kVerbKinds.at(verb);
        bool ok = false;
        for (auto kind : allowed) ok = ok || kind == config.kind;
        if (!ok) {
            std::fprintf(stderr, "error: config kind %s does not match verb %s\n",
                         hlt::to_string(config.kind).c_str(), verb.c_str());
            return 1;
        }
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return 1;
    }

    hlt::RunOptions options;
    options.threads = threads;
    options.seed_base = seed_base;
    if (resume) options.completed = hlt::completed_keys(config, out_dir);

    try {
        hlt::RunRecord record = hlt::run_experiment(config, options);
        hlt::write_record(record, out_dir);
        std::printf("%s: %zu rows (%zu resumed), %d failed, %.1f s\n",
                    hlt::to_string(config.kind).c_str(), record.rows.size(),
                    options.completed.size(), record.failures, record.seconds);
        return record.failures > 0 ? 2 : 0;
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return 2;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hamiltonian learning tomography experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "runs";
    std::uint64_t seed_base = 0;
    bool resume = false;
    int threads = 1;

    std::vector<CLI::App*> verbs;
    for (const auto& [name, kinds] : kVerbKinds) {
        CLI::App* sub = app.add_subcommand(
            name, "run a " + hlt::to_string(kinds.front()) + " experiment");
        sub->add_option("--config", config_path, "experiment config file")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed-base", seed_base, "offset added to every seed");
        sub->add_flag("--resume", resume, "skip grid points already in the output");
        sub->add_option("--threads", threads, "Jacobian worker threads")
            ->check(CLI::PositiveNumber);
        verbs.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    for (CLI::App* sub : verbs) {
        if (sub->parsed()) {
            return run_verb(sub->get_name(), config_path, out_dir, seed_base, resume,
                            threads);
        }
    }
    return 1;
}
