// Experiment harness: config-driven runs, sweeps, audits, and instance
// analysis reports.  Exit codes: 0 success, 1 configuration error,
// 2 invariant failure, 3 runtime error.
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "pairelim/analysis.hpp"
#include "pairelim/config.hpp"
#include "pairelim/experiment.hpp"

namespace {

using namespace pairelim;

std::string resolve_path(const std::string& path, const std::string& out_dir) {
    if (path.empty() || out_dir.empty()) return path;
    if (std::filesystem::path(path).is_absolute()) return path;
    return (std::filesystem::path(out_dir) / path).string();
}

// Empty path = stdout.
void write_report(const std::string& path, const std::string& out_dir,
                  const std::function<void(std::ostream&)>& writer) {
    const std::string full = resolve_path(path, out_dir);
    if (full.empty()) {
        writer(std::cout);
        return;
    }
    const std::filesystem::path parent = std::filesystem::path(full).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(full, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + full);
    writer(out);
}

int dispatch(const std::string& mode, const Config& cfg, std::uint64_t seed, int threads,
             const std::string& out_dir) {
    if (mode == "run") {
        const RunOutput out = run_replications(cfg, seed, threads);
        write_report(cfg.run.out, out_dir,
                     [&](std::ostream& os) { write_results_csv(os, cfg, seed, out); });
        if (!cfg.run.trace.empty())
            write_report(cfg.run.trace, out_dir,
                         [&](std::ostream& os) { write_trace_csv(os, cfg, seed, out.events); });
        if (!cfg.run.stats_trace.empty())
            write_report(cfg.run.stats_trace, out_dir,
                         [&](std::ostream& os) { write_stats_trace_csv(os, cfg, seed, out); });
        return 0;
    }
    if (mode == "sweep") {
        const SweepOutput out = run_sweep(cfg, seed, threads);
        write_report(cfg.sweep.out, out_dir,
                     [&](std::ostream& os) { write_sweep_csv(os, cfg, seed, out); });
        return 0;
    }
    if (mode == "audit") {
        const AuditOutput out = run_audit(cfg, seed, threads);
        write_report(cfg.audit.out, out_dir,
                     [&](std::ostream& os) { write_audit_csv(os, cfg, seed, out); });
        if (!out.all_passed) {
            std::cerr << "audit: invariant failure\n";
            return 2;
        }
        return 0;
    }
    // analyze: per-expert and aggregate complexity reports for the instance.
    const Instance inst = make_replication_instance(cfg, 0);
    require(inst.moments.has_value(), "analyze needs instance moments");
    std::vector<double> eps_values;
    if (cfg.sweep.present && cfg.sweep.variable == SweepVariable::Epsilon)
        eps_values = cfg.sweep.values;
    else
        eps_values = {0.5, 0.2, 0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001};
    const std::string id = inst.family;
    write_report("lambda.csv", out_dir.empty() ? "." : out_dir, [&](std::ostream& os) {
        os << "# config_hash=" << std::hex << cfg.hash << std::dec << " seed=" << seed << '\n';
        write_lambda_csv(os, id, *inst.moments, inst.loss);
    });
    write_report("complexity.csv", out_dir.empty() ? "." : out_dir, [&](std::ostream& os) {
        os << "# config_hash=" << std::hex << cfg.hash << std::dec << " seed=" << seed << '\n';
        write_complexity_csv(os, id, *inst.moments, inst.loss, eps_values, cfg.learner.delta);
    });
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"elimination-based expert selection: experiment harness"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed_flag = 0;
    int threads_flag = 0;
    std::string out_dir;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* threads_opt = nullptr;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "configuration file")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--seed", seed_flag, "override [run] seed");
        sub->add_option("--threads", threads_flag, "override [run] threads");
        sub->add_option("--out", out_dir, "directory for relative output paths");
    };

    CLI::App* sub_run = app.add_subcommand("run", "replicated experiment, results CSV");
    CLI::App* sub_sweep = app.add_subcommand("sweep", "rate sweep with log-log slope fit");
    CLI::App* sub_audit = app.add_subcommand("audit", "invariant checks over replications");
    CLI::App* sub_analyze = app.add_subcommand("analyze", "instance complexity reports");
    for (CLI::App* sub : {sub_run, sub_sweep, sub_audit, sub_analyze}) add_common(sub);

    CLI11_PARSE(app, argc, argv);

    std::string mode;
    for (CLI::App* sub : {sub_run, sub_sweep, sub_audit, sub_analyze})
        if (app.got_subcommand(sub)) {
            mode = sub->get_name();
            seed_opt = sub->get_option("--seed");
            threads_opt = sub->get_option("--threads");
        }

    try {
        const pairelim::Config cfg = pairelim::parse_config_file(config_path);
        const std::uint64_t seed = seed_opt->count() ? seed_flag : cfg.run.seed;
        const int threads = threads_opt->count() ? threads_flag : cfg.run.threads;
        return dispatch(mode, cfg, seed, threads, out_dir);
    } catch (const pairelim::contract_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
