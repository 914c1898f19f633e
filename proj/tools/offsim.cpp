// offsim command-line front end.
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "offsim/agent.hpp"
#include "offsim/channel.hpp"
#include "offsim/csv.hpp"
#include "offsim/experiment.hpp"
#include "offsim/metrics.hpp"
#include "offsim/policies.hpp"
#include "offsim/qnetwork.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace offsim;

namespace {

struct CommonOptions {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir = ".";
};

std::uint64_t fnv1a(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return buf;
}

class Run {
public:
    Run(std::string command, const CommonOptions& opts) : command_(std::move(command)), opts_(opts) {
        KeyValueConfig cfg;
        if (!opts.config_path.empty()) cfg = KeyValueConfig::load(opts.config_path);
        for (const auto& o : opts.overrides) cfg.set_assignment(o);
        config = ExperimentConfig::from_config(cfg);
        fs::create_directories(opts.out_dir);
        manifest_["command"] = command_;
        manifest_["config_file"] = opts.config_path;
        manifest_["overrides"] = opts.overrides;
    }

    std::string path(const std::string& name) const { return (fs::path(opts_.out_dir) / name).string(); }

    void input(const std::string& role, const std::string& file) {
        manifest_["inputs"][role] = {{"path", file}, {"fnv1a64", hex(fnv1a(read_text_file(file)))}};
    }

    // Writes, reads back and records an output artifact.
    void output(const std::string& role, const std::string& file, const std::string& content) {
        write_text_file(file, content);
        if (read_text_file(file) != content) throw std::runtime_error("output verification failed: " + file);
        manifest_["outputs"][role] = {{"path", file}, {"fnv1a64", hex(fnv1a(content))}};
    }

    void note(const std::string& key, ordered_json value) { manifest_[key] = std::move(value); }

    void finish() {
        manifest_["seeds"] = {{"eval", config.eval_seeds},
                              {"train", config.train.seed},
                              {"eval_trace", config.eval_trace_seed},
                              {"train_trace", config.train_trace_seed}};
        ordered_json resolved;
        const KeyValueConfig snapshot = config.to_config();
        for (const auto& [k, v] : snapshot.values()) resolved[k] = v;
        manifest_["resolved_config"] = resolved;
        manifest_["timestamp"] = utc_timestamp();
        write_text_file(path("manifest_" + command_ + ".json"), manifest_.dump(2) + "\n");
    }

    ExperimentConfig config;

private:
    std::string command_;
    CommonOptions opts_;
    ordered_json manifest_;
};

void add_common(CLI::App* sub, CommonOptions& opts) {
    sub->add_option("--config", opts.config_path, "Flat key = value configuration file")->check(CLI::ExistingFile);
    sub->add_option("--set", opts.overrides, "Override a config key (key=value); repeatable");
    sub->add_option("--out-dir", opts.out_dir, "Directory for outputs and the run manifest");
}

ScenarioTrace trace_for(Run& run, const std::string& trace_path, bool training) {
    if (trace_path.empty()) return training ? run.config.train_trace() : run.config.eval_trace();
    if (!fs::exists(trace_path)) throw TraceError("trace file not found: " + trace_path);
    run.input("trace", trace_path);
    return load_trace(trace_path, run.config.env.system);
}

int cmd_fit_channel(const std::string& trace_path) {
    const auto samples = load_throughput_trace(trace_path);
    const ChannelFit fit = fit_rayleigh_with_stats(samples);
    std::cout << "sigma_mbps," << fixed(fit.model.sigma, 6) << "\n"
              << "samples," << fit.n << "\n"
              << "mean_mbps," << fixed(fit.mean, 6) << "\n"
              << "min_mbps," << fixed(fit.min, 6) << "\n"
              << "max_mbps," << fixed(fit.max, 6) << "\n"
              << "rayleigh_mean_mbps," << fixed(fit.model.sigma * std::sqrt(M_PI / 2), 6) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"offsim: robust task-offloading simulator and policy lab"};
    app.require_subcommand(1);
    CommonOptions opts;

    auto* fit = app.add_subcommand("fit-channel", "Fit a Rayleigh scale to a throughput trace (Mbit/s per line)");
    std::string throughput_path;
    fit->add_option("trace", throughput_path, "Throughput trace file")->required();

    auto* gen = app.add_subcommand("generate", "Generate a synthetic scenario trace");
    add_common(gen, opts);
    std::string gen_out = "trace.csv";
    bool gen_training = false;
    gen->add_option("--out", gen_out, "Output trace file name (inside --out-dir)");
    gen->add_flag("--training", gen_training, "Use the training-trace length and seed");

    auto* tr = app.add_subcommand("train", "Train the Double-DQN agent");
    add_common(tr, opts);
    std::string train_trace_path, checkpoint_out = "qnet.ckpt";
    tr->add_option("--trace", train_trace_path, "Training trace CSV (default: generated from config)");
    tr->add_option("--out", checkpoint_out, "Checkpoint file name (inside --out-dir)");

    auto* ev = app.add_subcommand("eval", "Evaluate policies on a trace");
    add_common(ev, opts);
    std::string eval_trace_path, checkpoint_in, policies = "local,ragnostic,oracle", steps_out;
    ev->add_option("--trace", eval_trace_path, "Evaluation trace CSV (default: generated from config)");
    ev->add_option("--policy", policies, "Comma list of local, ragnostic, oracle, drl");
    ev->add_option("--checkpoint", checkpoint_in, "Network checkpoint (required by drl)");
    ev->add_option("--steps-out", steps_out, "Also write a per-step log with this file name");

    auto* sw = app.add_subcommand("sweep", "Deterministic latency/energy sweeps");
    add_common(sw, opts);
    std::string sweep_kind, grid_text;
    double fixed_q = 15.0, fixed_phi = 8.0;
    sw->add_option("kind", sweep_kind, "channel or queue")->required()->check(CLI::IsMember({"channel", "queue"}));
    sw->add_option("--grid", grid_text, "Grid as a,b,c or start:stop:step");
    sw->add_option("--q", fixed_q, "Fixed server delay for channel sweeps (ms)");
    sw->add_option("--phi", fixed_phi, "Fixed channel rate for queue sweeps (Mbit/s)");

    auto* dump = app.add_subcommand("dump-config", "Print the resolved configuration");
    add_common(dump, opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (fit->parsed()) return cmd_fit_channel(throughput_path);

        if (dump->parsed()) {
            KeyValueConfig cfg;
            if (!opts.config_path.empty()) cfg = KeyValueConfig::load(opts.config_path);
            for (const auto& o : opts.overrides) cfg.set_assignment(o);
            const auto x = ExperimentConfig::from_config(cfg);
            std::cout << "# offsim resolved configuration (defaults < --config < --set)\n" << x.to_config().dump();
            return 0;
        }

        if (gen->parsed()) {
            Run run("generate", opts);
            const auto& x = run.config;
            const ScenarioTrace trace = gen_training ? x.train_trace() : x.eval_trace();
            run.output("trace", run.path(gen_out), trace_to_csv(trace, x.env.system));
            run.note("frames", trace.size());
            run.note("mean_map_full", mean_map_full(trace));
            run.finish();
            return 0;
        }

        if (tr->parsed()) {
            Run run("train", opts);
            const ScenarioTrace trace = trace_for(run, train_trace_path, true);
            run.config.resolve_threshold(trace);
            run.note("map_th", run.config.env.system.map_th);
            OffloadTrainingEnv env(trace, run.config.env);
            const TrainResult result = train(env, run.config.train);
            run.output("checkpoint", run.path(checkpoint_out), checkpoint_to_string(result.network));
            run.output("training_log", run.path("training_log.csv"), training_log_csv(result.log));
            run.note("total_steps", result.total_steps);
            run.finish();
            return 0;
        }

        if (ev->parsed()) {
            Run run("eval", opts);
            const ScenarioTrace trace = trace_for(run, eval_trace_path, false);
            run.config.resolve_threshold(trace);
            run.note("map_th", run.config.env.system.map_th);
            std::optional<QNetwork> net;
            if (!checkpoint_in.empty()) {
                run.input("checkpoint", checkpoint_in);
                net = load_checkpoint(checkpoint_in);
            }
            std::vector<EvalReport> reports;
            StepLogCsv steps;
            for (const auto& name : split_list(policies)) {
                const auto policy = make_policy(name, run.config.env.system, net ? &*net : nullptr);
                StepObserver observer;
                if (!steps_out.empty())
                    observer = [&](std::uint64_t seed, const PolicyDecision& d, const StepResult& r) {
                        steps.add(seed, d, r, trace.frames[r.frame_index].map_full);
                    };
                reports.push_back(evaluate(*policy, trace, run.config.env, run.config.eval_seeds, observer));
            }
            run.output("eval_report", run.path("eval_report.csv"), eval_report_csv(reports));
            if (!steps_out.empty()) run.output("steps", run.path(steps_out), steps.text());
            run.finish();
            return 0;
        }

        if (sw->parsed()) {
            Run run("sweep", opts);
            const auto& sys = run.config.env.system;
            std::vector<SweepRow> rows;
            if (sweep_kind == "channel") {
                rows = sweep_channel(sys, parse_grid(grid_text.empty() ? "2:12:0.5" : grid_text), fixed_q);
                run.note("fixed_q_ms", fixed_q);
            } else {
                rows = sweep_queue(sys, parse_grid(grid_text.empty() ? "0:60:2.5" : grid_text), fixed_phi);
                run.note("fixed_phi_mbps", fixed_phi);
            }
            run.output("sweep", run.path("sweep_" + sweep_kind + ".csv"), sweep_csv(rows));
            run.finish();
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
