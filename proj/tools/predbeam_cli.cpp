// Command-line front end: dataset generation, training, Monte-Carlo
// evaluation, the two sweep experiments, and the analytic gradient check.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "predbeam/predbeam.hpp"

namespace {

namespace fs = std::filesystem;
using namespace predbeam;

struct CommonOpts {
    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "out";
    bool paper_scale = false;
};

void add_common(CLI::App* sub, CommonOpts& opts) {
    sub->add_option("--config", opts.config_path,
                    "Config file with key = value lines");
    sub->add_option("--set", opts.overrides,
                    "Override one config key, e.g. --set realizations=50")
        ->type_name("KEY=VALUE");
    sub->add_option("--seed", opts.seed, "Master seed (overrides config)");
    sub->add_option("--out-dir", opts.out_dir, "Output directory")
        ->capture_default_str();
    sub->add_flag("--paper-scale", opts.paper_scale,
                  "Full experiment scale: 2000 realizations, 10000 training "
                  "episodes, 20000 iterations");
}

ExperimentConfig resolve_config(const CommonOpts& opts) {
    ExperimentConfig cfg;
    if (!opts.config_path.empty()) cfg = load_config_file(opts.config_path, cfg);
    for (const std::string& ov : opts.overrides) {
        const std::size_t eq = ov.find('=');
        if (eq == std::string::npos)
            throw config_error("--set expects KEY=VALUE, got: " + ov);
        apply_config_override(cfg, ov.substr(0, eq), ov.substr(eq + 1));
    }
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.paper_scale) cfg.apply_paper_scale();
    cfg.validate();
    return cfg;
}

void save_model(const fs::path& path, const Checkpoint& ckpt) {
    save_checkpoint(path.string(), ckpt);
    std::cout << "wrote " << path.string() << "\n";
}

void print_stats(double rho, double power_dbm,
                 const std::vector<MethodStats>& stats) {
    for (const MethodStats& st : stats)
        std::cout << "rho = " << format_double(rho)
                  << "  P = " << format_double(power_dbm) << " dBm  "
                  << st.method << ": mean sum-rate "
                  << format_double(st.mean_sum_rate) << " bits/s/Hz (std "
                  << format_double(st.std_sum_rate) << "), angle RMSE "
                  << format_double(st.angle_rmse) << " rad\n";
}

int run_gen_data(const CommonOpts& opts, double rho) {
    const ExperimentConfig cfg = resolve_config(opts);
    std::cerr << "[gen-data] generating " << cfg.train_set_size
              << " episodes at rho = " << format_double(rho) << "\n";
    const Dataset ds = generate_dataset(cfg, rho);
    fs::create_directories(opts.out_dir);
    const fs::path path = fs::path(opts.out_dir) / "dataset.txt";
    save_dataset(path.string(), ds);
    std::cout << "wrote " << path.string() << " (" << ds.examples.size()
              << " examples, sigma_E = " << format_double(ds.noise.sigma_e)
              << " rad)\n";
    return 0;
}

int run_train(const CommonOpts& opts, double rho, const std::string& data_path) {
    const ExperimentConfig cfg = resolve_config(opts);
    Dataset ds;
    if (!data_path.empty()) {
        ds = load_dataset(data_path);
        if (ds.examples.front().input.num_vehicles != cfg.num_vehicles ||
            ds.examples.front().input.window != cfg.window)
            throw config_error("dataset dims do not match config");
        std::cerr << "[train] loaded " << ds.examples.size() << " examples from "
                  << data_path << "\n";
    } else {
        std::cerr << "[train] generating " << cfg.train_set_size
                  << " episodes at rho = " << format_double(rho) << "\n";
        ds = generate_dataset(cfg, rho);
    }
    std::cerr << "[train] " << cfg.max_iterations << " iterations, batch "
              << cfg.batch_size << "\n";
    const TrainResult result = train(cfg, ds);
    fs::create_directories(opts.out_dir);
    save_model(fs::path(opts.out_dir) / "model.ckpt", result.checkpoint);
    {
        std::ofstream os(fs::path(opts.out_dir) / "loss_trace.csv", std::ios::binary);
        save_loss_trace(os, result.trace);
    }
    std::cout << "best validation loss " << format_double(result.best_val_loss)
              << " at iteration " << result.best_iteration << "\n";
    return 0;
}

int run_eval(const CommonOpts& opts, double rho, double power_dbm,
             const std::string& methods_csv, const std::string& model_path) {
    const ExperimentConfig cfg = resolve_config(opts);
    std::vector<std::string> methods;
    for (const std::string& m : split_fields(methods_csv, ','))
        methods.emplace_back(trim(m));
    std::optional<Checkpoint> model;
    if (!model_path.empty()) model = load_checkpoint(model_path);
    for (const std::string& m : methods)
        if (m == kMethodClrnet && !model)
            throw config_error("method 'clrnet' requires --model");

    const EvalCorpus corpus = build_eval_corpus(cfg);
    const std::vector<MethodStats> stats = evaluate_on_corpus(
        corpus, cfg, rho, power_dbm, methods, model ? &*model : nullptr);
    print_stats(rho, power_dbm, stats);
    std::vector<SweepResult> rows;
    for (const MethodStats& st : stats)
        rows.push_back(to_sweep_result(st, rho, power_dbm, cfg));
    const fs::path csv = emit_results(rows, opts.out_dir, "eval", cfg, "eval");
    std::cout << "wrote " << csv.string() << "\n";
    return 0;
}

int run_sweep_nmse(const CommonOpts& opts) {
    const ExperimentConfig cfg = resolve_config(opts);
    NmseSweepOutput out = sweep_nmse(cfg, &std::cerr);
    fs::create_directories(opts.out_dir);
    for (std::size_t i = 0; i < out.models.size(); ++i)
        save_model(fs::path(opts.out_dir) /
                       ("model-rho-" + format_double(cfg.nmse_grid[i]) + ".ckpt"),
                   out.models[i]);
    const fs::path csv =
        emit_results(std::move(out.results), opts.out_dir, "sweep-nmse", cfg,
                     "sweep-nmse");
    std::cout << "wrote " << csv.string() << "\n";
    return 0;
}

int run_sweep_power(const CommonOpts& opts, const std::string& model_path) {
    const ExperimentConfig cfg = resolve_config(opts);
    std::optional<Checkpoint> pretrained;
    if (!model_path.empty()) pretrained = load_checkpoint(model_path);
    PowerSweepOutput out =
        sweep_power(cfg, &std::cerr, pretrained ? &*pretrained : nullptr);
    fs::create_directories(opts.out_dir);
    save_model(fs::path(opts.out_dir) / "model.ckpt", out.model);
    const fs::path csv =
        emit_results(std::move(out.results), opts.out_dir, "sweep-power", cfg,
                     "sweep-power");
    std::cout << "wrote " << csv.string() << "\n";
    return 0;
}

int run_gradcheck(std::size_t nets, std::uint64_t seed, double tolerance) {
    const GradCheckReport report = run_gradient_check(nets, seed);
    std::cout << "checked " << report.scalars_checked << " parameter scalars on "
              << report.nets_checked << " networks\n";
    std::cout << "max relative error = " << format_double(report.max_rel_error)
              << " (tolerance " << format_double(tolerance) << ")\n";
    const bool ok = report.max_rel_error < tolerance;
    std::cout << (ok ? "gradcheck PASS\n" : "gradcheck FAIL\n");
    return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Predictive beamforming simulator and training harness"};
    app.require_subcommand(1);

    CommonOpts gen_opts;
    double gen_rho = 0.7;
    CLI::App* gen = app.add_subcommand(
        "gen-data", "Generate a training dataset of noisy angle histories");
    add_common(gen, gen_opts);
    gen->add_option("--rho", gen_rho, "Sensing NMSE for the inputs")
        ->capture_default_str();

    CommonOpts train_opts;
    double train_rho = 0.7;
    std::string train_data;
    CLI::App* tr = app.add_subcommand("train", "Train the angle predictor");
    add_common(tr, train_opts);
    tr->add_option("--rho", train_rho, "Sensing NMSE when generating data")
        ->capture_default_str();
    tr->add_option("--data", train_data, "Pre-generated dataset file");

    CommonOpts eval_opts;
    double eval_rho = 0.7, eval_power = 20.0;
    std::string eval_methods = "perfect,model-based";
    std::string eval_model;
    CLI::App* ev = app.add_subcommand(
        "eval", "Monte-Carlo sum-rate evaluation at one grid point");
    add_common(ev, eval_opts);
    ev->add_option("--rho", eval_rho, "Sensing NMSE")->capture_default_str();
    ev->add_option("--power-dbm", eval_power, "Total transmit power in dBm")
        ->capture_default_str();
    ev->add_option("--methods", eval_methods,
                   "Comma list from: perfect, model-based, clrnet")
        ->capture_default_str();
    ev->add_option("--model", eval_model, "Checkpoint for the clrnet method");

    CommonOpts nmse_opts;
    CLI::App* sn = app.add_subcommand(
        "sweep-nmse", "Sum-rate vs NMSE at fixed power (trains per grid point)");
    add_common(sn, nmse_opts);

    CommonOpts power_opts;
    std::string power_model;
    CLI::App* sp = app.add_subcommand(
        "sweep-power", "Sum-rate vs transmit power at fixed NMSE");
    add_common(sp, power_opts);
    sp->add_option("--model", power_model,
                   "Pre-trained checkpoint (skips training)");

    std::size_t gc_nets = 20;
    std::uint64_t gc_seed = 7;
    double gc_tol = 1e-5;
    CLI::App* gc = app.add_subcommand(
        "gradcheck", "Verify analytic gradients against finite differences");
    gc->add_option("--nets", gc_nets, "Number of random networks")
        ->capture_default_str();
    gc->add_option("--seed", gc_seed, "Seed for network/input sampling")
        ->capture_default_str();
    gc->add_option("--tolerance", gc_tol, "Max allowed relative error")
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return run_gen_data(gen_opts, gen_rho);
        if (tr->parsed()) return run_train(train_opts, train_rho, train_data);
        if (ev->parsed())
            return run_eval(eval_opts, eval_rho, eval_power, eval_methods,
                            eval_model);
        if (sn->parsed()) return run_sweep_nmse(nmse_opts);
        if (sp->parsed()) return run_sweep_power(power_opts, power_model);
        if (gc->parsed()) return run_gradcheck(gc_nets, gc_seed, gc_tol);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
