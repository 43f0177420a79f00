// Command-line front end: every subcommand reads an optional key-value configuration
// file and applies --key=value overrides on top of it.
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oscdiff/config.hpp"
#include "oscdiff/csv.hpp"
#include "oscdiff/errors.hpp"
#include "oscdiff/study.hpp"

using namespace oscdiff;

namespace {

StudyConfig resolve_config(const std::string& path, const std::vector<std::string>& extras) {
    StudyConfig cfg = path.empty() ? StudyConfig{} : load_config(path);
    for (const auto& arg : extras) {
        if (arg.rfind("--", 0) != 0) throw ConfigurationError("unexpected argument '" + arg + "'");
        const auto eq = arg.find('=');
        if (eq == std::string::npos) {
            throw ConfigurationError("override '" + arg + "' must have the form --key=value");
        }
        set_config_value(cfg, arg.substr(2, eq - 2), arg.substr(eq + 1));
    }
    validate(cfg);
    return cfg;
}

void print_orders(const ConvergenceStudy& study, const char* what) {
    for (const auto& o : study.orders) {
        std::printf("eps=%-10.3g fitted %s order %.4f\n", o.eps, what, o.order);
    }
}

template <class Row>
void emit(const StudyConfig& cfg, const std::vector<Row>& rows) {
    if (cfg.output.empty()) {
        write_csv(std::cout, rows);
    } else {
        save_csv(cfg.output, rows);
        std::printf("wrote %s\n", cfg.output.c_str());
    }
}

int cmd_run(const StudyConfig& cfg) {
    const double eps = cfg.eps.front();
    const Problem problem = make_problem(cfg, cfg.n, eps);
    const RunResult run = run_scheme(cfg, problem, cfg.scheme, cfg.dt.front(), cfg.t_fin,
                                     solve_settings(cfg, false), !cfg.output.empty());
    std::printf("%s N=%d eps=%g: %ld steps of %.6g, t=%.6g, |c|=%.10g\n", cfg.scheme.c_str(),
                cfg.n, eps, run.steps, run.dt, run.state.time, run.state.values.norm());
    if (!cfg.output.empty()) {
        save_csv(cfg.output, run.trace);
        std::printf("wrote %s\n", cfg.output.c_str());
    }
    return 0;
}

int cmd_converge_time(const StudyConfig& cfg) {
    const ConvergenceStudy study = time_convergence(cfg);
    emit(cfg, study.rows);
    print_orders(study, "temporal");
    for (const auto& [dt, ratio] : uniformity_ratios(study.rows)) {
        std::printf("dt=%-10.4g max/min error over eps %.4f\n", dt, ratio);
    }
    return 0;
}

int cmd_converge_space(const StudyConfig& cfg) {
    const ConvergenceStudy study = space_convergence(cfg);
    emit(cfg, study.rows);
    print_orders(study, "spatial");
    return 0;
}

int cmd_compare_cn(const StudyConfig& cfg) {
    const TraceComparison cmp = compare_cn(cfg);
    if (!cfg.output.empty()) {
        save_csv(cfg.output + ".ref.csv", cmp.reference);
        save_csv(cfg.output + ".ua2.csv", cmp.ua2);
        save_csv(cfg.output + ".cn.csv", cmp.cn);
        std::printf("wrote %s.{ref,ua2,cn}.csv\n", cfg.output.c_str());
    }
    std::printf("max relative deviation: ua2 %.6e, cn %.6e\n", cmp.ua2_deviation,
                cmp.cn_deviation);
    return 0;
}

int cmd_twoscale(const StudyConfig& cfg, bool both) {
    const auto rows = both ? twoscale_study(cfg) : twoscale_study(cfg, {cfg.order});
    emit(cfg, rows);
    return 0;
}

int cmd_oracle(const StudyConfig& cfg) {
    emit(cfg, oracle_study(cfg));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Advection-diffusion around an adsorbing obstacle with oscillatory velocity"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("-c,--config", config_path, "key = value configuration file")
        ->check(CLI::ExistingFile);
    app.footer("Any configuration key can be overridden with --key=value, e.g. --eps=1e-2,1e-3.\n"
               "Keys: test scheme N N_list eps dt t_fin D A delta phi_pot M sigma y0 R_B P\n"
               "      dt_ref N_ref ref_scheme solver ref_solver tolerance order centered\n"
               "      dt_sub cache_dir output threads");

    auto add = [&](const char* name, const char* help) {
        auto* sub = app.add_subcommand(name, help);
        sub->allow_extras();
        return sub;
    };
    auto* run = add("run", "single integration; with output set, writes the detector trace");
    auto* ct = add("converge-time", "error table over eps x dt against the reference");
    auto* cs = add("converge-space", "error table over eps x N_list against the reference");
    auto* cn = add("compare-cn", "detector traces of UA2 and Crank-Nicolson against the reference");
    auto* ts = add("twoscale", "averaged-model errors against the reference");
    bool both_orders = false;
    ts->add_flag("--both", both_orders, "evaluate orders 1 and 2");
    auto* oracle = add("oracle", "scheme errors against dense RK4 (N <= 40)");

    CLI11_PARSE(app, argc, argv);

    try {
        CLI::App* sub = app.get_subcommands().front();
        const StudyConfig cfg = resolve_config(config_path, sub->remaining());
        if (sub == run) return cmd_run(cfg);
        if (sub == ct) return cmd_converge_time(cfg);
        if (sub == cs) return cmd_converge_space(cfg);
        if (sub == cn) return cmd_compare_cn(cfg);
        if (sub == ts) return cmd_twoscale(cfg, both_orders);
        if (sub == oracle) return cmd_oracle(cfg);
    } catch (const ConfigurationError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
