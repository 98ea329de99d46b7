// levy-she: config-driven experiments for the additive Lévy stochastic heat
// equation — exact/asymptotic tail curves, field simulation, Monte Carlo tail
// estimates, and the integral-test / peak-count growth experiments.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "levyshe/config.hpp"
#include "levyshe/errors.hpp"
#include "levyshe/report.hpp"

namespace {

using namespace levyshe;

struct CliArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed_override;
    std::optional<std::string> out_override;
};

ExperimentConfig load_config(const CliArgs& args) {
    ExperimentConfig cfg = ExperimentConfig::from_file(args.config_path);
    if (args.seed_override) {
        cfg.seed = *args.seed_override;
        cfg.fingerprint = fingerprint_hex(cfg.to_text() + "|seed=" + std::to_string(cfg.seed));
    }
    if (args.out_override) cfg.out_dir = *args.out_override;
    return cfg;
}

std::string out_path(const ExperimentConfig& cfg, const std::string& name) {
    return (std::filesystem::path(cfg.out_dir) / name).string();
}

void emit_curves(const ExperimentConfig& cfg, const std::string& stem,
                 const std::vector<TailCurve>& curves) {
    ReportMeta meta{cfg.fingerprint, cfg.seed};
    if (cfg.out_format == "csv" || cfg.out_format == "both")
        write_file_atomic(out_path(cfg, stem + ".csv"), tail_curves_csv(curves, meta));
    if (cfg.out_format == "json" || cfg.out_format == "both")
        write_file_atomic(out_path(cfg, stem + ".json"), tail_curves_json(curves, meta));
}

TailCurve eval_curve(const std::vector<double>& levels, CurveKind kind, const std::string& meta,
                     const std::function<double(double)>& fn,
                     const std::string& measure_tag = {}) {
    TailCurve c;
    c.levels = levels;
    c.kind = kind;
    c.meta = measure_tag.empty() ? meta : meta + " measure=" + measure_tag;
    c.values.reserve(levels.size());
    for (double r : levels) c.values.push_back(fn(r));
    return c;
}

int run_tails(const ExperimentConfig& cfg) {
    cfg.validate_for(ExperimentKind::Tails);
    const auto& spec = cfg.measure;
    const auto& mp = cfg.model;
    std::vector<double> levels = log_levels(cfg.levels_min, cfg.levels_max, cfg.levels_per_decade);
    std::vector<double> levels_gt1 = levels;  // d=1 peak tails live on (1,∞)
    if (mp.d == 1) {
        levels_gt1.clear();
        for (double r : levels)
            if (r > 1.0) levels_gt1.push_back(r);
        if (levels_gt1.empty())
            throw Error(ErrorCode::ConfigInvalid,
                        "tails: all levels <= 1 but d=1 peak tails need levels > 1");
    }

    {
        std::vector<TailCurve> eta;
        eta.push_back(eval_curve(levels, CurveKind::ExactQuadrature, "contribution tail",
                                 [&](double r) { return contribution_tail(spec, mp, r); },
                                 spec.describe()));
        eta.push_back(eval_curve(levels, CurveKind::ExactAlternate, "time-slice representation",
                                 [&](double r) { return contribution_tail_alternate(spec, mp, r); }));
        try {
            eta.push_back(eval_curve(levels, CurveKind::Asymptotic, "regime prediction",
                                     [&](double r) { return contribution_tail_asymptotic(spec, mp, r); }));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::Unclassified) throw;
        }
        emit_curves(cfg, "tails_eta", eta);
    }
    {
        std::vector<TailCurve> tau;
        tau.push_back(eval_curve(levels_gt1, CurveKind::ExactQuadrature, "kernel-peak tail",
                                 [&](double r) { return kernel_peak_tail(spec, mp, r); },
                                 spec.describe()));
        try {
            tau.push_back(eval_curve(levels_gt1, CurveKind::Asymptotic, "regime prediction",
                                     [&](double r) { return kernel_peak_tail_asymptotic(spec, mp, r); }));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::Unclassified) throw;
        }
        emit_curves(cfg, "tails_tau", tau);
    }
    {
        std::vector<double> lv = mp.d == 1 ? levels_gt1 : levels;
        std::vector<TailCurve> cell(3);
        for (auto& c : cell) c.levels = lv;
        cell[0].kind = CurveKind::ExactQuadrature;
        cell[0].meta = "unit-cell tail measure=" + spec.describe();
        cell[1].kind = CurveKind::Asymptotic;
        cell[1].meta = "sandwich_lower";
        cell[2].kind = CurveKind::Asymptotic;
        cell[2].meta = "sandwich_upper";
        for (double r : lv) {
            UnitCellTail u = unit_cell_tail(spec, mp, r);
            cell[0].values.push_back(u.value);
            cell[1].values.push_back(u.lower_bound);
            cell[2].values.push_back(u.upper_bound);
        }
        emit_curves(cfg, "tails_eta0", cell);
    }
    {
        std::vector<double> lv = mp.d == 1 ? levels_gt1 : levels;
        std::vector<TailCurve> region;
        region.push_back(eval_curve(lv, CurveKind::ExactQuadrature, "region-sup tail",
                                    [&](double r) { return region_sup_tail(spec, mp, cfg.region, r); },
                                    spec.describe()));
        double volA = cfg.region.volume();
        double alpha = spec.tail_index();
        if (alpha > 0.0 && alpha < 2.0 / mp.d) {
            double c_star = region_sup_heavy_constant(spec, mp, cfg.region);
            region.push_back(eval_curve(lv, CurveKind::Asymptotic, "heavy-regime lambda-tail limit",
                                        [&](double r) { return c_star * spec.tail(r); }));
        } else {
            region.push_back(eval_curve(lv, CurveKind::Asymptotic, "volume x kernel-peak tail",
                                        [&](double r) { return volA * kernel_peak_tail(spec, mp, r); }));
        }
        emit_curves(cfg, "tails_etaA", region);
    }
    return 0;
}

int run_simulate(const ExperimentConfig& cfg) {
    cfg.validate_for(ExperimentKind::Simulate);
    GridSpec grid;
    grid.d = cfg.model.d;
    for (int i = 0; i < grid.d; ++i) {
        grid.lo[i] = cfg.region.lo[i];
        grid.hi[i] = cfg.region.hi[i];
        grid.n[i] = std::max(cfg.grid_n, 1);
    }
    FieldSample field = simulate_field(cfg.measure, cfg.model, grid, cfg.epsilon, cfg.padding,
                                       cfg.seed);
    ReportMeta meta{cfg.fingerprint, cfg.seed};
    write_file_atomic(out_path(cfg, "field.csv"), field_csv(field, meta));
    return 0;
}

int run_mc_tail(const ExperimentConfig& cfg) {
    cfg.validate_for(ExperimentKind::McTail);
    const auto& spec = cfg.measure;
    const auto& mp = cfg.model;
    std::vector<double> levels = log_levels(cfg.levels_min, cfg.levels_max, cfg.levels_per_decade);
    bool needs_gt1 = mp.d == 1 && (cfg.estimand == Estimand::RegionSum ||
                                   cfg.estimand == Estimand::RegionPeak);
    if (needs_gt1) {
        std::vector<double> filtered;
        for (double r : levels)
            if (r > 1.0) filtered.push_back(r);
        levels = std::move(filtered);
        if (levels.empty())
            throw Error(ErrorCode::ConfigInvalid, "mc-tail: d=1 region estimands need levels > 1");
    }

    McOptions opt;
    opt.n_replicates = cfg.replicates;
    opt.seed = cfg.seed;
    opt.region = cfg.region;
    opt.grid_n = cfg.grid_n;
    opt.eps = cfg.epsilon;
    opt.padding = cfg.padding;
    opt.threads = cfg.threads;
    opt.keep_values = cfg.write_replicates;
    McResult res = mc_tail(cfg.estimand, spec, mp, levels, opt);

    std::vector<TailCurve> curves;
    curves.push_back(res.curve);
    double volA = cfg.region.volume();
    switch (cfg.estimand) {
        case Estimand::MaxContribution:
            curves.push_back(eval_curve(levels, CurveKind::ExactQuadrature, "exact law",
                                        [&](double r) { return 1.0 - max_contribution_cdf(spec, mp, r); }));
            break;
        case Estimand::RegionPeak:
            curves.push_back(eval_curve(levels, CurveKind::ExactQuadrature, "exact law",
                                        [&](double r) { return region_peak_tailprob(spec, mp, volA, r); }));
            break;
        case Estimand::PointValue:
            curves.push_back(eval_curve(levels, CurveKind::Asymptotic, "tail equivalence",
                                        [&](double r) { return contribution_tail(spec, mp, r); }));
            break;
        case Estimand::RegionSum:
            curves.push_back(eval_curve(levels, CurveKind::Asymptotic, "tail equivalence",
                                        [&](double r) { return volA * kernel_peak_tail(spec, mp, r); }));
            break;
        case Estimand::RegionSupGrid:
            curves.push_back(eval_curve(levels, CurveKind::Asymptotic, "tail equivalence",
                                        [&](double r) { return region_sup_tail(spec, mp, cfg.region, r); }));
            break;
    }
    emit_curves(cfg, "mc_tail", curves);
    if (cfg.write_replicates) {
        ReportMeta meta{cfg.fingerprint, cfg.seed};
        write_file_atomic(out_path(cfg, "values.csv"),
                          replicate_values_csv(estimand_name(cfg.estimand), res.values, meta));
    }
    return 0;
}

int run_growth(const ExperimentConfig& cfg) {
    cfg.validate_for(ExperimentKind::GrowthTest);
    GrowthReport report;
    report.integral = integral_test(cfg.which, cfg.measure, cfg.model, cfg.rate);
    if (cfg.which != GrowthTail::KernelPeak) {
        // lattice maxima: both one-sided tests (they may genuinely disagree)
        report.integral_upper = integral_test(GrowthTail::Contribution, cfg.measure, cfg.model, cfg.rate);
        report.integral_lower = integral_test(GrowthTail::UnitCell, cfg.measure, cfg.model, cfg.rate);
    }
    ReportMeta meta{cfg.fingerprint, cfg.seed};
    write_file_atomic(out_path(cfg, "growth.json"), growth_report_json(report, meta));
    return 0;
}

int run_peaks(const ExperimentConfig& cfg) {
    cfg.validate_for(ExperimentKind::Peaks);
    double delta = cfg.delta > 0.0 ? cfg.delta : 0.5 * cfg.model.t;
    GrowthReport report;
    report.events = peak_events(cfg.event_kind, cfg.measure, cfg.model, cfg.rate, cfg.K,
                                cfg.n_max, delta, cfg.seed, cfg.runs);
    if (cfg.event_kind == EventKind::LatticePeak) {
        report.integral = integral_test(GrowthTail::UnitCell, cfg.measure, cfg.model, cfg.rate);
        report.integral_upper = integral_test(GrowthTail::Contribution, cfg.measure, cfg.model, cfg.rate);
    } else {
        report.integral = integral_test(GrowthTail::KernelPeak, cfg.measure, cfg.model, cfg.rate);
    }
    ReportMeta meta{cfg.fingerprint, cfg.seed};
    write_file_atomic(out_path(cfg, "peaks.json"), growth_report_json(report, meta));
    write_file_atomic(out_path(cfg, "peak_counts.csv"), peak_counts_csv(*report.events, meta));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tail analytics and simulation for the additive Lévy stochastic heat equation"};
    app.require_subcommand(1);

    CliArgs args;
    std::string kind_name;
    for (const char* name : {"tails", "simulate", "mc-tail", "growth-test", "peaks"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("config", args.config_path, "experiment config file")->required();
        sub->add_option("--seed", [&](const CLI::results_t& res) {
            args.seed_override = std::stoull(res[0]);
            return true;
        }, "override the config seed");
        sub->add_option("--out", [&](const CLI::results_t& res) {
            args.out_override = res[0];
            return true;
        }, "override the output directory");
        sub->callback([&, name]() { kind_name = name; });
    }

    CLI11_PARSE(app, argc, argv);

    try {
        levyshe::ExperimentConfig cfg = load_config(args);
        switch (levyshe::experiment_kind_from_name(kind_name)) {
            case levyshe::ExperimentKind::Tails: return run_tails(cfg);
            case levyshe::ExperimentKind::Simulate: return run_simulate(cfg);
            case levyshe::ExperimentKind::McTail: return run_mc_tail(cfg);
            case levyshe::ExperimentKind::GrowthTest: return run_growth(cfg);
            case levyshe::ExperimentKind::Peaks: return run_peaks(cfg);
        }
    } catch (const levyshe::Error& e) {
        std::cerr << levyshe::error_code_name(e.code()) << ": " << e.what() << "\n";
        switch (e.code()) {
            case levyshe::ErrorCode::ConfigInvalid: return 2;
            case levyshe::ErrorCode::ConditionViolated:
            case levyshe::ErrorCode::SupInfinite: return 3;
            default: return 4;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
