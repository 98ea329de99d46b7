#include "levyshe/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "levyshe/config.hpp"
#include "levyshe/errors.hpp"

namespace levyshe {

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 12);
    return std::string(buf, res.ptr);
}

std::string fingerprint_hex(const std::string& data) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(data)));
    return std::string(buf);
}

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::ConfigInvalid, "cannot write '" + tmp.string() + "'");
        out << content;
        if (!out) throw Error(ErrorCode::ConfigInvalid, "write failed for '" + tmp.string() + "'");
    }
    fs::rename(tmp, target);
}

namespace {

void append_meta(std::ostringstream& os, const ReportMeta& meta) {
    os << "# schema=1\n";
    os << "# fingerprint=" << meta.fingerprint << "\n";
    os << "# seed=" << meta.seed << "\n";
}

}  // namespace

std::string tail_curves_csv(const std::vector<TailCurve>& curves, const ReportMeta& meta) {
    std::ostringstream os;
    append_meta(os, meta);
    for (const auto& c : curves)
        if (!c.meta.empty()) os << "# curve " << curve_kind_name(c.kind) << ": " << c.meta << "\n";
    os << "r,value,kind,ci_halfwidth\n";
    for (const auto& c : curves) {
        for (std::size_t i = 0; i < c.levels.size(); ++i) {
            os << format_number(c.levels[i]) << "," << format_number(c.values[i]) << ","
               << curve_kind_name(c.kind) << ",";
            if (i < c.ci_halfwidth.size()) os << format_number(c.ci_halfwidth[i]);
            os << "\n";
        }
    }
    return os.str();
}

std::string tail_curves_json(const std::vector<TailCurve>& curves, const ReportMeta& meta) {
    nlohmann::json j;
    j["schema"] = 1;
    j["fingerprint"] = meta.fingerprint;
    j["seed"] = meta.seed;
    j["curves"] = nlohmann::json::array();
    for (const auto& c : curves) {
        nlohmann::json jc;
        jc["kind"] = curve_kind_name(c.kind);
        jc["meta"] = c.meta;
        jc["r"] = c.levels;
        jc["value"] = c.values;
        if (!c.ci_halfwidth.empty()) jc["ci_halfwidth"] = c.ci_halfwidth;
        j["curves"].push_back(std::move(jc));
    }
    return j.dump(2) + "\n";
}

std::string field_csv(const FieldSample& field, const ReportMeta& meta) {
    std::ostringstream os;
    append_meta(os, meta);
    os << "# bias_bound=" << format_number(field.bias_bound)
       << " padding=" << format_number(field.padding) << " eps=" << format_number(field.eps)
       << " n_atoms=" << field.n_atoms
       << " sup_queries_valid=" << (field.sup_queries_valid ? "true" : "false") << "\n";
    for (int i = 0; i < field.grid.d; ++i) os << "x" << (i + 1) << ",";
    os << "value\n";
    for (std::size_t i = 0; i < field.values.size(); ++i) {
        auto x = field.grid.point(i);
        for (int k = 0; k < field.grid.d; ++k) os << format_number(x[k]) << ",";
        os << format_number(field.values[i]) << "\n";
    }
    return os.str();
}

namespace {

nlohmann::json integral_json(const IntegralTestResult& r) {
    nlohmann::json j;
    j["verdict"] = verdict_name(r.verdict);
    j["analytic"] = r.analytic;
    j["partial_R"] = r.partial_R;
    j["partial_values"] = r.partial_values;
    j["loglog_slope"] = r.loglog_slope;
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

}  // namespace

std::string growth_report_json(const GrowthReport& report, const ReportMeta& meta) {
    nlohmann::json j;
    j["schema"] = 1;
    j["fingerprint"] = meta.fingerprint;
    j["seed"] = meta.seed;
    j["integral_test"] = integral_json(report.integral);
    if (report.integral_upper) j["integral_test_contribution"] = integral_json(*report.integral_upper);
    if (report.integral_lower) j["integral_test_unit_cell"] = integral_json(*report.integral_lower);
    if (report.events) {
        const auto& ev = *report.events;
        nlohmann::json je;
        je["event_kind"] = event_kind_name(ev.kind);
        je["K"] = ev.K;
        je["delta"] = ev.delta;
        je["n_start"] = ev.n_start;
        je["n_max"] = ev.n_max;
        je["expected_total"] = ev.expected_total;
        je["expected_total_var"] = ev.expected_total_var;
        je["run_totals"] = ev.run_totals;
        je["run_last_event_n"] = ev.run_last_n;
        nlohmann::json cum = nlohmann::json::array();
        for (auto& [n, v] : ev.cum_expected) cum.push_back({{"n", n}, {"cum_expected", v}});
        je["cum_expected"] = std::move(cum);
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& row : ev.trajectory)
            rows.push_back({{"n", row.n}, {"mean", row.mean}, {"indicator", row.count > 0},
                            {"count", row.count}});
        je["annuli"] = std::move(rows);
        j["events"] = std::move(je);
    }
    return j.dump(2) + "\n";
}

std::string peak_counts_csv(const PeakEventReport& report, const ReportMeta& meta) {
    std::ostringstream os;
    append_meta(os, meta);
    os << "# event_kind=" << event_kind_name(report.kind) << " K=" << format_number(report.K)
       << " runs=" << report.run_totals.size() << "\n";
    os << "n,mean,count,cum_expected,cum_observed\n";
    double cum_exp = 0.0;
    std::uint64_t cum_obs = 0;
    for (const auto& row : report.trajectory) {
        cum_exp += -std::expm1(-row.mean);
        cum_obs += row.count > 0 ? 1 : 0;
        os << row.n << "," << format_number(row.mean) << "," << row.count << ","
           << format_number(cum_exp) << "," << cum_obs << "\n";
    }
    return os.str();
}

std::string replicate_values_csv(const std::string& estimand, const std::vector<double>& values,
                                 const ReportMeta& meta) {
    std::ostringstream os;
    append_meta(os, meta);
    os << "replicate,estimand,value\n";
    for (std::size_t i = 0; i < values.size(); ++i)
        os << i << "," << estimand << "," << format_number(values[i]) << "\n";
    return os.str();
}

}  // namespace levyshe
